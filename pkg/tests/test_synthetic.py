"""
합성 피험자: 생성 모델, 프로바이더 동작, 하네스가 알려진 파라미터를 되찾는지 확인하는 검증 실행
"""

import numpy as np
import pytest

from src.analysis.analyses import bias_analysis, introspection_analysis, lift_analysis
from src.analysis.tables import AnalysisSettings, build_decision_table
from src.baseline import accuracy, run_baseline, run_elicitation
from src.baseline.prompts import OBJECTIVE_SCALE, SELF_CONFIDENCE_SCALE, build_judge_prompt, render_question
from src.games import (
    GameSettings,
    StrategyTestSettings,
    run_delegate_game,
    run_pass_game,
    run_second_chance,
    strategy_tests,
    summarize,
    team_accuracy,
)
from src.games.prompts import TEAMMATE_CORRECT_MARK, TEAMMATE_INCORRECT_MARK
from src.games.second_chance import lift_test, paired_changes
from src.models.question import OPTION_LABELS, Question, QuestionFormat, QuestionSet, QuestionSource
from src.models.records import (
    Decision,
    ElicitedKind,
    Regime,
    SecondChanceVariant,
    StrategyOutcome,
    TeammateProfile,
    Verdict,
)
from src.synthetic import (
    SubjectParams,
    SyntheticSubject,
    SyntheticWorld,
    baseline_belief,
    expected_accuracy,
    expected_normalized_lift,
    internal_confidence,
    second_chance_behavior,
    synth_baseline,
    teammate_accuracy_from_prompt,
)
from src.synthetic.subject import judge_reply
from src.synthetic.world import MIN_TOP_MASS, percent_bin_masses
from src.utils.errors import ConfigError, ProviderTransportError

from tests.conftest import sa_question

SELF_MODELER = SubjectParams(introspection_fidelity=1.0, self_model_fidelity=0.8, context_noise=0.1)
NOISE_ADDER = SubjectParams(self_model_fidelity=0.8, context_noise=0.1, game_entropy_boost=0.25)
REPEATER = SubjectParams(self_model_fidelity=0.0, context_noise=0.0, game_entropy_boost=0.0)
QUICK = AnalysisSettings(resamples=200)


def synthetic_items(n: int, prefix: str = 'syn') -> QuestionSet:
    questions = [
        Question(
            id=f"{prefix}-{i:04d}",
            text=f"Synthetic item {i} concerns topic {i % 17}{' in detail' * (i % 4)}?",
            format=QuestionFormat.MULTIPLE_CHOICE,
            reference_answer=OPTION_LABELS[i % 4],
            options=tuple(f"{word} {i}" for word in ('red', 'green', 'blue', 'gray')),
            descriptors={'domain': ('physics', 'biology', 'chemistry')[i % 3]},
        )
        for i in range(n)
    ]
    return QuestionSet(name=prefix, source=QuestionSource.GPQA, questions=questions)


def subject_for(params: SubjectParams, question_set: QuestionSet, seed: int = 0):
    world = SyntheticWorld(seed=seed)
    subject = SyntheticSubject(params, world)
    subject.bind_questions(question_set.questions)
    baseline = synth_baseline(params, world, question_set.questions, model_id=subject.model_id,
                              dataset=question_set.name)
    return subject, world, baseline


def delegate_table(params: SubjectParams, question_set: QuestionSet, target: float = 0.5, seed: int = 0):
    subject, world, baseline = subject_for(params, question_set, seed)
    trials = run_delegate_game(subject, question_set, baseline, TeammateProfile(target, seed=seed), seed=seed,
                               settings=GameSettings(phase1_size=50))
    return trials, baseline, build_decision_table(trials, baseline, question_set.questions)


def second_chance_trials(params: SubjectParams, question_set: QuestionSet, seed: int = 0):
    subject, world, baseline = subject_for(params, question_set, seed)
    game = run_second_chance(subject, question_set, baseline, SecondChanceVariant.INCORRECT)
    neutral = run_second_chance(subject, question_set, baseline, SecondChanceVariant.NEUTRAL)
    return world, baseline, game, neutral


class TestGenerativeModel:
    def test_params_validation(self):
        with pytest.raises(ConfigError):
            SubjectParams(introspection_fidelity=1.5)
        with pytest.raises(ConfigError):
            SubjectParams(context_noise=-0.1)

    def test_params_from_config_ignores_unknown_keys(self):
        params = SubjectParams.from_config({'self_model_fidelity': 0.3, 'comment': 'x'})
        assert params.self_model_fidelity == 0.3

    def test_world_is_seeded(self):
        assert SyntheticWorld(seed=1).difficulty('q1') == SyntheticWorld(seed=1).difficulty('q1')
        assert SyntheticWorld(seed=1).difficulty('q1') != SyntheticWorld(seed=2).difficulty('q1')

    def test_baseline_belief(self):
        items = synthetic_items(40)
        world = SyntheticWorld(seed=3)
        top_masses = []
        for question in items.questions:
            belief = baseline_belief(SELF_MODELER, world, question)
            others = [p for label, p in belief.distribution.probs.items() if label != belief.answer]
            assert max(others) < belief.top_mass
            assert belief.distribution.top_label() == belief.answer
            assert belief.top_mass == pytest.approx(max(belief.p_correct, MIN_TOP_MASS))
            top_masses.append(belief.top_mass)
            if belief.answer != question.reference_answer:
                ranked = sorted(belief.distribution.probs, key=belief.distribution.probs.get, reverse=True)
                assert ranked[1] == question.reference_answer
        # 어려운 문항은 최상위 질량도 낮음
        assert min(top_masses) < 0.4

    def test_confidence_at_full_fidelity_is_p_correct(self):
        world = SyntheticWorld(seed=0)
        assert internal_confidence(SELF_MODELER, world, 'q7') == pytest.approx(world.p_correct(SELF_MODELER, 'q7'))

    def test_repeater_never_changes(self):
        world = SyntheticWorld(seed=0)
        for question in synthetic_items(30).questions:
            top = baseline_belief(REPEATER, world, question).answer
            for variant in SecondChanceVariant:
                assert second_chance_behavior(REPEATER, world, question, variant).answer == top

    def test_full_self_model_always_changes(self):
        params = SubjectParams(self_model_fidelity=1.0, context_noise=0.0)
        world = SyntheticWorld(seed=0)
        for question in synthetic_items(30).questions:
            top = baseline_belief(params, world, question).answer
            behavior = second_chance_behavior(params, world, question, SecondChanceVariant.INCORRECT)
            assert behavior.answer != top
            assert behavior.distribution.probs[behavior.answer] == pytest.approx(
                baseline_belief(params, world, question).top_mass)

    @pytest.mark.parametrize('percent', [2.5, 12.0, 37.5, 64.0, 90.0])
    def test_percent_bin_masses_preserve_percent(self, percent):
        masses = percent_bin_masses(percent, OBJECTIVE_SCALE.labels, OBJECTIVE_SCALE.midpoints)
        midpoints = OBJECTIVE_SCALE.midpoint_map()
        assert sum(masses.values()) == pytest.approx(1.0)
        assert sum(midpoints[label] * mass for label, mass in masses.items()) == pytest.approx(percent)

    def test_percent_outside_midpoints_clamps(self):
        assert percent_bin_masses(99.0, SELF_CONFIDENCE_SCALE.labels, SELF_CONFIDENCE_SCALE.midpoints) == {'H': 1.0}

    def test_expected_normalized_lift_equals_fidelity(self):
        items = synthetic_items(50)
        world = SyntheticWorld(seed=0)
        assert expected_normalized_lift(SELF_MODELER, world, items.questions) == pytest.approx(0.8)


class TestSubjectProvider:
    def test_unbound_question(self):
        subject = SyntheticSubject(SELF_MODELER, SyntheticWorld(seed=0))
        question = synthetic_items(1).questions[0]
        with pytest.raises(ProviderTransportError):
            subject.locate(render_question(question))

    def test_baseline_matches_direct_records(self):
        items = synthetic_items(24)
        subject, world, direct = subject_for(SELF_MODELER, items)
        records = run_baseline(subject, items, Regime.LOGPROB_TEMP1)
        assert [r.chosen_label for r in records] == [r.chosen_label for r in direct]
        assert [r.second_choice for r in records] == [r.second_choice for r in direct]
        assert accuracy(records) == accuracy(direct)

    def test_resampled_baseline_is_seeded(self):
        items = synthetic_items(6)
        subject, _, _ = subject_for(SELF_MODELER, items)
        first = run_baseline(subject, items, Regime.RESAMPLED)
        second = run_baseline(subject, items, Regime.RESAMPLED)
        assert [r.to_record() for r in first] == [r.to_record() for r in second]

    def test_elicited_percent_recovers_latent_values(self):
        items = synthetic_items(30)
        subject, world, _ = subject_for(SELF_MODELER, items)
        objective = run_elicitation(subject, items, ElicitedKind.OBJECTIVE_DIFFICULTY)
        assert len(objective) == len(items)
        for record in objective:
            share = 100.0 * world.population_share(record.question_id)
            expected = min(max(share, OBJECTIVE_SCALE.midpoints[0]), OBJECTIVE_SCALE.midpoints[-1])
            assert record.percent == pytest.approx(expected, abs=1e-6)

        confidence = run_elicitation(subject, items, ElicitedKind.SELF_CONFIDENCE)
        for record in confidence:
            latent = 100.0 * internal_confidence(SELF_MODELER, world, record.question_id)
            expected = min(max(latent, SELF_CONFIDENCE_SCALE.midpoints[0]), SELF_CONFIDENCE_SCALE.midpoints[-1])
            assert record.percent == pytest.approx(expected, abs=1e-6)

    def test_judge_reply(self):
        _, user = build_judge_prompt("Who wrote it?", "Leo Tolstoy", " leo tolstoy. ")
        assert judge_reply(user) == 'YES'
        _, user = build_judge_prompt("Who wrote it?", "Leo Tolstoy", "Anton Chekhov")
        assert judge_reply(user) == 'NO'
        assert judge_reply("no fields here") == 'INVALID'

    def test_teammate_accuracy_from_prompt(self):
        history = "\n".join([TEAMMATE_CORRECT_MARK] * 3 + [TEAMMATE_INCORRECT_MARK])
        assert teammate_accuracy_from_prompt(history) == 0.75
        assert teammate_accuracy_from_prompt("nothing") == 0.5

    def test_short_answer_records(self):
        questions = [sa_question(i) for i in range(20)]
        world = SyntheticWorld(seed=4)
        records = synth_baseline(SELF_MODELER, world, questions)
        assert [r.question_id for r in records] == sorted(q.id for q in questions)
        by_id = {q.id: q for q in questions}
        for record in records:
            assert record.option_dist is None
            assert record.is_correct == (record.response_text == by_id[record.question_id].reference_answer)

    def test_baseline_accuracy_tracks_expectation(self):
        items = synthetic_items(400)
        _, world, baseline = subject_for(SELF_MODELER, items)
        assert accuracy(baseline) == pytest.approx(expected_accuracy(SELF_MODELER, world, items.questions),
                                                   abs=0.07)


class TestDelegateRecovery:
    @pytest.mark.slow
    def test_introspection_grows_with_fidelity(self):
        items = synthetic_items(500)
        values = []
        for fidelity in (0.0, 0.5, 1.0):
            _, _, table = delegate_table(SubjectParams(introspection_fidelity=fidelity), items)
            correctness, _ = introspection_analysis(table, QUICK)
            values.append(correctness.value)
        assert values == sorted(values)
        assert values[-1] - values[0] > 0.15

    def test_entropy_signal_at_full_fidelity(self):
        _, _, table = delegate_table(SELF_MODELER, synthetic_items(300))
        correctness, entropy_result = introspection_analysis(table, QUICK)
        assert correctness.value > 0
        assert entropy_result.value > 0
        assert correctness.controls

    def test_team_beats_both_members(self):
        params = SubjectParams(skill=0.0, introspection_fidelity=1.0)
        items = synthetic_items(400)
        trials, baseline, _ = delegate_table(params, items, target=0.5)
        phase2 = {t.question_id for t in trials}
        self_accuracy = accuracy([r for r in baseline if r.question_id in phase2])
        assert team_accuracy(trials) > max(self_accuracy, 0.5) + 0.03

    def test_raising_teammate_accuracy_never_reduces_delegation(self):
        items = synthetic_items(200)
        counts = []
        for target in (0.2, 0.4, 0.6, 0.8):
            trials, _, _ = delegate_table(SELF_MODELER, items, target=target)
            counts.append(sum(1 for t in trials if t.decision == Decision.DELEGATE))
        assert counts == sorted(counts)
        assert counts[-1] > counts[0]

    def test_bias_signs(self):
        items = synthetic_items(300)
        scores = {}
        for bias in (-0.4, 0.0, 0.4):
            _, _, table = delegate_table(SubjectParams(answer_bias=bias), items, target=0.7)
            twc_result, pwc_result = bias_analysis(table, QUICK)
            scores[bias] = (twc_result.value, pwc_result.value)
        assert scores[0.4][0] > scores[0.0][0] > scores[-0.4][0]
        assert scores[0.4][0] > 0 > scores[-0.4][0]
        assert scores[0.4][1] > 0 > scores[-0.4][1]

    def test_pass_game_passes_hard_questions(self):
        items = synthetic_items(300)
        subject, world, baseline = subject_for(SELF_MODELER, items)
        trials = run_pass_game(subject, items, baseline, seed=0)
        passed = [world.p_correct(SELF_MODELER, t.question_id) for t in trials if t.decision == Decision.PASS]
        answered = [world.p_correct(SELF_MODELER, t.question_id) for t in trials if t.answered]
        assert passed and answered
        assert np.mean(passed) < np.mean(answered)
        assert max(passed) <= 0.5 < min(answered)


class TestSecondChanceRecovery:
    def test_lift_recovers_self_model_fidelity(self):
        items = synthetic_items(500)
        world, baseline, game, neutral = second_chance_trials(SELF_MODELER, items)
        summary = summarize(game, neutral, baseline)
        expected = expected_normalized_lift(SELF_MODELER, world, items.questions)
        assert summary.normalized_lift == pytest.approx(expected, abs=0.08)

        _, normalized = lift_analysis(game, neutral, QUICK)
        assert normalized.ci_low > 0.5

    def test_no_self_model_means_no_lift(self):
        params = SubjectParams(self_model_fidelity=0.0, context_noise=0.1)
        _, baseline, game, neutral = second_chance_trials(params, synthetic_items(500))
        assert abs(summarize(game, neutral, baseline).normalized_lift) < 0.06

    @pytest.mark.slow
    @pytest.mark.parametrize('params, verdict', [
        (SELF_MODELER, Verdict.SELF_MODELING_UNEXPLAINED),
        (NOISE_ADDER, Verdict.EXPLAINABLE),
        (REPEATER, Verdict.NO_LIFT),
    ])
    def test_strategy_verdicts(self, params, verdict):
        # 어려운 문항은 남은 질량이 거의 균등해서 AccIncor 검정력이 낮음
        _, baseline, game, neutral = second_chance_trials(params, synthetic_items(800))
        summary = summarize(game, neutral, baseline)
        result = strategy_tests(summary, game, neutral, baseline, StrategyTestSettings(resamples=500))
        assert result.verdict == verdict
        if params is NOISE_ADDER:
            assert result.tests['NoEntInc'] == StrategyOutcome.FAIL
            assert result.neutral_entropy_check == StrategyOutcome.PASS

    @pytest.mark.slow
    def test_lift_test_holds_size_under_null(self):
        params = SubjectParams(self_model_fidelity=0.0, context_noise=0.3)
        items = synthetic_items(60, prefix='null')
        rejections = 0
        replicates = 200
        for seed in range(replicates):
            _, _, game, neutral = second_chance_trials(params, items, seed=seed)
            _, p = lift_test(paired_changes(game, neutral), resamples=200, seed=seed)
            rejections += p < 0.05
        assert rejections / replicates <= 0.09
