"""
위임 게임, 패스 게임, 두 번째 기회 게임과 대안 전략 검정
"""

import pytest

from src.games import (
    AnswerOrAvoidGame,
    GameSettings,
    SecondChanceSettings,
    StrategyTestSettings,
    change_rate,
    normalized_lift,
    parse_decision,
    pass_score,
    run_delegate_game,
    run_pass_game,
    run_second_chance,
    simulate_teammate,
    strategy_tests,
    summarize,
    team_accuracy,
    team_accuracy_gain,
)
from src.games.prompts import (
    DELEGATE_CHOICE_MARKER,
    PASS_CHOICE_MARKER,
    PHASE2_HEADER,
    REDO_INCORRECT_SENTENCE,
    REDO_NEUTRAL_SENTENCE,
    STRICT_RETRY_LINE,
    TEAMMATE_CORRECT_MARK,
)
from src.games.second_chance import lift_test, paired_changes
from src.models.completion import DistributionSource, OptionDistribution
from src.models.question import OPTION_LABELS
from src.models.records import (
    BaselineRecord,
    Decision,
    DelegateTrial,
    GameKind,
    Regime,
    SecondChanceTrial,
    SecondChanceVariant,
    StrategyClassification,
    StrategyOutcome,
    TeammateProfile,
    Verdict,
)
from src.provider.scripted import ScriptedProvider, logprob_completion
from src.stats.descriptive import entropy
from src.utils.errors import UndefinedStatisticError

MODEL = 'subject-1'
BASELINE_PROBS = {'A': 0.7, 'B': 0.2, 'C': 0.05, 'D': 0.05}
SWITCHED_PROBS = {'A': 0.1, 'B': 0.6, 'C': 0.2, 'D': 0.1}


def _temp0_baseline(question_set, answer_for=lambda q: 'A', declined=()):
    records = []
    for question in question_set.questions:
        if question.id in declined:
            records.append(BaselineRecord(question_id=question.id, model_id=MODEL, regime=Regime.TEMP0,
                                          response_text="I don't know", declined=True))
            continue
        answer = answer_for(question)
        records.append(BaselineRecord(question_id=question.id, model_id=MODEL, regime=Regime.TEMP0,
                                      response_text=answer, chosen_label=answer,
                                      is_correct=answer == question.reference_answer))
    return records


def _logprob_baseline(question_set, declined=()):
    """모든 문항에서 A 를 고르고 B 가 두 번째인 기준 분포"""
    dist = OptionDistribution(dict(BASELINE_PROBS), DistributionSource.LOGPROBS)
    records = []
    for question in question_set.questions:
        if question.id in declined:
            records.append(BaselineRecord(question_id=question.id, model_id=MODEL, regime=Regime.LOGPROB_TEMP1,
                                          response_text="I don't know", declined=True))
            continue
        records.append(BaselineRecord(
            question_id=question.id, model_id=MODEL, regime=Regime.LOGPROB_TEMP1, response_text='A',
            chosen_label='A', option_dist=dist, entropy=entropy(dist), second_choice='B',
            is_correct=question.reference_answer == 'A',
        ))
    return records


def _phase2_question(question_set, request):
    """프롬프트의 2단계 블록에 있는 문항"""
    block = request.user.split(PHASE2_HEADER)[-1]
    return next(q for q in question_set.questions if q.text in block)


def _oracle(question_set, wrong=False):
    def reply(request):
        reference = _phase2_question(question_set, request).reference_answer
        if not wrong:
            return reference
        return OPTION_LABELS[(OPTION_LABELS.index(reference) + 1) % len(OPTION_LABELS)]
    return reply


def _model(**kwargs) -> ScriptedProvider:
    kwargs.setdefault('supports_logprobs', False)
    return ScriptedProvider(model_id=MODEL, **kwargs)


def _trial(i, decision=Decision.ANSWER, is_correct=True, changed=False, excluded=False):
    return DelegateTrial(
        question_id=f"q{i:02d}", model_id=MODEL, game=GameKind.DELEGATE, baseline_ref=f"{MODEL}/q{i:02d}",
        decision=None if excluded else decision,
        answer='A' if decision == Decision.ANSWER and not excluded else None,
        changed_from_baseline=changed if decision == Decision.ANSWER and not excluded else None,
        is_correct=None if excluded else is_correct, excluded=excluded,
    )


class TestParseDecision:
    @pytest.mark.parametrize('reply, short_answer, token, expected', [
        (' t', False, 'T', (Decision.DELEGATE, None)),
        ('Answer: B', False, 'T', (Decision.ANSWER, 'B')),
        ('P', False, 'P', (Decision.PASS, None)),
        ('T', True, 'T', (Decision.DELEGATE, None)),
        ('Leo Tolstoy', True, 'T', (Decision.ANSWER, 'Leo Tolstoy')),
    ])
    def test_decisions(self, reply, short_answer, token, expected):
        parsed = parse_decision(reply, short_answer, token)
        assert (parsed.decision, parsed.answer) == expected

    @pytest.mark.parametrize('reply, token', [
        ('', 'T'),
        ('no clue', 'T'),
        ('T', 'P'),
    ])
    def test_unreadable(self, reply, token):
        assert parse_decision(reply, False, token) is None


class TestTeammate:
    def test_exact_correct_count(self, mc_set):
        marks = simulate_teammate(mc_set.questions[:10], TeammateProfile(0.6, seed=3))
        assert [qid for qid, _ in marks] == [q.id for q in mc_set.questions[:10]]
        assert sum(correct for _, correct in marks) == 6

    def test_seeded(self, mc_set):
        profile = TeammateProfile(0.5, seed=11)
        assert simulate_teammate(mc_set.questions, profile) == simulate_teammate(mc_set.questions, profile)

    def test_half_rounds_up(self):
        assert TeammateProfile(0.5, seed=0).correct_count(5) == 3
        assert TeammateProfile(0.0, seed=0).correct_count(7) == 0

    def test_invalid_target(self):
        with pytest.raises(ValueError):
            TeammateProfile(1.5, seed=0)

    def test_requires_phase1(self):
        with pytest.raises(ValueError):
            simulate_teammate([], TeammateProfile(0.5, seed=0))


class TestDelegateGame:
    def test_always_delegate_with_perfect_teammate(self, mc_set):
        model = _model(default='T')
        trials = run_delegate_game(model, mc_set, _temp0_baseline(mc_set), TeammateProfile(1.0, seed=1),
                                   seed=7, settings=GameSettings(phase1_size=4, max_workers=2))

        assert len(trials) == 8
        assert [t.question_id for t in trials] == sorted(t.question_id for t in trials)
        assert all(t.decision == Decision.DELEGATE and t.points == 1 for t in trials)
        assert team_accuracy(trials) == 1.0
        assert all(t.teammate_accuracy == 1.0 for t in trials)

    def test_prompt_shows_history_and_delegate_option(self, mc_set):
        model = _model(default='T')
        run_delegate_game(model, mc_set, _temp0_baseline(mc_set), TeammateProfile(1.0, seed=1),
                          seed=7, settings=GameSettings(phase1_size=4, max_workers=1))
        request = model.calls[0]
        history, phase2 = request.user.split(PHASE2_HEADER)
        assert history.count(TEAMMATE_CORRECT_MARK) == 4
        assert DELEGATE_CHOICE_MARKER in phase2
        question = _phase2_question(mc_set, request)
        assert question.text not in history
        assert request.temperature == 0.0

    def test_answers_scored_against_reference(self, mc_set):
        model = _model(default=_oracle(mc_set))
        trials = run_delegate_game(model, mc_set, _temp0_baseline(mc_set), TeammateProfile(0.5, seed=1),
                                   seed=7, settings=GameSettings(phase1_size=4))
        assert all(t.answered and t.is_correct and t.points == 1 for t in trials)

    def test_missing_profile(self):
        with pytest.raises(ValueError):
            AnswerOrAvoidGame(_model(default='T'), GameKind.DELEGATE, seed=0)

    def test_missing_baseline_record(self, mc_set):
        baseline = _temp0_baseline(mc_set)[:3]
        with pytest.raises(ValueError):
            run_delegate_game(_model(default='T'), mc_set, baseline, TeammateProfile(0.5, seed=0),
                              seed=0, settings=GameSettings(phase1_size=2))

    def test_phase1_must_leave_questions(self, mc_set):
        with pytest.raises(ValueError):
            run_delegate_game(_model(default='T'), mc_set, _temp0_baseline(mc_set), TeammateProfile(0.5, seed=0),
                              seed=0, settings=GameSettings(phase1_size=len(mc_set)))


class TestPassGame:
    def test_all_pass_scores_zero(self, mc_set):
        model = _model(default='P')
        trials = run_pass_game(model, mc_set, _temp0_baseline(mc_set), seed=0)
        assert len(trials) == len(mc_set)
        assert all(t.decision == Decision.PASS and t.points == 0 for t in trials)
        assert pass_score(trials) == 0
        assert PASS_CHOICE_MARKER in model.calls[0].user
        assert TEAMMATE_CORRECT_MARK not in model.calls[0].user

    def test_correct_answers_score_one_each(self, mc_set):
        trials = run_pass_game(_model(default=_oracle(mc_set)), mc_set, _temp0_baseline(mc_set), seed=0)
        assert pass_score(trials) == len(mc_set)

    def test_wrong_answers_lose_points(self, mc_set):
        trials = run_pass_game(_model(default=_oracle(mc_set, wrong=True)), mc_set,
                               _temp0_baseline(mc_set), seed=0)
        assert pass_score(trials) == -len(mc_set)
        assert all(t.points == -1 for t in trials)

    def test_change_from_baseline(self, mc_set):
        # 기준은 모두 A, 게임에서는 정답 라벨 (A 는 12문항 중 3개)
        baseline = _temp0_baseline(mc_set)
        trials = run_pass_game(_model(default=_oracle(mc_set)), mc_set, baseline, seed=0)
        assert sum(t.changed_from_baseline for t in trials) == 9
        assert change_rate(trials, baseline) == pytest.approx(0.75)

    def test_unparseable_twice_is_excluded(self, mc_set):
        model = _model(default='no clue')
        trials = run_pass_game(model, mc_set, _temp0_baseline(mc_set), seed=0)
        assert all(t.excluded and t.exclusion_reason == 'unparseable' for t in trials)
        assert model.call_count == 2 * len(mc_set)
        assert sum(STRICT_RETRY_LINE in call.user for call in model.calls) == len(mc_set)
        with pytest.raises(UndefinedStatisticError):
            team_accuracy(trials)

    def test_retry_recovers(self, mc_set):
        model = _model(default=lambda request: 'B' if STRICT_RETRY_LINE in request.user else 'no clue')
        trials = run_pass_game(model, mc_set, _temp0_baseline(mc_set), seed=0)
        assert all(t.answered and t.answer == 'B' for t in trials)

    def test_provider_failure_excludes_trial(self, mc_set):
        model = _model(default=None)
        trials = run_pass_game(model, mc_set, _temp0_baseline(mc_set), seed=0)
        assert all(t.excluded and t.exclusion_reason.startswith('provider_error') for t in trials)

    def test_short_answer_exact_match(self, sa_set):
        def reply(request):
            return _phase2_question(sa_set, request).reference_answer.lower()

        baseline = [BaselineRecord(question_id=q.id, model_id=MODEL, regime=Regime.TEMP0,
                                   response_text=q.reference_answer, is_correct=True) for q in sa_set.questions]
        trials = run_pass_game(_model(default=reply), sa_set, baseline, seed=0)
        assert all(t.is_correct and t.points == 1 for t in trials)
        assert not any(t.changed_from_baseline for t in trials)


class TestTeamMetrics:
    def test_team_accuracy_gain(self):
        trials = [_trial(i, is_correct=i < 6) for i in range(10)]
        assert team_accuracy(trials) == pytest.approx(0.6)
        assert team_accuracy_gain(trials, self_accuracy=0.5, teammate_accuracy=0.4) == pytest.approx(0.1)
        assert team_accuracy_gain(trials, self_accuracy=0.5, teammate_accuracy=0.7) == pytest.approx(-0.1)

    def test_excluded_trials_do_not_count(self):
        trials = [_trial(0), _trial(1, is_correct=False), _trial(2, excluded=True)]
        assert team_accuracy(trials) == pytest.approx(0.5)

    def test_change_rate(self):
        trials = [_trial(i, changed=i < 3) for i in range(10)]
        trials.append(_trial(10, decision=Decision.DELEGATE))
        baseline = [BaselineRecord(question_id=f"q{i:02d}", model_id=MODEL, regime=Regime.TEMP0,
                                   response_text='A', chosen_label='A', is_correct=True) for i in range(11)]
        assert change_rate(trials, baseline) == pytest.approx(0.3)

    def test_change_rate_needs_answers(self):
        trials = [_trial(0, decision=Decision.DELEGATE)]
        with pytest.raises(UndefinedStatisticError):
            change_rate(trials, [])

    def test_trial_record_round_trip(self):
        trial = _trial(4, changed=True)
        trial.points = 1
        trial.teammate_accuracy = 0.5
        assert DelegateTrial.from_record(trial.to_record()) == trial


def _redo_model():
    """Incorrect 변형에서는 B 로 바꾸고 Neutral 변형에서는 A 를 유지하는 모델"""
    def reply(request):
        if REDO_INCORRECT_SENTENCE in request.user:
            return logprob_completion('B', SWITCHED_PROBS)
        return logprob_completion('A', BASELINE_PROBS)
    return ScriptedProvider(model_id=MODEL, default=reply, supports_logprobs=True)


def _play_both(question_set, baseline, model=None):
    model = model or _redo_model()
    game = run_second_chance(model, question_set, baseline, SecondChanceVariant.INCORRECT)
    neutral = run_second_chance(model, question_set, baseline, SecondChanceVariant.NEUTRAL)
    return model, game, neutral


class TestSecondChance:
    def test_normalized_lift(self):
        assert normalized_lift(0.6, 0.2) == pytest.approx(0.5)
        assert normalized_lift(0.2, 0.2) == 0.0
        with pytest.raises(UndefinedStatisticError):
            normalized_lift(1.0, 1.0)

    def test_variants_use_their_sentences(self, mc_set):
        model, game, neutral = _play_both(mc_set, _logprob_baseline(mc_set))
        incorrect_calls = [c for c in model.calls if REDO_INCORRECT_SENTENCE in c.user]
        neutral_calls = [c for c in model.calls if REDO_NEUTRAL_SENTENCE in c.user]
        assert len(incorrect_calls) == len(neutral_calls) == len(mc_set)
        assert all(c.temperature == 1.0 and c.want_top_logprobs == 5 for c in model.calls)

    def test_game_answer_follows_argmax_under_logprobs(self, mc_set):
        # 텍스트는 A 지만 최고 확률은 B
        model = ScriptedProvider(model_id=MODEL, default=logprob_completion('A', SWITCHED_PROBS),
                                 supports_logprobs=True)
        game = run_second_chance(model, mc_set, _logprob_baseline(mc_set), SecondChanceVariant.INCORRECT)
        assert all(t.game_answer == 'B' and t.changed for t in game)
        reference = {q.id: q.reference_answer for q in mc_set.questions}
        assert all(t.game_correct == (reference[t.question_id] == 'B') for t in game)

        game = run_second_chance(model, mc_set, _temp0_baseline(mc_set), SecondChanceVariant.INCORRECT)
        assert all(t.game_answer == 'A' and not t.changed for t in game)

    def test_trials_record_change_and_distribution(self, mc_set):
        _, game, neutral = _play_both(mc_set, _logprob_baseline(mc_set))
        assert all(t.changed and t.game_answer == 'B' for t in game)
        assert not any(t.changed for t in neutral)
        assert game[0].game_option_dist.probs['B'] == pytest.approx(0.6)
        assert [t.question_id for t in game] == sorted(q.id for q in mc_set.questions)

    def test_skips_questions_without_baseline_answer(self, mc_set):
        baseline = _logprob_baseline(mc_set, declined={'mc-003'})
        _, game, _ = _play_both(mc_set, baseline)
        assert len(game) == len(mc_set) - 1
        assert 'mc-003' not in {t.question_id for t in game}

    def test_fixed_temperature_setting(self, mc_set):
        model = _redo_model()
        run_second_chance(model, mc_set, _logprob_baseline(mc_set), SecondChanceVariant.NEUTRAL,
                          settings=SecondChanceSettings(temperature=0.0))
        assert all(c.temperature == 0.0 for c in model.calls)

    def test_summary(self, mc_set):
        baseline = _logprob_baseline(mc_set)
        _, game, neutral = _play_both(mc_set, baseline)
        summary = summarize(game, neutral, baseline)

        assert summary.change_rate_game == 1.0
        assert summary.change_rate_neutral == 0.0
        assert summary.lift == 1.0
        assert summary.normalized_lift == 1.0
        # 기준 오답 9문항 중 정답이 B 인 문항은 3개
        assert summary.n_incorrect_baseline == 9
        assert summary.acc_on_incorrect == pytest.approx(3 / 9)
        assert summary.second_choice_rate == 1.0
        expected = entropy(OptionDistribution(SWITCHED_PROBS, DistributionSource.LOGPROBS)) \
            - entropy(OptionDistribution(BASELINE_PROBS, DistributionSource.LOGPROBS))
        assert summary.entropy_diff_game == pytest.approx(expected, abs=1e-9)
        assert summary.entropy_diff_neutral == pytest.approx(0.0, abs=1e-9)

    def test_paired_changes_and_lift_test(self, mc_set):
        baseline = _logprob_baseline(mc_set)
        _, game, neutral = _play_both(mc_set, baseline)
        pairs = paired_changes(game, neutral)
        assert pairs.shape == (len(mc_set), 2)
        lift, p = lift_test(pairs, resamples=200, seed=1)
        assert lift == 1.0
        assert p == 0.0

    def test_small_cells_are_not_applicable(self, mc_set):
        baseline = _logprob_baseline(mc_set)
        _, game, neutral = _play_both(mc_set, baseline)
        result = strategy_tests(summarize(game, neutral, baseline), game, neutral, baseline)
        assert all(outcome == StrategyOutcome.NOT_APPLICABLE for outcome in result.tests.values())
        assert result.verdict is None
        assert result.to_record()['verdict'] is None
        assert 'Lift' in result.diagnostics

    def test_strategy_tests_explainable(self, mc_set):
        baseline = _logprob_baseline(mc_set)
        _, game, neutral = _play_both(mc_set, baseline)
        settings = StrategyTestSettings(min_cell=5, resamples=200)
        result = strategy_tests(summarize(game, neutral, baseline), game, neutral, baseline, settings)

        assert result.tests['Lift'] == StrategyOutcome.PASS
        # 3/9 은 우연 수준 1/3 과 같음
        assert result.tests['AccIncor'] == StrategyOutcome.FAIL
        assert result.tests['SecChoice'] == StrategyOutcome.PASS
        # 모든 문항에서 엔트로피가 같은 양만큼 증가
        assert result.tests['NoEntInc'] == StrategyOutcome.FAIL
        assert result.verdict == Verdict.EXPLAINABLE
        assert result.p_values['SecChoice'] == pytest.approx((1 / 3) ** 12)

    def test_no_lift_skips_other_tests(self, mc_set):
        baseline = _logprob_baseline(mc_set)
        model = ScriptedProvider(model_id=MODEL, default=logprob_completion('A', BASELINE_PROBS))
        _, game, neutral = _play_both(mc_set, baseline, model)
        settings = StrategyTestSettings(min_cell=5, resamples=200)
        result = strategy_tests(summarize(game, neutral, baseline), game, neutral, baseline, settings)

        assert result.tests['Lift'] == StrategyOutcome.FAIL
        assert all(result.tests[name] == StrategyOutcome.NOT_APPLICABLE
                   for name in ('AccIncor', 'SecChoice', 'NoEntInc'))
        assert result.verdict == Verdict.NO_LIFT

    def test_summary_needs_trials(self):
        with pytest.raises(UndefinedStatisticError):
            summarize([], [], [])

    def test_trial_record_round_trip(self, mc_set):
        _, game, _ = _play_both(mc_set, _logprob_baseline(mc_set))
        assert SecondChanceTrial.from_record(game[0].to_record()) == game[0]


class TestClassify:
    P, F, NA = StrategyOutcome.PASS, StrategyOutcome.FAIL, StrategyOutcome.NOT_APPLICABLE

    @pytest.mark.parametrize('outcomes, verdict', [
        ((P, P, P, P), Verdict.SELF_MODELING_UNEXPLAINED),
        ((P, P, F, P), Verdict.EXPLAINABLE),
        ((P, NA, P, P), Verdict.EXPLAINABLE),
        ((F, NA, NA, NA), Verdict.NO_LIFT),
        ((NA, NA, NA, NA), None),
        ((NA, P, P, P), None),
    ])
    def test_classify(self, outcomes, verdict):
        tests = dict(zip(('Lift', 'AccIncor', 'SecChoice', 'NoEntInc'), outcomes))
        assert StrategyClassification.classify(tests) == verdict
