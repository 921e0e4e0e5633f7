"""
기준 능력 테스트, 응답 파싱, 판정 패널, 유도 프로브 테스트
"""

import itertools
import math

import pytest

from src.baseline import (
    BaselineSettings,
    JudgePanel,
    RefusalKind,
    accuracy,
    classify_refusal,
    consensus,
    elicit_percent,
    normalize_answer,
    parse_option_label,
    parse_yes_no,
    percent_from_bins,
    run_baseline,
    run_elicitation,
    score_mc,
    score_short_answer,
)
from src.baseline.prompts import JUDGE_MARKER, OBJECTIVE_SCALE, SELF_CONFIDENCE_SCALE, build_baseline_prompt
from src.models.completion import DistributionSource
from src.models.question import QuestionSet, QuestionSource
from src.models.records import BaselineRecord, ElicitedKind, JudgeVerdict, Regime
from src.provider.scripted import ScriptedProvider, logprob_completion
from src.utils.errors import ConfigError, DegenerateDistributionError

from tests.conftest import mc_question, sa_question

SKEWED = {'A': 0.7, 'B': 0.2, 'C': 0.05, 'D': 0.05}


def _judge(name: str, reply: str, fail_times: int = 0) -> ScriptedProvider:
    return ScriptedProvider(model_id=name, family=f"family-{name}", default=reply,
                            supports_logprobs=False, fail_times=fail_times)


def _single(question) -> QuestionSet:
    source = QuestionSource.GPQA if question.is_multiple_choice else QuestionSource.SIMPLEQA
    return QuestionSet(name='one', source=source, questions=[question])


class TestParsing:
    @pytest.mark.parametrize('text, expected', [
        (' b. ', 'B'),
        ('Answer: B', 'B'),
        ('The answer is (C).', 'C'),
        ('I think D is right', 'D'),
        ('my answer is d', 'D'),
        ('As an AI, I cannot say', None),
        ('The answer is a city', None),
        ('', None),
    ])
    def test_parse_option_label(self, text, expected):
        assert parse_option_label(text) == expected

    def test_custom_label_set(self):
        assert parse_option_label('G', OBJECTIVE_SCALE.labels) == 'G'
        assert parse_option_label('H', OBJECTIVE_SCALE.labels) is None

    def test_normalize_answer(self):
        assert normalize_answer('  Leo   Tolstoy. ') == 'leo tolstoy'
        assert normalize_answer('It’s') == "it's"

    @pytest.mark.parametrize('text, expected', [
        ("I don't know", RefusalKind.REFUSAL),
        ('', RefusalKind.REFUSAL),
        ("I'm not sure, maybe Paris", RefusalKind.AMBIGUOUS),
        ('Paris', RefusalKind.NONE),
    ])
    def test_classify_refusal(self, text, expected):
        assert classify_refusal(text) == expected

    @pytest.mark.parametrize('text, expected', [
        ('YES', True), ('yes.', True), ('No, because', False), ('Maybe', None), ('', None),
    ])
    def test_parse_yes_no(self, text, expected):
        assert parse_yes_no(text) is expected


class TestScoring:
    def test_score_mc(self):
        assert score_mc('B', 'B')
        assert not score_mc('A', 'B')
        with pytest.raises(ValueError):
            score_mc('E', 'B')

    REPLIES = {'YES': True, 'NO': False, 'Perhaps': None}

    @pytest.mark.parametrize('replies', list(itertools.product(['YES', 'NO', 'Perhaps'], repeat=3)))
    def test_three_judge_truth_table(self, replies):
        panel = JudgePanel([_judge(f"j{i}", reply) for i, reply in enumerate(replies)], evaluated_family='subject')
        score = score_short_answer('Lyon', 'Paris', panel, 'Capital of France?')

        votes = [self.REPLIES[r] for r in replies]
        if votes.count(True) >= 2:
            expected = True
        elif votes.count(False) >= 2:
            expected = False
        else:
            expected = None
        assert score.is_correct is expected
        assert score.excluded is (expected is None)
        assert [v.matches for v in score.verdicts] == votes
        assert score.exclusion_reason == ('no_judge_consensus' if expected is None else None)

    def test_judge_transport_failure_counts_as_invalid(self):
        panel = JudgePanel([_judge('j0', 'YES'), _judge('j1', 'YES', fail_times=1), _judge('j2', 'NO')],
                           evaluated_family='subject')
        score = score_short_answer('Lyon', 'Paris', panel)
        assert score.excluded
        assert not score.verdicts[1].is_valid

    def test_exact_match_skips_judges(self):
        judges = [_judge(f"j{i}", 'NO') for i in range(3)]
        score = score_short_answer('paris.', 'Paris', JudgePanel(judges, 'subject'))
        assert score.is_correct and score.exact_match
        assert all(j.call_count == 0 for j in judges)

    def test_judge_prompt_carries_marker(self):
        judges = [_judge(f"j{i}", 'YES') for i in range(3)]
        score_short_answer('Lyon', 'Paris', JudgePanel(judges, 'subject'), 'Capital?')
        assert JUDGE_MARKER in judges[0].calls[0].user

    def test_panel_requires_three_outside_judges(self):
        with pytest.raises(ConfigError):
            JudgePanel([_judge('j0', 'YES'), _judge('j1', 'YES')], 'subject')
        with pytest.raises(ConfigError):
            JudgePanel([_judge('j0', 'YES'), _judge('j1', 'YES'), _judge('j2', 'YES')], 'family-j2')

    def test_non_exact_answer_without_panel(self):
        with pytest.raises(ConfigError):
            score_short_answer('Lyon', 'Paris', None)

    def test_consensus_ignores_invalid(self):
        verdicts = [JudgeVerdict('a', True), JudgeVerdict('b', None), JudgeVerdict('c', True)]
        assert consensus(verdicts) is True
        assert JudgeVerdict.from_record(JudgeVerdict('b', None).to_record()).matches is None


class TestBaselineRunner:
    def test_logprob_regime_records_distribution(self):
        model = ScriptedProvider(model_id='subject', default=logprob_completion('A', SKEWED))
        [record] = run_baseline(model, _single(mc_question(1, 'A')), Regime.LOGPROB_TEMP1)
        assert record.chosen_label == 'A'
        assert record.is_correct is True
        assert record.second_choice == 'B'
        assert record.option_dist.source == DistributionSource.LOGPROBS
        expected = -sum(p * math.log(p) for p in SKEWED.values())
        assert record.entropy == pytest.approx(expected, abs=1e-12)
        assert record.entropy == pytest.approx(0.8711, abs=1e-4)
        assert model.calls[0].temperature == 1.0
        assert model.calls[0].want_top_logprobs > 0

    def test_temp0_gives_one_hot_distribution(self):
        model = ScriptedProvider(model_id='subject', default='C', supports_logprobs=False)
        [record] = run_baseline(model, _single(mc_question(1, 'A')), Regime.TEMP0)
        assert record.chosen_label == 'C'
        assert record.is_correct is False
        assert record.entropy == 0.0
        assert record.option_dist.source == DistributionSource.DEGENERATE
        assert record.second_choice == 'A'
        assert model.calls[0].temperature == 0.0

    def test_unparseable_answer_is_reasked_strictly(self):
        model = ScriptedProvider(model_id='subject', default='Hmm, tough one', supports_logprobs=False)
        model.add_rule('Reply with exactly one letter', 'D')
        [record] = run_baseline(model, _single(mc_question(1, 'D')), Regime.TEMP0)
        assert record.chosen_label == 'D'
        assert model.call_count == 2

    def test_persistent_refusal_is_declined(self):
        model = ScriptedProvider(model_id='subject', default="I don't know", supports_logprobs=False)
        [record] = run_baseline(model, _single(mc_question(1)), Regime.TEMP0)
        assert record.declined
        assert record.is_correct is None
        assert record.exclusion_reason == 'refusal'
        assert not record.scored

    def test_resampled_regime_uses_modal_answer(self):
        replies = ['B', 'B', 'A', 'B', 'C', 'B', 'B', 'A', 'B', 'D']
        model = ScriptedProvider(model_id='subject', default=replies, supports_logprobs=False)
        [record] = run_baseline(model, _single(mc_question(1, 'B')), Regime.RESAMPLED,
                                settings=BaselineSettings(resample_n=10))
        assert record.chosen_label == 'B'
        assert record.option_dist.probs == pytest.approx({'A': 0.2, 'B': 0.6, 'C': 0.1, 'D': 0.1})
        assert record.second_choice == 'A'
        assert model.call_count == 10

    def test_logprob_regime_records_highest_probability_label(self):
        # 응답 텍스트는 B 지만 분포의 최댓값은 A
        model = ScriptedProvider(model_id='subject', default=logprob_completion('B', SKEWED))
        [record] = run_baseline(model, _single(mc_question(1, 'A')), Regime.LOGPROB_TEMP1)
        assert record.chosen_label == 'A'
        assert record.is_correct is True
        assert record.second_choice == 'B'
        assert record.response_text == 'B'

    def test_resampled_tie_keeps_second_choice_distinct(self):
        model = ScriptedProvider(model_id='subject', default=['B'] * 5 + ['A'] * 5, supports_logprobs=False)
        [record] = run_baseline(model, _single(mc_question(1, 'B')), Regime.RESAMPLED,
                                settings=BaselineSettings(resample_n=10))
        assert record.chosen_label == 'B'
        assert record.option_dist.probs == pytest.approx({'A': 0.5, 'B': 0.5, 'C': 0.0, 'D': 0.0})
        assert record.second_choice == 'A'

    @pytest.mark.parametrize('regime, default, supports_logprobs', [
        (Regime.TEMP0, 'C', False),
        (Regime.LOGPROB_TEMP1, logprob_completion('A', SKEWED), True),
        (Regime.LOGPROB_TEMP1, logprob_completion('D', SKEWED), True),
        (Regime.LOGPROB_TEMP1, logprob_completion('C', {'A': 0.4, 'B': 0.4, 'C': 0.2}), True),
        (Regime.RESAMPLED, ['B', 'A', 'B', 'A', 'C', 'C'], False),
        (Regime.RESAMPLED, ['D'] * 6, False),
    ])
    def test_second_choice_differs_from_chosen(self, regime, default, supports_logprobs):
        model = ScriptedProvider(model_id='subject', default=default, supports_logprobs=supports_logprobs)
        [record] = run_baseline(model, _single(mc_question(1, 'A')), regime,
                                settings=BaselineSettings(resample_n=6))
        assert record.option_dist.probs[record.chosen_label] == pytest.approx(record.option_dist.top_probability())
        assert record.second_choice != record.chosen_label
        if record.option_dist.nonzero_count() >= 2:
            assert record.option_dist.probs[record.second_choice] > 0

    def test_logprob_regime_requires_logprob_model(self):
        model = ScriptedProvider(model_id='subject', default='A', supports_logprobs=False)
        with pytest.raises(ValueError):
            run_baseline(model, _single(mc_question(1)), Regime.LOGPROB_TEMP1)

    def test_provider_failure_is_excluded(self):
        model = ScriptedProvider(model_id='subject', default='A', supports_logprobs=False, fail_times=10)
        [record] = run_baseline(model, _single(mc_question(1)), Regime.TEMP0)
        assert record.excluded
        assert record.exclusion_reason.startswith('provider_error')

    def test_short_answer_with_panel(self):
        questions = QuestionSet(name='sa', source=QuestionSource.SIMPLEQA,
                                questions=[sa_question(1, 'Tolstoy'), sa_question(2, 'Austen'), sa_question(3, 'Twain')])
        model = ScriptedProvider(model_id='subject', default='Leo Tolstoy', supports_logprobs=False)
        model.add_rule('number 2', 'austen')
        model.add_rule('number 3', 'I do not know')
        panel = JudgePanel([_judge(f"j{i}", 'YES') for i in range(3)], 'scripted')
        records = run_baseline(model, questions, Regime.TEMP0, panel=panel)
        by_id = {r.question_id: r for r in records}
        assert by_id['sa-001'].is_correct is True and len(by_id['sa-001'].judge_verdicts) == 3
        assert by_id['sa-002'].is_correct is True and by_id['sa-002'].judge_verdicts == []
        assert by_id['sa-003'].declined
        assert accuracy(records) == 1.0

    def test_records_sorted_by_question_id(self, mc_set):
        model = ScriptedProvider(model_id='subject', default='A', supports_logprobs=False)
        records = run_baseline(model, mc_set, Regime.TEMP0, settings=BaselineSettings(max_workers=4))
        assert [r.question_id for r in records] == sorted(mc_set.ids())
        assert accuracy(records) == pytest.approx(3 / 12)

    def test_record_round_trip(self):
        model = ScriptedProvider(model_id='subject', default=logprob_completion('A', SKEWED))
        [record] = run_baseline(model, _single(mc_question(1, 'A')), Regime.LOGPROB_TEMP1)
        assert BaselineRecord.from_record(record.to_record()) == record

    def test_strict_prompt_suffix(self):
        _, plain = build_baseline_prompt(mc_question(1))
        _, strict = build_baseline_prompt(mc_question(1), strict=True)
        assert strict.startswith(plain) and strict != plain

    def test_accuracy_requires_scored_records(self):
        with pytest.raises(ValueError):
            accuracy([])


class TestElicitation:
    def test_weighted_midpoints(self):
        percent = percent_from_bins({'A': 0.1, 'E': 0.5, 'G': 0.4}, ElicitedKind.OBJECTIVE_DIFFICULTY)
        assert percent == pytest.approx(0.1 * 2.5 + 0.5 * 50.0 + 0.4 * 90.0)

    def test_self_confidence_scale_has_eight_bins(self):
        assert len(SELF_CONFIDENCE_SCALE.labels) == 8
        assert percent_from_bins({'H': 1.0}, ElicitedKind.SELF_CONFIDENCE) == pytest.approx(95.0)

    def test_elicit_from_logprobs(self):
        model = ScriptedProvider(model_id='subject', top_logprobs=10,
                                 default=logprob_completion('F', {'F': 0.5, 'G': 0.25, 'E': 0.25}))
        result = elicit_percent(model, mc_question(1), ElicitedKind.OBJECTIVE_DIFFICULTY, run_id='r')
        assert result.percent == pytest.approx(0.5 * 70 + 0.25 * 90 + 0.25 * 50)
        assert not result.degenerate
        assert model.calls[0].want_top_logprobs >= 7

    def test_falls_back_to_text_label(self):
        model = ScriptedProvider(model_id='subject', default=logprob_completion('C', {'zzz': 1.0}))
        result = elicit_percent(model, mc_question(1), ElicitedKind.SELF_CONFIDENCE)
        assert result.degenerate
        assert result.percent == pytest.approx(15.0)

    def test_requires_logprob_model(self):
        model = ScriptedProvider(model_id='subject', default='A', supports_logprobs=False)
        with pytest.raises(ValueError):
            elicit_percent(model, mc_question(1), ElicitedKind.SELF_CONFIDENCE)

    def test_unusable_reply_is_degenerate(self):
        model = ScriptedProvider(model_id='subject', default=logprob_completion('no idea', {'zzz': 1.0}))
        with pytest.raises(DegenerateDistributionError):
            elicit_percent(model, mc_question(1), ElicitedKind.SELF_CONFIDENCE)

    def test_run_skips_failed_questions(self, mc_set):
        model = ScriptedProvider(model_id='subject', default=logprob_completion('no idea', {'zzz': 1.0}))
        model.add_rule('question number 1?', logprob_completion('B', {'B': 1.0}))
        results = run_elicitation(model, mc_set, ElicitedKind.OBJECTIVE_DIFFICULTY, max_workers=2)
        assert [r.question_id for r in results] == ['mc-001']
