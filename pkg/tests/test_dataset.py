"""
데이터셋 로드, 품질 필터, 파생, 표면 특징, 단계 분할 테스트
"""

import json

import pytest

from src.dataset.derivation import (
    build_multiple_choice,
    derive_multiple_choice,
    derive_short_answer,
    parse_distractors,
)
from src.dataset.features import DescriptorVocabulary, compute_surface_features, pct_non_alpha, surface_feature_columns
from src.dataset.loader import load_question_set, quality_filter, save_question_set
from src.dataset.splits import split_phases
from src.models.question import OPTION_LABELS, Question, QuestionFormat, QuestionSet, QuestionSource
from src.provider.scripted import ScriptedProvider
from src.utils.errors import DatasetError
from src.utils.logger import StructuredReport
from src.utils.records import read_jsonl

from tests.conftest import mc_question, sa_question, write_jsonl_lines


class TestLoader:
    def test_load_fixture(self, gpqa_fixture_path):
        question_set = load_question_set(gpqa_fixture_path, QuestionSource.GPQA)
        assert question_set.name == 'gpqa_small'
        assert question_set.ids() == ['g1', 'g2', 'g3', 'g4']
        assert question_set.by_id()['g1'].correct_option_text() == 'Photon'

    def test_format_must_match_source(self, gpqa_fixture_path):
        with pytest.raises(DatasetError):
            load_question_set(gpqa_fixture_path, QuestionSource.SIMPLEQA)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError):
            load_question_set(tmp_path / 'nope.jsonl', QuestionSource.GPQA)

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / 'bad.jsonl'
        path.write_text(json.dumps(mc_question(1).to_record()) + '\n{not json\n', encoding='utf-8')
        with pytest.raises(DatasetError) as exc_info:
            load_question_set(path, QuestionSource.GPQA)
        assert exc_info.value.line_number == 2

    def test_three_options_rejected_with_id(self, tmp_path):
        record = mc_question(1).to_record()
        record['options'] = ['a', 'b', 'c']
        path = write_jsonl_lines(tmp_path / 'three.jsonl', [record])
        with pytest.raises(DatasetError) as exc_info:
            load_question_set(path, QuestionSource.GPQA)
        assert exc_info.value.question_id == 'mc-001'

    def test_duplicate_ids_rejected(self, tmp_path):
        record = mc_question(1).to_record()
        path = write_jsonl_lines(tmp_path / 'dup.jsonl', [record, record])
        with pytest.raises(DatasetError):
            load_question_set(path, QuestionSource.GPQA)

    def test_unknown_schema_version(self, tmp_path):
        record = mc_question(1).to_record()
        record['schema_version'] = 99
        path = write_jsonl_lines(tmp_path / 'v99.jsonl', [record])
        with pytest.raises(DatasetError):
            load_question_set(path, QuestionSource.GPQA)

    def test_record_round_trip(self):
        question = mc_question(3, 'C', domain='physics')
        assert Question.from_record(question.to_record()) == question

    def test_save_and_reload(self, tmp_path, mc_set):
        digest, count = save_question_set(mc_set, tmp_path / 'saved.jsonl')
        assert count == len(mc_set)
        assert len(digest) == 64
        reloaded = load_question_set(tmp_path / 'saved.jsonl', QuestionSource.GPQA, name='gpqa')
        assert reloaded.questions == mc_set.questions


class TestQuestionSet:
    def test_empty_rejected(self):
        with pytest.raises(DatasetError):
            QuestionSet(name='x', source=QuestionSource.GPQA, questions=[])

    def test_mixed_formats_rejected(self):
        with pytest.raises(DatasetError):
            QuestionSet(name='x', source=QuestionSource.GPQA, questions=[mc_question(1), sa_question(2)])


class TestQualityFilter:
    def test_drops_duplicate_text(self, gpqa_fixture_path):
        question_set = load_question_set(gpqa_fixture_path, QuestionSource.GPQA)
        kept, dropped = quality_filter(question_set)
        assert kept.ids() == ['g1', 'g2', 'g3']
        assert dropped == [('g4', 'duplicate_text')]

    def test_drops_empty_text_and_unparseable_reference(self, simpleqa_fixture_path, tmp_path):
        question_set = load_question_set(simpleqa_fixture_path, QuestionSource.SIMPLEQA)
        report = StructuredReport(tmp_path / 'ingest.jsonl', 'ingest')
        try:
            kept, dropped = quality_filter(question_set, report)
        finally:
            report.close()
        assert kept.ids() == ['s1', 's2', 's3']
        assert dict(dropped) == {'s4': 'empty_text', 's5': 'unparseable_reference'}
        events = read_jsonl(tmp_path / 'ingest.jsonl')
        assert [e['message'] for e in events] == ['dropped', 'dropped', 'summary']
        assert events[-1]['kept'] == 3


class TestDerivation:
    def test_short_answer_projection(self, gpqa_fixture_path):
        question_set = load_question_set(gpqa_fixture_path, QuestionSource.GPQA)
        derived = derive_short_answer(question_set)
        assert derived.source == QuestionSource.GPSA
        assert derived.format == QuestionFormat.SHORT_ANSWER
        assert derived.by_id()['g2'].reference_answer == 'Mitochondrion'
        assert derived.by_id()['g2'].options is None

    def test_short_answer_requires_multiple_choice(self, sa_set):
        with pytest.raises(DatasetError):
            derive_short_answer(sa_set)

    def test_parse_distractors_strips_bullets(self):
        assert parse_distractors("1. Paris\n- London\n\n(c) Rome\n") == ['Paris', 'London', 'Rome']

    def test_build_multiple_choice_is_seeded(self):
        question = sa_question(1, 'Tolstoy')
        first = build_multiple_choice(question, ['Dickens', 'Austen', 'Twain'], seed=7)
        second = build_multiple_choice(question, ['Dickens', 'Austen', 'Twain'], seed=7)
        assert first == second
        assert first.correct_option_text() == 'Tolstoy'
        assert first.reference_answer in OPTION_LABELS

    def test_derive_multiple_choice(self, sa_set, tmp_path):
        generator = ScriptedProvider(model_id='generator', default="Someone Else\nAnother Person\nThird Writer")
        report_path = tmp_path / 'derivation.jsonl'
        derived = derive_multiple_choice(sa_set, generator, seed=3, report_path=report_path, max_workers=2)
        assert derived.source == QuestionSource.SIMPLEMC
        assert derived.ids() == sa_set.ids()
        for original, question in zip(sa_set, derived):
            assert question.correct_option_text() == original.reference_answer
        events = read_jsonl(report_path)
        assert events[-1]['message'] == 'summary'
        assert events[-1]['derived'] == len(sa_set)

    def test_distractor_equal_to_reference_is_dropped(self, tmp_path):
        question_set = QuestionSet(name='simpleqa', source=QuestionSource.SIMPLEQA,
                                   questions=[sa_question(1, 'Tolstoy'), sa_question(2, 'Austen')])
        generator = ScriptedProvider(model_id='generator', default="Tolstoy\nDickens\nTwain")
        derived = derive_multiple_choice(question_set, generator, seed=1, report_path=tmp_path / 'r.jsonl')
        assert derived.ids() == ['sa-002']
        dropped = [e for e in read_jsonl(tmp_path / 'r.jsonl') if e['message'] == 'dropped']
        assert dropped[0]['reason'] == 'distractor_equals_reference'
        assert dropped[0]['attempts'] == 1

    def test_generator_failures_are_retried(self):
        question_set = QuestionSet(name='simpleqa', source=QuestionSource.SIMPLEQA, questions=[sa_question(1)])
        generator = ScriptedProvider(model_id='generator', default="A\nB\nC", fail_times=2)
        derived = derive_multiple_choice(question_set, generator, seed=1, max_retries=2, max_workers=1)
        assert len(derived) == 1
        assert generator.call_count == 3

    def test_all_dropped_raises(self):
        question_set = QuestionSet(name='simpleqa', source=QuestionSource.SIMPLEQA, questions=[sa_question(1)])
        generator = ScriptedProvider(model_id='generator', default="only one")
        with pytest.raises(DatasetError):
            derive_multiple_choice(question_set, generator, seed=1, max_workers=1)


class TestSurfaceFeatures:
    def test_pct_non_alpha(self):
        assert pct_non_alpha("abc!") == pytest.approx(0.25)
        assert pct_non_alpha("") == 0.0

    def test_features_and_indicators(self, mc_set):
        vocabulary = DescriptorVocabulary.from_questions(mc_set)
        assert vocabulary.reference_category('domain') == 'biology'
        assert vocabulary.indicator_names() == ['domain=physics']
        features = compute_surface_features(mc_set.questions[1], vocabulary)
        assert features.question_length == len(mc_set.questions[1].text)
        assert features.descriptor_indicators == (1,)

    def test_unknown_descriptor_value_is_all_zero(self, mc_set):
        vocabulary = DescriptorVocabulary.from_questions(mc_set)
        assert vocabulary.indicators({'domain': 'astronomy'}) == (0,)

    def test_columns_follow_question_order(self, mc_set):
        vocabulary = DescriptorVocabulary.from_questions(mc_set)
        columns = surface_feature_columns(mc_set.questions, vocabulary)
        assert list(columns) == ['question_length', 'pct_non_alpha', 'domain=physics']
        assert columns['domain=physics'][:4] == [0.0, 1.0, 0.0, 1.0]


class TestSplitPhases:
    def test_disjoint_and_order_preserving(self, mc_set):
        phase1, phase2 = split_phases(mc_set, 5, seed=42)
        assert len(phase1) == 5
        assert len(phase2) == len(mc_set) - 5
        assert not {q.id for q in phase1} & {q.id for q in phase2}
        order = mc_set.ids()
        assert [q.id for q in phase1] == sorted((q.id for q in phase1), key=order.index)

    def test_seeded(self, mc_set):
        assert split_phases(mc_set, 4, seed=1) == split_phases(mc_set, 4, seed=1)

    def test_bounds(self, mc_set):
        with pytest.raises(ValueError):
            split_phases(mc_set, len(mc_set), seed=1)
        with pytest.raises(ValueError):
            split_phases(mc_set, -1, seed=1)
        phase1, phase2 = split_phases(mc_set, 0, seed=1)
        assert phase1 == [] and len(phase2) == len(mc_set)
