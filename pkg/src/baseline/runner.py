"""
기준 능력 테스트 실행기
모델별 샘플링 방식으로 문항에 답하게 하고, 채점과 선택지 분포/엔트로피를 기록합니다.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.baseline.parsing import (
    DEFAULT_AMBIGUOUS_PATTERNS,
    DEFAULT_REFUSAL_PATTERNS,
    RefusalKind,
    classify_refusal,
    parse_option_label,
)
from src.baseline.prompts import build_baseline_prompt
from src.baseline.scoring import JudgePanel, score_mc, score_short_answer
from src.models.completion import Completion, DistributionSource, OptionDistribution
from src.models.question import OPTION_LABELS, Question, QuestionFormat, QuestionSet
from src.models.records import BaselineRecord, Regime
from src.provider.base import Provider
from src.provider.distributions import (
    RESAMPLE_TEMPERATURE,
    option_distribution_from_logprobs,
    resample_answers,
)
from src.stats.descriptive import entropy
from src.utils.errors import DegenerateDistributionError, ProviderError
from src.utils.logger import get_logger

DEFAULT_TOP_LOGPROBS = 5


@dataclass
class BaselineSettings:
    """기준 테스트 실행 설정"""
    resample_n: int = 10
    max_output: int = 16
    short_answer_max_output: int = 64
    max_workers: int = 8
    refusal_patterns: Sequence[str] = DEFAULT_REFUSAL_PATTERNS
    ambiguous_patterns: Sequence[str] = DEFAULT_AMBIGUOUS_PATTERNS
    dataset: str = ""
    run_id: str = ""

    @classmethod
    def from_config(cls, config: dict, dataset: str = "", run_id: str = "") -> 'BaselineSettings':
        baseline = config.get('baseline', {})
        return cls(
            resample_n=int(baseline.get('resample_n', 10)),
            max_output=int(baseline.get('max_output', 16)),
            short_answer_max_output=int(baseline.get('short_answer_max_output', 64)),
            max_workers=int(config.get('run', {}).get('max_concurrent', 8)),
            refusal_patterns=tuple(baseline.get('refusal_patterns', DEFAULT_REFUSAL_PATTERNS)),
            ambiguous_patterns=tuple(baseline.get('ambiguous_refusal_patterns', DEFAULT_AMBIGUOUS_PATTERNS)),
            dataset=dataset,
            run_id=run_id,
        )


def check_regime(model: Provider, regime: Regime) -> None:
    """LogprobTemp1 은 log-probability 를 돌려주는 모델에서만 쓸 수 있습니다."""
    if regime == Regime.LOGPROB_TEMP1 and not model.supports_logprobs:
        raise ValueError(f"{model.name}은 log-probability를 지원하지 않아 {regime.value} 방식을 쓸 수 없습니다.")


def runner_up(dist: OptionDistribution, chosen: Optional[str]) -> str:
    """선택 라벨을 뺀 최상위 라벨 (동률이면 앞 라벨 우선)"""
    return next(label for label in dist.ranked() if label != chosen)


def with_distribution(record: BaselineRecord, dist: OptionDistribution) -> BaselineRecord:
    """분포에서 엔트로피와 두 번째 선택을 채웁니다. 두 번째 선택은 선택 라벨과 다릅니다."""
    record.option_dist = dist
    record.entropy = entropy(dist)
    record.second_choice = runner_up(dist, record.chosen_label)
    return record


class BaselineRunner:
    """한 모델의 기준 테스트 실행기"""

    def __init__(self, model: Provider, regime: Regime, panel: Optional[JudgePanel] = None,
                 settings: Optional[BaselineSettings] = None):
        check_regime(model, regime)
        self.model = model
        self.regime = regime
        self.panel = panel
        self.settings = settings or BaselineSettings()
        self.logger = get_logger(__name__)

    def _new_record(self, question: Question, text: str = "") -> BaselineRecord:
        return BaselineRecord(
            question_id=question.id,
            model_id=self.model.model_id,
            regime=self.regime,
            response_text=text,
            dataset=self.settings.dataset,
            run_id=self.settings.run_id,
        )

    def _declined(self, question: Question, text: str, reason: str) -> BaselineRecord:
        record = self._new_record(question, text)
        record.declined = True
        record.exclusion_reason = reason
        return record

    # 객관식

    def _ask_mc(self, question: Question, strict: bool, temperature: float, logprobs: bool) -> Completion:
        system, user = build_baseline_prompt(question, strict=strict)
        want = (self.model.top_logprobs or DEFAULT_TOP_LOGPROBS) if logprobs else 0
        request = self.model.request(system, user, temperature=temperature,
                                     max_output=self.settings.max_output, want_top_logprobs=want)
        return self.model.complete(request)

    def _single_answer_mc(self, question: Question, temperature: float, logprobs: bool) -> BaselineRecord:
        completion = self._ask_mc(question, False, temperature, logprobs)
        label = parse_option_label(completion.text)
        if label is None:
            self.logger.debug(f"{question.id}: 라벨 파싱 실패, 엄격한 형식으로 재질문")
            completion = self._ask_mc(question, True, temperature, logprobs)
            label = parse_option_label(completion.text)
        if label is None:
            kind = classify_refusal(completion.text, self.settings.refusal_patterns, self.settings.ambiguous_patterns)
            reason = "refusal" if kind == RefusalKind.REFUSAL else "unparseable"
            return self._declined(question, completion.text, reason)

        record = self._new_record(question, completion.text)
        dist = None
        if logprobs:
            try:
                dist = option_distribution_from_logprobs(completion)
            except DegenerateDistributionError as e:
                self.logger.warning(f"{question.id}: log-probability 분포를 만들 수 없어 원핫 분포 사용 ({e})")
        if dist is None:
            dist = OptionDistribution.one_hot(label, OPTION_LABELS, DistributionSource.DEGENERATE)
        elif dist.top_label() != label:
            # 응답은 최고 확률 라벨로 기록
            self.logger.debug(f"{question.id}: 응답 텍스트 {label} 대신 최고 확률 라벨 {dist.top_label()} 기록")
            label = dist.top_label()
        record.chosen_label = label
        return with_distribution(record, dist)

    def _resampled_mc(self, question: Question) -> BaselineRecord:
        system, user = build_baseline_prompt(question)
        request = self.model.request(system, user, temperature=RESAMPLE_TEMPERATURE,
                                     max_output=self.settings.max_output)
        samples = resample_answers(self.model, request, self.settings.resample_n, parse_option_label)
        if not samples.valid:
            system, user = build_baseline_prompt(question, strict=True)
            samples = resample_answers(self.model, request.with_user(user), self.settings.resample_n,
                                       parse_option_label)
        label = samples.modal_label()
        if label is None:
            return self._declined(question, samples.texts[0] if samples.texts else "", "unparseable")

        text = next(t for t, l in zip(samples.texts, samples.labels) if l == label)
        record = self._new_record(question, text)
        record.chosen_label = label
        return with_distribution(record, samples.distribution())

    def _run_mc(self, question: Question) -> BaselineRecord:
        if self.regime == Regime.TEMP0:
            record = self._single_answer_mc(question, 0.0, logprobs=False)
        elif self.regime == Regime.LOGPROB_TEMP1:
            record = self._single_answer_mc(question, RESAMPLE_TEMPERATURE, logprobs=True)
        else:
            record = self._resampled_mc(question)
        if record.chosen_label is not None:
            record.is_correct = score_mc(record.chosen_label, question.reference_answer)
        return record

    # 단답형

    def _run_short_answer(self, question: Question) -> BaselineRecord:
        system, user = build_baseline_prompt(question)
        completion = self.model.complete(self.model.request(
            system, user, temperature=0.0, max_output=self.settings.short_answer_max_output))
        text = completion.text.strip()
        if classify_refusal(text, self.settings.refusal_patterns,
                            self.settings.ambiguous_patterns) == RefusalKind.REFUSAL:
            return self._declined(question, text, "refusal")

        record = self._new_record(question, text)
        score = score_short_answer(text, question.reference_answer, self.panel, question.text)
        record.judge_verdicts = score.verdicts
        if score.excluded:
            record.excluded = True
            record.exclusion_reason = score.exclusion_reason
        else:
            record.is_correct = score.is_correct
        return record

    def run_question(self, question: Question) -> BaselineRecord:
        """문항 하나 (전송 실패는 제외 레코드로 기록)"""
        try:
            if question.is_multiple_choice:
                record = self._run_mc(question)
            else:
                record = self._run_short_answer(question)
        except ProviderError as e:
            self.logger.error(f"{self.model.name}/{question.id}: 프로바이더 오류로 제외 - {e}")
            record = self._new_record(question)
            record.excluded = True
            record.exclusion_reason = f"provider_error: {e}"
        record.validate()
        return record

    def run(self, question_set: QuestionSet) -> List[BaselineRecord]:
        if question_set.format == QuestionFormat.SHORT_ANSWER and self.panel is None:
            self.logger.warning("단답형 집합에 판정 패널이 없습니다: 정확 일치가 아닌 응답은 오류가 됩니다.")
        with ThreadPoolExecutor(max_workers=max(1, self.settings.max_workers)) as pool:
            records = list(pool.map(self.run_question, question_set.questions))
        records.sort(key=lambda r: r.question_id)

        scored = [r for r in records if r.scored]
        accuracy = sum(1 for r in scored if r.is_correct) / len(scored) if scored else float('nan')
        self.logger.info(
            f"기준 테스트 완료: {self.model.name} / {question_set.name} ({self.regime.value}) - "
            f"{len(records)}문항, 채점 {len(scored)}, 정확도 {accuracy:.3f}"
        )
        return records


def run_baseline(model: Provider, question_set: QuestionSet, regime: Regime,
                 panel: Optional[JudgePanel] = None,
                 settings: Optional[BaselineSettings] = None) -> List[BaselineRecord]:
    """
    기준 능력 테스트를 실행합니다.

    Returns:
        문항 id 순으로 정렬된 BaselineRecord 목록 (문항당 하나)

    Raises:
        ValueError: 모델이 지원하지 않는 샘플링 방식
    """
    return BaselineRunner(model, regime, panel, settings).run(question_set)


def accuracy(records: Sequence[BaselineRecord]) -> float:
    """채점된 레코드(거절/제외 제외)의 정확도"""
    scored = [r for r in records if r.scored]
    if not scored:
        raise ValueError("채점된 기준 레코드가 없습니다.")
    return sum(1 for r in scored if r.is_correct) / len(scored)
