"""
두 번째 기회 게임
기준 테스트 답을 보여주지 않은 채 "틀렸다"(Incorrect) 또는 "전송 중 유실"(Neutral)이라고 알리고
다시 답하게 한 뒤, 변경률 리프트와 대안 전략 검정을 계산합니다.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.baseline.parsing import parse_option_label
from src.baseline.scoring import JudgePanel, score_mc, score_short_answer
from src.games.delegate import answers_differ, baseline_index
from src.games.prompts import build_redo_prompt
from src.models.completion import Completion
from src.models.question import Question, QuestionSet
from src.models.records import (
    ENTROPY_TOLERANCE,
    STRATEGY_TESTS,
    BaselineRecord,
    Regime,
    SecondChanceSummary,
    SecondChanceTrial,
    SecondChanceVariant,
    StrategyClassification,
    StrategyOutcome,
)
from src.provider.base import Provider
from src.provider.distributions import RESAMPLE_TEMPERATURE, option_distribution_from_logprobs
from src.stats.descriptive import entropy
from src.stats.hypothesis_tests import binomial_test, wilcoxon_signed_rank
from src.stats.resampling import bootstrap_distribution
from src.utils.errors import DegenerateDistributionError, ProviderError, UndefinedStatisticError
from src.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_TOP_LOGPROBS = 5


@dataclass
class SecondChanceSettings:
    """두 번째 기회 게임 실행 설정 (temperature=None 이면 logprob 모델은 1.0, 나머지는 0)"""
    temperature: Optional[float] = None
    max_output: int = 16
    short_answer_max_output: int = 64
    max_workers: int = 8
    run_id: str = ""

    @classmethod
    def from_config(cls, config: dict, run_id: str = "") -> 'SecondChanceSettings':
        section = config.get('second_chance', {})
        temperature = section.get('temperature')
        return cls(
            temperature=float(temperature) if temperature is not None else None,
            max_output=int(section.get('max_output', 16)),
            short_answer_max_output=int(config.get('baseline', {}).get('short_answer_max_output', 64)),
            max_workers=int(config.get('run', {}).get('max_concurrent', 8)),
            run_id=run_id,
        )

    def temperature_for(self, model: Provider) -> float:
        if self.temperature is not None:
            return self.temperature
        return RESAMPLE_TEMPERATURE if model.supports_logprobs else 0.0


@dataclass
class StrategyTestSettings:
    """대안 전략 검정 설정"""
    alpha: float = 0.05
    chance_level: float = 1.0 / 3.0
    resamples: int = 2000
    seed: int = 0
    min_cell: int = 20

    @classmethod
    def from_config(cls, config: dict) -> 'StrategyTestSettings':
        section = config.get('second_chance', {})
        stats = config.get('stats', {})
        return cls(
            alpha=float(section.get('alpha', stats.get('alpha', 0.05))),
            chance_level=float(section.get('chance_level', 1.0 / 3.0)),
            resamples=int(stats.get('bootstrap_resamples', 2000)),
            seed=int(config.get('run', {}).get('seed', 0)),
            min_cell=int(stats.get('min_cell_trials', 20)),
        )


class SecondChanceGame:
    """한 모델, 한 변형의 두 번째 기회 게임"""

    def __init__(self, model: Provider, variant: SecondChanceVariant,
                 settings: Optional[SecondChanceSettings] = None, panel: Optional[JudgePanel] = None):
        self.model = model
        self.variant = variant
        self.settings = settings or SecondChanceSettings()
        self.panel = panel
        self.logger = get_logger(__name__)

    def _ask(self, question: Question, retry: bool) -> Completion:
        system, user = build_redo_prompt(question, self.variant, retry=retry)
        if question.is_multiple_choice:
            max_output = self.settings.max_output
            want = (self.model.top_logprobs or DEFAULT_TOP_LOGPROBS) if self.model.supports_logprobs else 0
        else:
            max_output, want = self.settings.short_answer_max_output, 0
        request = self.model.request(system, user, temperature=self.settings.temperature_for(self.model),
                                     max_output=max_output, want_top_logprobs=want)
        return self.model.complete(request)

    def _new_trial(self, question: Question, record: BaselineRecord, text: str = "") -> SecondChanceTrial:
        return SecondChanceTrial(
            question_id=question.id,
            model_id=self.model.model_id,
            variant=self.variant,
            baseline_ref=record.ref,
            response_text=text,
            run_id=self.settings.run_id,
        )

    def _excluded(self, question: Question, record: BaselineRecord, text: str, reason: str) -> SecondChanceTrial:
        trial = self._new_trial(question, record, text)
        trial.excluded = True
        trial.exclusion_reason = reason
        return trial

    def _play_mc(self, question: Question, record: BaselineRecord) -> SecondChanceTrial:
        completion = self._ask(question, retry=False)
        label = parse_option_label(completion.text)
        if label is None:
            completion = self._ask(question, retry=True)
            label = parse_option_label(completion.text)
        if label is None:
            return self._excluded(question, record, completion.text, "unparseable")

        trial = self._new_trial(question, record, completion.text)
        if self.model.supports_logprobs:
            try:
                trial.game_option_dist = option_distribution_from_logprobs(completion)
                trial.game_entropy = entropy(trial.game_option_dist)
            except DegenerateDistributionError as e:
                self.logger.warning(f"{question.id}: 게임 분포를 만들 수 없습니다 ({e})")
        if trial.game_option_dist is not None and record.regime == Regime.LOGPROB_TEMP1:
            # 기준과 같은 규칙: 최고 확률 라벨이 응답
            label = trial.game_option_dist.top_label()
        trial.game_answer = label
        trial.changed = label != record.chosen_label
        trial.game_correct = score_mc(label, question.reference_answer)
        return trial

    def _play_short_answer(self, question: Question, record: BaselineRecord) -> SecondChanceTrial:
        text = self._ask(question, retry=False).text.strip()
        if not text:
            text = self._ask(question, retry=True).text.strip()
        if not text:
            return self._excluded(question, record, text, "unparseable")

        trial = self._new_trial(question, record, text)
        trial.game_answer = text
        trial.changed = answers_differ(question, text, record.answer)
        score = score_short_answer(text, question.reference_answer, self.panel, question.text)
        if score.excluded:
            trial.excluded = True
            trial.exclusion_reason = score.exclusion_reason
        else:
            trial.game_correct = score.is_correct
        return trial

    def play(self, question: Question, record: BaselineRecord) -> SecondChanceTrial:
        try:
            if question.is_multiple_choice:
                return self._play_mc(question, record)
            return self._play_short_answer(question, record)
        except ProviderError as e:
            self.logger.error(f"{self.model.name}/{question.id}: 프로바이더 오류로 제외 - {e}")
            return self._excluded(question, record, "", f"provider_error: {e}")

    def run(self, question_set: QuestionSet, baseline: Sequence[BaselineRecord]) -> List[SecondChanceTrial]:
        index = baseline_index(baseline, self.model.model_id)
        pairs = []
        for question in question_set.questions:
            record = index.get(question.id)
            if record is not None and record.scored and record.answer is not None:
                pairs.append((question, record))
        skipped = len(question_set) - len(pairs)
        if skipped:
            self.logger.info(f"기준 답이 없는 {skipped}문항은 두 번째 기회 게임에서 제외합니다.")

        with ThreadPoolExecutor(max_workers=max(1, self.settings.max_workers)) as pool:
            trials = list(pool.map(lambda pair: self.play(*pair), pairs))
        trials.sort(key=lambda t: t.question_id)

        kept = [t for t in trials if not t.excluded]
        changed = sum(1 for t in kept if t.changed)
        self.logger.info(
            f"두 번째 기회 게임 완료: {self.model.name} / {question_set.name} ({self.variant.value}) - "
            f"{len(trials)}시행, 제외 {len(trials) - len(kept)}, 변경 {changed}"
        )
        return trials


def run_second_chance(model: Provider, question_set: QuestionSet, baseline: Sequence[BaselineRecord],
                      variant: SecondChanceVariant, settings: Optional[SecondChanceSettings] = None,
                      panel: Optional[JudgePanel] = None) -> List[SecondChanceTrial]:
    """
    두 번째 기회 게임을 실행합니다.

    Returns:
        기준 답이 있는 문항마다 하나씩, 문항 id 순으로 정렬된 시행 목록
    """
    return SecondChanceGame(model, variant, settings, panel).run(question_set, baseline)


def _kept(trials: Sequence[SecondChanceTrial]) -> List[SecondChanceTrial]:
    return [t for t in trials if not t.excluded and t.changed is not None]


def _rate(trials: Sequence[SecondChanceTrial], name: str) -> float:
    if not trials:
        raise UndefinedStatisticError(f"{name} 변경률: 제외되지 않은 시행이 없습니다.", diagnostic={'trials': 0})
    return sum(1 for t in trials if t.changed) / len(trials)


def normalized_lift(change_rate_game: float, change_rate_neutral: float) -> float:
    """
    (게임 변경률 − 중립 변경률) / (1 − 중립 변경률)

    Raises:
        UndefinedStatisticError: 중립 변경률이 1인 경우
    """
    if change_rate_neutral >= 1.0:
        raise UndefinedStatisticError("중립 변경률이 1이면 정규화 리프트가 정의되지 않습니다.",
                                      diagnostic={'change_rate_neutral': change_rate_neutral})
    return (change_rate_game - change_rate_neutral) / (1.0 - change_rate_neutral)


def _entropy_diffs(trials: Sequence[SecondChanceTrial], index: Dict[str, BaselineRecord]) -> List[float]:
    diffs = []
    for trial in trials:
        record = index.get(trial.question_id)
        if trial.game_entropy is not None and record is not None and record.entropy is not None:
            diff = trial.game_entropy - record.entropy
            # 부동소수 오차 수준의 차이는 동률로 취급
            diffs.append(0.0 if abs(diff) < ENTROPY_TOLERANCE else diff)
    return diffs


def _mean_or_none(values: Sequence[float]) -> Optional[float]:
    return math.fsum(values) / len(values) if values else None


def _index_for(trials: Sequence[SecondChanceTrial], baseline: Sequence[BaselineRecord]) -> Dict[str, BaselineRecord]:
    model_id = trials[0].model_id if trials else None
    return baseline_index(baseline, model_id)


def summarize(game_trials: Sequence[SecondChanceTrial], neutral_trials: Sequence[SecondChanceTrial],
              baseline: Sequence[BaselineRecord]) -> SecondChanceSummary:
    """
    변경률, 리프트, 기준 오답 문항 정확도, 두 번째 선택 비율, 엔트로피 차이를 계산합니다.

    Raises:
        UndefinedStatisticError: 어느 한 변형에 유효한 시행이 없거나 중립 변경률이 1인 경우
    """
    game = _kept(game_trials)
    neutral = _kept(neutral_trials)
    rate_game = _rate(game, SecondChanceVariant.INCORRECT.value)
    rate_neutral = _rate(neutral, SecondChanceVariant.NEUTRAL.value)
    index = _index_for(game_trials, baseline)

    incorrect = [t for t in game if t.game_correct is not None
                 and index.get(t.question_id) is not None and index[t.question_id].is_correct is False]
    n_correct_on_incorrect = sum(1 for t in incorrect if t.game_correct)

    # 두 번째 선택이 정의된 객관식 변경 시행만 분모에 포함
    changed_mc = [t for t in game if t.changed and t.question_id in index
                  and index[t.question_id].second_choice is not None]
    n_second = sum(1 for t in changed_mc if t.game_answer == index[t.question_id].second_choice)

    return SecondChanceSummary(
        change_rate_game=rate_game,
        change_rate_neutral=rate_neutral,
        lift=rate_game - rate_neutral,
        normalized_lift=normalized_lift(rate_game, rate_neutral),
        acc_on_incorrect=n_correct_on_incorrect / len(incorrect) if incorrect else None,
        second_choice_rate=n_second / len(changed_mc) if changed_mc else None,
        entropy_diff_game=_mean_or_none(_entropy_diffs(game, index)),
        entropy_diff_neutral=_mean_or_none(_entropy_diffs(neutral, _index_for(neutral_trials, baseline))),
        n_game=len(game),
        n_neutral=len(neutral),
        n_incorrect_baseline=len(incorrect),
        n_correct_on_incorrect=n_correct_on_incorrect,
        n_changed_mc=len(changed_mc),
        n_second_choice=n_second,
    )


def paired_changes(game_trials: Sequence[SecondChanceTrial],
                   neutral_trials: Sequence[SecondChanceTrial]) -> np.ndarray:
    """두 변형 모두 유효한 문항의 (게임 변경, 중립 변경) 행렬"""
    neutral = {t.question_id: t for t in _kept(neutral_trials)}
    rows = [(float(t.changed), float(neutral[t.question_id].changed))
            for t in _kept(game_trials) if t.question_id in neutral]
    return np.asarray(rows, dtype=float).reshape(-1, 2)


def lift_test(pairs: np.ndarray, resamples: int = 2000, seed: int = 0) -> Tuple[float, float]:
    """
    문항 단위 부트스트랩으로 리프트 > 0 을 단측 검정합니다.

    Returns:
        (lift, p) p 는 리프트가 0 이하인 재표본 비율
    """
    def stat(rows: np.ndarray) -> float:
        return float(rows[:, 0].mean() - rows[:, 1].mean())

    distribution = bootstrap_distribution(stat, pairs, B=resamples, seed=seed)
    return stat(pairs), distribution.fraction_at_most(0.0)


def entropy_increase_test(diffs: Sequence[float], alpha: float) -> Tuple[StrategyOutcome, Optional[float], str]:
    """게임 엔트로피가 기준보다 크다는 단측 윌콕슨 검정이 유의하지 않으면 Pass"""
    try:
        result = wilcoxon_signed_rank(diffs)
    except UndefinedStatisticError as e:
        return StrategyOutcome.PASS, None, str(e)
    outcome = StrategyOutcome.FAIL if result.p_greater < alpha else StrategyOutcome.PASS
    return outcome, result.p_greater, ""


def strategy_tests(summary: SecondChanceSummary, game_trials: Sequence[SecondChanceTrial],
                   neutral_trials: Sequence[SecondChanceTrial], baseline: Sequence[BaselineRecord],
                   settings: Optional[StrategyTestSettings] = None) -> StrategyClassification:
    """
    리프트, 오답 문항 정확도, 두 번째 선택, 엔트로피 비증가 검정과 요약 판정

    리프트가 Pass 가 아니면 나머지 검정은 NotApplicable 입니다. 셀 크기가 min_cell 미만인
    검정도 NotApplicable 이며 진단 메시지를 남깁니다.
    """
    settings = settings or StrategyTestSettings()
    tests = {name: StrategyOutcome.NOT_APPLICABLE for name in STRATEGY_TESTS}
    p_values: Dict[str, Optional[float]] = {name: None for name in STRATEGY_TESTS}
    diagnostics: Dict[str, str] = {}

    pairs = paired_changes(game_trials, neutral_trials)
    if len(pairs) < settings.min_cell:
        diagnostics['Lift'] = f"짝지어진 문항 {len(pairs)}개 < {settings.min_cell}"
    else:
        _, p = lift_test(pairs, settings.resamples, settings.seed)
        p_values['Lift'] = p
        tests['Lift'] = StrategyOutcome.PASS if p < settings.alpha else StrategyOutcome.FAIL

    index = _index_for(game_trials, baseline)
    game = _kept(game_trials)
    is_mc = any(t.question_id in index and index[t.question_id].chosen_label is not None for t in game)
    neutral_check = StrategyOutcome.NOT_APPLICABLE

    if tests['Lift'] != StrategyOutcome.PASS:
        for name in STRATEGY_TESTS[1:]:
            diagnostics.setdefault(name, "리프트 검정이 통과하지 않아 실행하지 않음")
    elif not is_mc:
        for name in STRATEGY_TESTS[1:]:
            diagnostics[name] = "단답형은 선택지 확률이 없어 실행하지 않음"
    else:
        if summary.n_incorrect_baseline < settings.min_cell:
            diagnostics['AccIncor'] = f"기준 오답 문항 {summary.n_incorrect_baseline}개 < {settings.min_cell}"
        else:
            p = binomial_test(summary.n_correct_on_incorrect, summary.n_incorrect_baseline, settings.chance_level)
            p_values['AccIncor'] = p
            tests['AccIncor'] = StrategyOutcome.PASS if p < settings.alpha else StrategyOutcome.FAIL

        if summary.n_changed_mc < settings.min_cell:
            diagnostics['SecChoice'] = f"변경된 객관식 시행 {summary.n_changed_mc}개 < {settings.min_cell}"
        else:
            p = binomial_test(summary.n_second_choice, summary.n_changed_mc, settings.chance_level)
            p_values['SecChoice'] = p
            tests['SecChoice'] = StrategyOutcome.PASS if p < settings.alpha else StrategyOutcome.FAIL

        diffs = _entropy_diffs(game, index)
        if len(diffs) < settings.min_cell:
            diagnostics['NoEntInc'] = f"엔트로피 쌍 {len(diffs)}개 < {settings.min_cell}"
        else:
            tests['NoEntInc'], p_values['NoEntInc'], note = entropy_increase_test(diffs, settings.alpha)
            if note:
                diagnostics['NoEntInc'] = note

        neutral_diffs = _entropy_diffs(_kept(neutral_trials), _index_for(neutral_trials, baseline))
        if len(neutral_diffs) >= settings.min_cell:
            neutral_check, _, _ = entropy_increase_test(neutral_diffs, settings.alpha)

    classification = StrategyClassification(
        tests=tests,
        verdict=StrategyClassification.classify(tests),
        p_values=p_values,
        diagnostics=diagnostics,
        neutral_entropy_check=neutral_check,
    )
    logger.info(
        "전략 검정: " + ", ".join(f"{name}={tests[name].value}" for name in STRATEGY_TESTS)
        + f" → {classification.verdict.value if classification.verdict else '판정 없음'}"
    )
    return classification
