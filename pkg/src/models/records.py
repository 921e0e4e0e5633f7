"""
실행 산출 레코드 모델
기준 테스트 레코드, 판정, 유도 확률, 게임 시행, 두 번째 기회 요약을 정의합니다.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.completion import OptionDistribution
from src.models.question import OPTION_LABELS, Question

ENTROPY_TOLERANCE = 1e-9


class Regime(Enum):
    """기준 테스트 샘플링 방식"""
    TEMP0 = "Temp0"
    RESAMPLED = "Resampled"
    LOGPROB_TEMP1 = "LogprobTemp1"


class ElicitedKind(Enum):
    """유도 프로브 종류"""
    OBJECTIVE_DIFFICULTY = "ObjectiveDifficulty"
    SELF_CONFIDENCE = "SelfConfidence"


class Decision(Enum):
    """게임 결정"""
    ANSWER = "Answer"
    DELEGATE = "Delegate"
    PASS = "Pass"


class GameKind(Enum):
    """답변/회피 게임 종류"""
    DELEGATE = "Delegate"
    PASS = "Pass"


class SecondChanceVariant(Enum):
    """두 번째 기회 게임 변형"""
    INCORRECT = "Incorrect"
    NEUTRAL = "Neutral"


class StrategyOutcome(Enum):
    """전략 검정 결과"""
    PASS = "Pass"
    FAIL = "Fail"
    NOT_APPLICABLE = "NotApplicable"


class Verdict(Enum):
    """전략 분류 판정"""
    SELF_MODELING_UNEXPLAINED = "SelfModelingUnexplained"
    EXPLAINABLE = "Explainable"
    NO_LIFT = "NoLift"


STRATEGY_TESTS = ('Lift', 'AccIncor', 'SecChoice', 'NoEntInc')


def _enum_or_none(enum_cls, value):
    return enum_cls(value) if value is not None else None


@dataclass(frozen=True)
class JudgeVerdict:
    """판정 모델 한 개의 결과 (matches=None 은 Invalid)"""
    judge_model: str
    matches: Optional[bool]

    @property
    def is_valid(self) -> bool:
        return self.matches is not None

    def to_record(self) -> Dict[str, Any]:
        return {'judge_model': self.judge_model, 'matches': self.matches if self.is_valid else 'Invalid'}

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> 'JudgeVerdict':
        matches = record.get('matches')
        return cls(judge_model=record['judge_model'], matches=matches if isinstance(matches, bool) else None)


@dataclass
class BaselineRecord:
    """채점된 기준 테스트 응답 하나"""
    question_id: str
    model_id: str
    regime: Regime
    response_text: str
    chosen_label: Optional[str] = None
    option_dist: Optional[OptionDistribution] = None
    entropy: Optional[float] = None
    second_choice: Optional[str] = None
    is_correct: Optional[bool] = None
    declined: bool = False
    excluded: bool = False
    exclusion_reason: Optional[str] = None
    judge_verdicts: List[JudgeVerdict] = field(default_factory=list)
    dataset: str = ""
    run_id: str = ""

    def validate(self) -> None:
        """레코드 불변식을 검사합니다."""
        errors = []
        if (self.entropy is None) != (self.option_dist is None):
            errors.append("entropy는 option_dist가 있을 때만 존재해야 합니다.")
        if (self.second_choice is None) != (self.option_dist is None):
            errors.append("second_choice는 option_dist가 있을 때만 존재해야 합니다.")
        if self.entropy is not None and not (-ENTROPY_TOLERANCE <= self.entropy <= math.log(len(OPTION_LABELS)) + ENTROPY_TOLERANCE):
            errors.append(f"entropy 범위 오류: {self.entropy}")
        if (self.is_correct is None) != (self.declined or self.excluded):
            errors.append("is_correct는 declined/excluded가 아닐 때만 존재해야 합니다.")
        if errors:
            raise ValueError(f"기준 레코드 {self.model_id}/{self.question_id} 검증 오류: " + "; ".join(errors))

    @property
    def ref(self) -> str:
        """게임 시행에서 이 레코드를 가리키는 링크"""
        return f"{self.model_id}/{self.question_id}"

    @property
    def scored(self) -> bool:
        """정확도 분모에 포함되는지 여부"""
        return not (self.declined or self.excluded)

    @property
    def answer(self) -> Optional[str]:
        """객관식이면 선택 라벨, 단답형이면 응답 텍스트"""
        if self.chosen_label is not None:
            return self.chosen_label
        if self.scored:
            return self.response_text
        return None

    @property
    def top_probability(self) -> Optional[float]:
        if self.option_dist is None:
            return None
        return self.option_dist.top_probability()

    def to_record(self) -> Dict[str, Any]:
        return {
            'run_id': self.run_id,
            'dataset': self.dataset,
            'question_id': self.question_id,
            'model_id': self.model_id,
            'regime': self.regime.value,
            'response_text': self.response_text,
            'chosen_label': self.chosen_label,
            'option_dist': self.option_dist.to_record() if self.option_dist else None,
            'entropy': self.entropy,
            'second_choice': self.second_choice,
            'is_correct': self.is_correct,
            'declined': self.declined,
            'excluded': self.excluded,
            'exclusion_reason': self.exclusion_reason,
            'judge_verdicts': [v.to_record() for v in self.judge_verdicts],
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> 'BaselineRecord':
        return cls(
            question_id=record['question_id'],
            model_id=record['model_id'],
            regime=Regime(record['regime']),
            response_text=record.get('response_text', ''),
            chosen_label=record.get('chosen_label'),
            option_dist=OptionDistribution.from_record(record.get('option_dist')),
            entropy=record.get('entropy'),
            second_choice=record.get('second_choice'),
            is_correct=record.get('is_correct'),
            declined=bool(record.get('declined', False)),
            excluded=bool(record.get('excluded', False)),
            exclusion_reason=record.get('exclusion_reason'),
            judge_verdicts=[JudgeVerdict.from_record(v) for v in record.get('judge_verdicts', [])],
            dataset=record.get('dataset', ''),
            run_id=record.get('run_id', ''),
        )


@dataclass
class ElicitedPercent:
    """구간 확률로 가중한 백분율 응답"""
    question_id: str
    model_id: str
    kind: ElicitedKind
    percent: float
    dist_over_bins: OptionDistribution
    degenerate: bool = False
    run_id: str = ""

    def to_record(self) -> Dict[str, Any]:
        return {
            'run_id': self.run_id,
            'question_id': self.question_id,
            'model_id': self.model_id,
            'kind': self.kind.value,
            'percent': self.percent,
            'dist_over_bins': self.dist_over_bins.to_record(),
            'degenerate': self.degenerate,
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> 'ElicitedPercent':
        return cls(
            question_id=record['question_id'],
            model_id=record['model_id'],
            kind=ElicitedKind(record['kind']),
            percent=float(record['percent']),
            dist_over_bins=OptionDistribution.from_record(record['dist_over_bins']),
            degenerate=bool(record.get('degenerate', False)),
            run_id=record.get('run_id', ''),
        )


@dataclass(frozen=True)
class TeammateProfile:
    """가상 팀원 설정"""
    target_accuracy: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.target_accuracy <= 1.0:
            raise ValueError(f"target_accuracy는 0과 1 사이여야 합니다: {self.target_accuracy}")

    def correct_count(self, n_phase1: int) -> int:
        """1단계에서 정답으로 표시할 문항 수 (반올림, .5는 올림)"""
        return int(math.floor(self.target_accuracy * n_phase1 + 0.5))


@dataclass(frozen=True)
class Phase1Entry:
    """1단계 기록 한 줄: 자신의 답과 팀원의 정오만 보여줍니다."""
    question: Question
    self_answer: Optional[str]
    teammate_correct: bool


@dataclass
class DelegateTrial:
    """답변/위임(또는 패스) 게임 시행 하나"""
    question_id: str
    model_id: str
    game: GameKind
    baseline_ref: str
    decision: Optional[Decision] = None
    answer: Optional[str] = None
    changed_from_baseline: Optional[bool] = None
    is_correct: Optional[bool] = None
    points: Optional[int] = None
    excluded: bool = False
    exclusion_reason: Optional[str] = None
    teammate_accuracy: Optional[float] = None
    response_text: str = ""
    run_id: str = ""

    def validate(self) -> None:
        if self.excluded:
            return
        if self.decision is None:
            raise ValueError(f"시행 {self.question_id}: 제외되지 않은 시행에는 결정이 필요합니다.")
        if (self.answer is not None) != (self.decision == Decision.ANSWER):
            raise ValueError(f"시행 {self.question_id}: answer는 Answer 결정일 때만 존재해야 합니다.")
        if self.changed_from_baseline is not None and self.decision != Decision.ANSWER:
            raise ValueError(f"시행 {self.question_id}: changed_from_baseline은 Answer 결정에서만 정의됩니다.")

    @property
    def answered(self) -> bool:
        return not self.excluded and self.decision == Decision.ANSWER

    def to_record(self) -> Dict[str, Any]:
        return {
            'run_id': self.run_id,
            'question_id': self.question_id,
            'model_id': self.model_id,
            'game': self.game.value,
            'baseline_ref': self.baseline_ref,
            'decision': self.decision.value if self.decision else None,
            'answer': self.answer,
            'changed_from_baseline': self.changed_from_baseline,
            'is_correct': self.is_correct,
            'points': self.points,
            'excluded': self.excluded,
            'exclusion_reason': self.exclusion_reason,
            'teammate_accuracy': self.teammate_accuracy,
            'response_text': self.response_text,
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> 'DelegateTrial':
        return cls(
            question_id=record['question_id'],
            model_id=record['model_id'],
            game=GameKind(record['game']),
            baseline_ref=record['baseline_ref'],
            decision=_enum_or_none(Decision, record.get('decision')),
            answer=record.get('answer'),
            changed_from_baseline=record.get('changed_from_baseline'),
            is_correct=record.get('is_correct'),
            points=record.get('points'),
            excluded=bool(record.get('excluded', False)),
            exclusion_reason=record.get('exclusion_reason'),
            teammate_accuracy=record.get('teammate_accuracy'),
            response_text=record.get('response_text', ''),
            run_id=record.get('run_id', ''),
        )


@dataclass
class SecondChanceTrial:
    """두 번째 기회 게임 시행 하나"""
    question_id: str
    model_id: str
    variant: SecondChanceVariant
    baseline_ref: str
    game_answer: Optional[str] = None
    game_option_dist: Optional[OptionDistribution] = None
    game_entropy: Optional[float] = None
    changed: Optional[bool] = None
    game_correct: Optional[bool] = None
    excluded: bool = False
    exclusion_reason: Optional[str] = None
    response_text: str = ""
    run_id: str = ""

    def to_record(self) -> Dict[str, Any]:
        return {
            'run_id': self.run_id,
            'question_id': self.question_id,
            'model_id': self.model_id,
            'variant': self.variant.value,
            'baseline_ref': self.baseline_ref,
            'game_answer': self.game_answer,
            'game_option_dist': self.game_option_dist.to_record() if self.game_option_dist else None,
            'game_entropy': self.game_entropy,
            'changed': self.changed,
            'game_correct': self.game_correct,
            'excluded': self.excluded,
            'exclusion_reason': self.exclusion_reason,
            'response_text': self.response_text,
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> 'SecondChanceTrial':
        return cls(
            question_id=record['question_id'],
            model_id=record['model_id'],
            variant=SecondChanceVariant(record['variant']),
            baseline_ref=record['baseline_ref'],
            game_answer=record.get('game_answer'),
            game_option_dist=OptionDistribution.from_record(record.get('game_option_dist')),
            game_entropy=record.get('game_entropy'),
            changed=record.get('changed'),
            game_correct=record.get('game_correct'),
            excluded=bool(record.get('excluded', False)),
            exclusion_reason=record.get('exclusion_reason'),
            response_text=record.get('response_text', ''),
            run_id=record.get('run_id', ''),
        )


@dataclass
class SecondChanceSummary:
    """두 번째 기회 게임 요약 통계"""
    change_rate_game: float
    change_rate_neutral: float
    lift: float
    normalized_lift: float
    acc_on_incorrect: Optional[float]
    second_choice_rate: Optional[float]
    entropy_diff_game: Optional[float]
    entropy_diff_neutral: Optional[float]
    n_game: int = 0
    n_neutral: int = 0
    n_incorrect_baseline: int = 0
    n_correct_on_incorrect: int = 0
    n_changed_mc: int = 0
    n_second_choice: int = 0

    def to_record(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class StrategyClassification:
    """대안 전략 검정과 요약 판정"""
    tests: Dict[str, StrategyOutcome]
    verdict: Optional[Verdict]
    p_values: Dict[str, Optional[float]] = field(default_factory=dict)
    diagnostics: Dict[str, str] = field(default_factory=dict)
    neutral_entropy_check: StrategyOutcome = StrategyOutcome.NOT_APPLICABLE

    @staticmethod
    def classify(tests: Dict[str, StrategyOutcome]) -> Optional[Verdict]:
        """
        검정 결과 네 개로 판정을 내립니다.

        리프트 검정을 실행하지 못했으면 (NotApplicable) 판정이 없으므로 None 입니다.
        """
        lift = tests.get('Lift', StrategyOutcome.NOT_APPLICABLE)
        if lift == StrategyOutcome.NOT_APPLICABLE:
            return None
        if lift == StrategyOutcome.FAIL:
            return Verdict.NO_LIFT
        if all(tests.get(name) == StrategyOutcome.PASS for name in STRATEGY_TESTS):
            return Verdict.SELF_MODELING_UNEXPLAINED
        return Verdict.EXPLAINABLE

    def to_record(self) -> Dict[str, Any]:
        return {
            'tests': {name: self.tests[name].value for name in STRATEGY_TESTS},
            'verdict': self.verdict.value if self.verdict else None,
            'p_values': dict(self.p_values),
            'diagnostics': dict(self.diagnostics),
            'neutral_entropy_check': self.neutral_entropy_check.value,
        }
