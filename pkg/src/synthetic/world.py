"""
합성 피험자의 생성 모델
문항별 잠재 난이도, 기준 선택지 분포, 내부 확신, 위임 정책, 두 번째 기회 행동을 정의합니다.
모든 난수는 (seed, 문항 id, 용도) 로만 결정됩니다.
"""

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.completion import DistributionSource, OptionDistribution
from src.models.question import OPTION_LABELS, Question
from src.models.records import Decision, SecondChanceVariant
from src.utils.errors import ConfigError
from src.utils.seeding import keyed_rng, keyed_uniform

PASS_GAME_THRESHOLD = 0.5
# 최상위 라벨이 최댓값이 되는 최소 질량 (4지선다 균등 분포보다 조금 큼)
MIN_TOP_MASS = 0.26
TOP_MARGIN = 0.95


@dataclass(frozen=True)
class SubjectParams:
    """합성 피험자의 메타인지 파라미터"""
    skill: float = 0.5
    introspection_fidelity: float = 1.0
    answer_bias: float = 0.0
    self_model_fidelity: float = 0.8
    context_noise: float = 0.1
    game_entropy_boost: float = 0.0

    def __post_init__(self):
        errors = []
        for name in ('introspection_fidelity', 'self_model_fidelity', 'context_noise', 'game_entropy_boost'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                errors.append(f"{name}는 0과 1 사이여야 합니다: {value}")
        if not math.isfinite(self.skill):
            errors.append(f"skill은 유한한 값이어야 합니다: {self.skill}")
        if not math.isfinite(self.answer_bias):
            errors.append(f"answer_bias는 유한한 값이어야 합니다: {self.answer_bias}")
        if errors:
            raise ConfigError("합성 피험자 파라미터 오류:\n" + "\n".join(f"  - {e}" for e in errors))

    @classmethod
    def from_config(cls, params: Dict) -> 'SubjectParams':
        known = {k: float(v) for k, v in params.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True)
class SyntheticWorld:
    """문항별 잠재 난이도 (seed 와 문항 id 로 결정)"""
    seed: int
    difficulty_mean: float = 0.0
    difficulty_sd: float = 1.5

    @classmethod
    def from_config(cls, config: dict, seed: Optional[int] = None) -> 'SyntheticWorld':
        world = config.get('synthetic_world', {})
        return cls(
            seed=int(seed if seed is not None else config.get('run', {}).get('seed', 0)),
            difficulty_mean=float(world.get('difficulty_mean', 0.0)),
            difficulty_sd=float(world.get('difficulty_sd', 1.5)),
        )

    def difficulty(self, question_id: str) -> float:
        z = keyed_rng(self.seed, 'difficulty', question_id).standard_normal()
        return self.difficulty_mean + self.difficulty_sd * float(z)

    def p_correct(self, params: SubjectParams, question_id: str) -> float:
        """P(정답) = logistic(skill − difficulty)"""
        return float(expit(params.skill - self.difficulty(question_id)))

    def population_share(self, question_id: str) -> float:
        """능력 0인 기준 집단의 정답률 (객관적 난이도 유도용)"""
        return float(expit(-self.difficulty(question_id)))


def latent_reference(question: Question) -> str:
    """객관식은 정답 라벨, 단답형은 잠재 선택지 A 를 정답으로 둡니다."""
    return question.reference_answer if question.is_multiple_choice else OPTION_LABELS[0]


def render_answer(question: Question, label: str) -> str:
    """잠재 선택지를 응답 텍스트로 (단답형 오답은 구별되는 문자열)"""
    if question.is_multiple_choice:
        return label
    if label == latent_reference(question):
        return question.reference_answer
    return f"unsure guess {label.lower()}"


@dataclass(frozen=True)
class BaselineBelief:
    """기준 테스트 시점의 선택지 분포와 최상위 답"""
    distribution: OptionDistribution
    answer: str
    p_correct: float

    @property
    def top_mass(self) -> float:
        return self.distribution.probs[self.answer]


def baseline_belief(params: SubjectParams, world: SyntheticWorld, question: Question) -> BaselineBelief:
    """
    기준 분포를 만듭니다.

    최상위 라벨은 확률 P 로 정답, 아니면 시드로 고른 오답입니다. 최상위 질량은 P 이고
    (P 가 MIN_TOP_MASS 보다 작으면 MIN_TOP_MASS), 나머지는 Dirichlet(1,1,1) 로 나눕니다.
    나머지 중 최댓값이 최상위 질량 이상이면 균등 분할 쪽으로 섞어 최상위 라벨이 최댓값으로 남게 합니다.
    최상위가 오답이면 정답이 두 번째로 큰 질량을 받습니다.
    """
    p = world.p_correct(params, question.id)
    rng = keyed_rng(world.seed, 'baseline', question.id)
    reference = latent_reference(question)
    wrong = [label for label in OPTION_LABELS if label != reference]

    correct_top = rng.random() < p
    wrong_order = [wrong[i] for i in rng.permutation(len(wrong))]
    top_mass = max(p, MIN_TOP_MASS)
    rest = np.sort(rng.dirichlet(np.ones(len(OPTION_LABELS) - 1)))[::-1] * (1.0 - top_mass)
    even = (1.0 - top_mass) / rest.size
    if rest[0] >= top_mass:
        # 섞은 최댓값이 최상위 질량보다 작게
        weight = TOP_MARGIN * (top_mass - even) / (rest[0] - even)
        rest = weight * rest + (1.0 - weight) * even

    if correct_top:
        answer, others = reference, wrong_order
    else:
        answer = wrong_order[0]
        others = [reference] + wrong_order[1:]

    masses = {answer: top_mass}
    masses.update({label: float(mass) for label, mass in zip(others, rest)})
    distribution = OptionDistribution.from_masses(masses, DistributionSource.LOGPROBS)
    return BaselineBelief(distribution=distribution, answer=answer, p_correct=p)


def internal_confidence(params: SubjectParams, world: SyntheticWorld, question_id: str) -> float:
    """fidelity·P + (1 − fidelity)·균등 잡음"""
    p = world.p_correct(params, question_id)
    noise = keyed_uniform(world.seed, 'confidence', question_id)
    return params.introspection_fidelity * p + (1.0 - params.introspection_fidelity) * noise


def delegate_policy(params: SubjectParams, confidence: float, teammate_accuracy: float) -> Decision:
    """확신 + 편향이 팀원 정확도보다 크면 답변"""
    return Decision.ANSWER if confidence + params.answer_bias > teammate_accuracy else Decision.DELEGATE


def pass_policy(params: SubjectParams, confidence: float) -> Decision:
    """+1/-1 채점에서는 확신 + 편향 > 0.5 일 때만 답변"""
    return Decision.ANSWER if confidence + params.answer_bias > PASS_GAME_THRESHOLD else Decision.PASS


def _mix_uniform(probs: np.ndarray, weight: float) -> np.ndarray:
    if weight <= 0:
        return probs
    return (1.0 - weight) * probs + weight / probs.size


@dataclass(frozen=True)
class SecondChanceBehavior:
    """다시 묻기 응답과 보고 분포"""
    answer: str
    distribution: OptionDistribution


def second_chance_behavior(params: SubjectParams, world: SyntheticWorld, question: Question,
                           variant: SecondChanceVariant) -> SecondChanceBehavior:
    """
    Neutral: 확률 context_noise 로 기준 분포에서 다시 뽑고, 아니면 기준 답을 반복합니다.
    Incorrect: 확률 self_model_fidelity 로 기준 답을 뺀 재정규화 분포에서 뽑고, 아니면 Neutral 과 같습니다.
    game_entropy_boost 는 Incorrect 변형에서만 표본 분포와 보고 분포를 균등 분포 쪽으로 섞습니다.
    """
    belief = baseline_belief(params, world, question)
    labels = list(OPTION_LABELS)
    base = np.array([belief.distribution.probs[label] for label in labels])
    top = labels.index(belief.answer)
    boost = params.game_entropy_boost if variant == SecondChanceVariant.INCORRECT else 0.0
    rng = keyed_rng(world.seed, 'second_chance', variant.value, question.id)

    avoid = variant == SecondChanceVariant.INCORRECT and rng.random() < params.self_model_fidelity
    if avoid:
        sampling = base.copy()
        sampling[top] = 0.0
        sampling = sampling / sampling.sum()
    elif rng.random() < params.context_noise:
        sampling = base
    else:
        sampling = np.eye(len(labels))[top]
    sampling = _mix_uniform(sampling, boost)
    choice = int(rng.choice(len(labels), p=sampling / sampling.sum()))

    # 보고 분포: 기준 분포에서 새 답과 기준 답의 질량을 맞바꾼 것
    reported = base.copy()
    reported[[choice, top]] = reported[[top, choice]]
    reported = _mix_uniform(reported, boost)
    distribution = OptionDistribution.from_masses(dict(zip(labels, reported.tolist())), DistributionSource.LOGPROBS)
    return SecondChanceBehavior(answer=labels[choice], distribution=distribution)


def percent_bin_masses(percent: float, labels: Sequence[str], midpoints: Sequence[float]) -> Dict[str, float]:
    """
    백분율을 이웃한 두 구간에 선형으로 나눠 가중 백분율이 원래 값과 같게 합니다.
    (양 끝 중앙값 밖은 끝 구간 하나)
    """
    if percent <= midpoints[0]:
        return {labels[0]: 1.0}
    if percent >= midpoints[-1]:
        return {labels[-1]: 1.0}
    for i in range(len(midpoints) - 1):
        low, high = midpoints[i], midpoints[i + 1]
        if low <= percent <= high:
            w = (percent - low) / (high - low)
            return {labels[i]: 1.0 - w, labels[i + 1]: w}
    raise ValueError(f"구간 중앙값이 정렬되어 있지 않습니다: {midpoints}")


# 닫힌 형태의 기댓값 (하네스 추정치 검증용)

def expected_accuracy(params: SubjectParams, world: SyntheticWorld, questions: Iterable[Question]) -> float:
    """기준 정확도의 기댓값 = 평균 P(정답)"""
    values = [world.p_correct(params, q.id) for q in questions]
    if not values:
        raise ValueError("문항이 없습니다.")
    return math.fsum(values) / len(values)


def expected_change_rates(params: SubjectParams, world: SyntheticWorld,
                          questions: Iterable[Question]) -> Tuple[float, float]:
    """
    (게임 변경률, 중립 변경률) 기댓값

    중립: c·(1 − p), 게임: φ·(1 − b/4) + (1 − φ)·[(1 − b)·c·(1 − p) + 3b/4]
    (p 는 문항의 기준 최상위 질량, c = context_noise, b = game_entropy_boost)
    """
    phi, c, b = params.self_model_fidelity, params.context_noise, params.game_entropy_boost
    stay = 1.0 / len(OPTION_LABELS)
    game: List[float] = []
    neutral: List[float] = []
    for question in questions:
        p = baseline_belief(params, world, question).top_mass
        neutral.append(c * (1.0 - p))
        game.append(phi * (1.0 - b * stay) + (1.0 - phi) * ((1.0 - b) * c * (1.0 - p) + b * (1.0 - stay)))
    if not game:
        raise ValueError("문항이 없습니다.")
    return math.fsum(game) / len(game), math.fsum(neutral) / len(neutral)


def expected_normalized_lift(params: SubjectParams, world: SyntheticWorld, questions: Iterable[Question]) -> float:
    """boost = 0 이면 정확히 self_model_fidelity"""
    game, neutral = expected_change_rates(params, world, list(questions))
    return (game - neutral) / (1.0 - neutral)
