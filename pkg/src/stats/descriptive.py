"""
기술 통계: 엔트로피, AUC, 피어슨 상관
"""

import math
from typing import Mapping, Sequence, Union

import numpy as np
from scipy.stats import rankdata

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.completion import OptionDistribution
from src.utils.errors import UndefinedStatisticError

VARIANCE_FLOOR = 1e-12

Probabilities = Union[OptionDistribution, Mapping[str, float], Sequence[float]]


def _probabilities(dist: Probabilities) -> list:
    if isinstance(dist, OptionDistribution):
        return list(dist.probs.values())
    if isinstance(dist, Mapping):
        return list(dist.values())
    return [float(p) for p in dist]


def entropy(dist: Probabilities) -> float:
    """
    자연로그 섀넌 엔트로피 -Σ p ln p (0·ln 0 = 0)

    Args:
        dist: 선택지 분포 또는 확률 목록

    Returns:
        엔트로피 (nat)
    """
    terms = [-p * math.log(p) for p in _probabilities(dist) if p > 0]
    value = math.fsum(terms)
    # 원핫 분포에서 -0.0 이 나오지 않도록
    return value if value > 0 else 0.0


def auc(scores_pos: Sequence[float], scores_neg: Sequence[float]) -> float:
    """
    Mann-Whitney AUC = (승 + 0.5·동률) / (n_pos·n_neg)

    중간 순위 합으로 계산하므로 쌍 비교와 같은 값을 냅니다.

    Raises:
        UndefinedStatisticError: 한쪽 집합이 비어있는 경우
    """
    pos = np.asarray(scores_pos, dtype=float)
    neg = np.asarray(scores_neg, dtype=float)
    if pos.size == 0 or neg.size == 0:
        raise UndefinedStatisticError(
            "AUC는 양성/음성 집합이 모두 있어야 정의됩니다.",
            diagnostic={'n_pos': int(pos.size), 'n_neg': int(neg.size)},
        )
    ranks = rankdata(np.concatenate([pos, neg]), method='average')
    rank_sum = float(np.sum(ranks[:pos.size]))
    wins = rank_sum - pos.size * (pos.size + 1) / 2.0
    return wins / (pos.size * neg.size)


def auc_from_labels(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """이진 라벨로 나뉜 점수의 AUC (True = 양성)"""
    scores = np.asarray(scores, dtype=float)
    mask = np.asarray(labels, dtype=bool)
    return auc(scores[mask], scores[~mask])


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """
    피어슨 상관계수

    Raises:
        UndefinedStatisticError: 한쪽 분산이 0에 가까운 경우
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.dot(xc, xc)) / x.size
    syy = float(np.dot(yc, yc)) / y.size
    if sxx < VARIANCE_FLOOR or syy < VARIANCE_FLOOR:
        raise UndefinedStatisticError(
            "분산이 0에 가까워 상관계수를 정의할 수 없습니다.",
            diagnostic={'var_x': sxx, 'var_y': syy},
        )
    return float(np.dot(xc, yc) / math.sqrt(float(np.dot(xc, xc)) * float(np.dot(yc, yc))))
