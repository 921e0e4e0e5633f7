"""
가설 검정: 윌콕슨 부호 순위 검정, 정확 이항 검정
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.stats import norm, rankdata

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.utils.errors import UndefinedStatisticError

WILCOXON_MIN_NONZERO = 5
WILCOXON_EXACT_MAX_N = 25
BINOMIAL_EXACT_MAX_N = 1000


@dataclass(frozen=True)
class WilcoxonResult:
    """윌콕슨 부호 순위 검정 결과"""
    statistic: float        # 양의 차이 순위 합 W+
    n: int                  # 0이 아닌 차이 수
    p_greater: float        # H1: 차이 > 0
    p_less: float           # H1: 차이 < 0
    p_two_sided: float
    method: str             # exact 또는 normal


def _differences(pairs: Sequence[Union[float, Tuple[float, float]]]) -> np.ndarray:
    values = []
    for item in pairs:
        if isinstance(item, (tuple, list)):
            a, b = item
            values.append(float(a) - float(b))
        else:
            values.append(float(item))
    return np.asarray(values, dtype=float)


def _exact_tails(doubled_ranks: np.ndarray, observed: int) -> Tuple[float, float]:
    """두 배 중간 순위의 부분합 분포를 동적 계획법으로 세어 (P[W≥w], P[W≤w])를 구합니다."""
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in doubled_ranks.astype(int):
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    patterns = 2 ** len(doubled_ranks)
    upper = sum(int(c) for c in counts[observed:])
    lower = sum(int(c) for c in counts[:observed + 1])
    return upper / patterns, lower / patterns


def wilcoxon_signed_rank(pairs: Sequence[Union[float, Tuple[float, float]]]) -> WilcoxonResult:
    """
    쌍체 윌콕슨 부호 순위 검정

    차이가 0인 쌍은 버리고 |차이|에 중간 순위를 매깁니다. n ≤ 25 이면 정확 분포,
    그보다 크면 동률 보정 정규 근사를 사용합니다.

    Args:
        pairs: (a, b) 쌍 또는 차이 a − b 의 목록

    Raises:
        UndefinedStatisticError: 0이 아닌 차이가 5개 미만인 경우
    """
    diffs = _differences(pairs)
    diffs = diffs[diffs != 0.0]
    n = int(diffs.size)
    if n < WILCOXON_MIN_NONZERO:
        raise UndefinedStatisticError(
            f"0이 아닌 차이가 {n}개뿐입니다 (최소 {WILCOXON_MIN_NONZERO}개).",
            diagnostic={'nonzero_differences': n},
        )

    ranks = rankdata(np.abs(diffs), method='average')
    w_plus = float(ranks[diffs > 0].sum())

    if n <= WILCOXON_EXACT_MAX_N:
        doubled = np.rint(2.0 * ranks).astype(int)
        observed = int(round(2.0 * w_plus))
        p_greater, p_less = _exact_tails(doubled, observed)
        method = 'exact'
    else:
        mean = n * (n + 1) / 4.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / 48.0
        variance = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
        z = (w_plus - mean) / math.sqrt(variance)
        p_greater = float(norm.sf(z))
        p_less = float(norm.cdf(z))
        method = 'normal'

    p_two_sided = min(1.0, 2.0 * min(p_greater, p_less))
    return WilcoxonResult(
        statistic=w_plus, n=n, p_greater=p_greater, p_less=p_less,
        p_two_sided=p_two_sided, method=method,
    )


def binomial_test(successes: int, n: int, p0: float) -> float:
    """
    단측 정확 이항 검정 P[X ≥ successes], X ~ Binomial(n, p0)

    Raises:
        ValueError: 0 ≤ successes ≤ n 또는 0 ≤ p0 ≤ 1 위반
    """
    if not 0 <= successes <= n:
        raise ValueError(f"0 ≤ successes ≤ n 이어야 합니다: successes={successes}, n={n}")
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"p0는 [0,1] 범위여야 합니다: {p0}")
    if successes == 0:
        return 1.0
    if p0 == 0.0:
        return 0.0
    if p0 == 1.0:
        return 1.0

    if n <= BINOMIAL_EXACT_MAX_N:
        terms = [math.comb(n, k) * p0 ** k * (1.0 - p0) ** (n - k) for k in range(successes, n + 1)]
    else:
        log_p, log_q = math.log(p0), math.log1p(-p0)
        terms = [
            math.exp(math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) + k * log_p + (n - k) * log_q)
            for k in range(successes, n + 1)
        ]
    return min(1.0, math.fsum(terms))
