"""
부트스트랩 재표본 추출
각 재표본의 난수는 (seed, 재표본 번호)로만 결정됩니다.
"""

from dataclasses import dataclass
from typing import Any, Callable, Tuple

import numpy as np

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.utils.errors import UndefinedStatisticError

MIN_RESAMPLES = 100
MAX_UNDEFINED_FRACTION = 0.10


def resample_rng(seed: int, index: int) -> np.random.Generator:
    """재표본 번호별 독립 난수 생성기"""
    return np.random.default_rng([int(seed), int(index)])


def data_size(data: Any) -> int:
    if hasattr(data, 'n') and not isinstance(data, np.ndarray):
        return int(data.n)
    return len(data)


def take_rows(data: Any, rows: np.ndarray) -> Any:
    """데이터에서 행을 골라냅니다 (ndarray, take 를 가진 객체, 시퀀스)."""
    if isinstance(data, np.ndarray):
        return data[rows]
    if hasattr(data, 'take'):
        return data.take(rows)
    return [data[i] for i in rows]


@dataclass
class BootstrapDistribution:
    """재표본 통계량 분포"""
    values: np.ndarray
    undefined: int
    resamples: int

    def interval(self, alpha: float) -> Tuple[float, float]:
        """양측 백분위 구간"""
        low, high = np.quantile(self.values, [alpha / 2.0, 1.0 - alpha / 2.0])
        return float(low), float(high)

    def one_sided_lower(self, alpha: float) -> float:
        """단측 (1-alpha) 하한"""
        return float(np.quantile(self.values, alpha))

    def fraction_at_most(self, threshold: float) -> float:
        """threshold 이하인 재표본 비율 (단측 검정 p-값)"""
        return float(np.mean(self.values <= threshold))


def bootstrap_distribution(stat: Callable[[Any], float], data: Any, B: int = 2000,
                           seed: int = 0) -> BootstrapDistribution:
    """
    행 단위 복원 추출로 통계량 분포를 만듭니다.

    Args:
        stat: 재표본 데이터를 받아 실수를 돌려주는 함수
        data: 행 데이터 (ndarray, DesignMatrix, 시퀀스)
        B: 재표본 수 (100 이상)
        seed: 시드

    Raises:
        ValueError: B < 100 또는 빈 데이터
        UndefinedStatisticError: 재표본의 10% 초과에서 통계량이 정의되지 않는 경우
    """
    if B < MIN_RESAMPLES:
        raise ValueError(f"부트스트랩 재표본 수는 {MIN_RESAMPLES} 이상이어야 합니다: {B}")
    n = data_size(data)
    if n == 0:
        raise ValueError("빈 데이터는 부트스트랩할 수 없습니다.")

    values = []
    undefined = 0
    for b in range(B):
        rows = resample_rng(seed, b).integers(0, n, size=n)
        try:
            value = float(stat(take_rows(data, rows)))
        except UndefinedStatisticError:
            undefined += 1
            continue
        if not np.isfinite(value):
            undefined += 1
            continue
        values.append(value)

    if undefined > MAX_UNDEFINED_FRACTION * B:
        raise UndefinedStatisticError(
            f"부트스트랩 재표본 {B}개 중 {undefined}개에서 통계량이 정의되지 않았습니다.",
            diagnostic={'resamples': B, 'undefined': undefined, 'n': n},
        )
    return BootstrapDistribution(values=np.asarray(values, dtype=float), undefined=undefined, resamples=B)


def bootstrap_ci(stat: Callable[[Any], float], data: Any, B: int = 2000, alpha: float = 0.05,
                 seed: int = 0) -> Tuple[float, float]:
    """
    백분위 부트스트랩 신뢰구간

    Returns:
        (low, high)
    """
    return bootstrap_distribution(stat, data, B=B, seed=seed).interval(alpha)
