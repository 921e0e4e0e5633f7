"""
회귀 기반 통계
잔차 편상관, 다중 편상관(증분 R²), IRLS 로지스틱 회귀, 단순 기울기를 제공합니다.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.stats import norm

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.analysis import INTERCEPT, AnalysisResult, DesignMatrix
from src.stats.descriptive import VARIANCE_FLOOR
from src.stats.resampling import bootstrap_distribution
from src.utils.errors import UndefinedStatisticError

R2_CEILING = 1.0 - 1e-12
IRLS_RIDGE = 1e-8
IRLS_TOLERANCE = 1e-8
IRLS_MAX_ITERATIONS = 100
SEPARATION_COEFFICIENT = 15.0


def _controls_matrix(controls: Optional[DesignMatrix], n: int) -> np.ndarray:
    if controls is None or not controls.names:
        return np.ones((n, 1))
    if controls.n != n:
        raise ValueError(f"통제 행렬 행 수({controls.n})가 데이터 행 수({n})와 다릅니다.")
    return controls.matrix()


def residualize(v: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """최소제곱으로 Z에 회귀한 잔차"""
    coef, *_ = np.linalg.lstsq(Z, v, rcond=None)
    return v - Z @ coef


def partial_correlation_value(x: np.ndarray, y: np.ndarray, Z: np.ndarray) -> float:
    """
    x, y를 각각 Z에 회귀한 잔차의 피어슨 상관

    Raises:
        UndefinedStatisticError: 잔차 분산이 1e-12 미만인 경우
    """
    rx = residualize(np.asarray(x, dtype=float), Z)
    ry = residualize(np.asarray(y, dtype=float), Z)
    var_x = float(np.dot(rx, rx)) / rx.size
    var_y = float(np.dot(ry, ry)) / ry.size
    if var_x < VARIANCE_FLOOR or var_y < VARIANCE_FLOOR:
        raise UndefinedStatisticError(
            "통제 변수로 잔차화한 뒤 분산이 남지 않습니다.",
            diagnostic={'residual_var_x': var_x, 'residual_var_y': var_y},
        )
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    return float(np.dot(rx, ry) / math.sqrt(float(np.dot(rx, rx)) * float(np.dot(ry, ry))))


def r_squared(y: np.ndarray, X: np.ndarray) -> float:
    """X(절편 포함)에 대한 y의 결정계수"""
    y = np.asarray(y, dtype=float)
    centered = y - y.mean()
    sst = float(np.dot(centered, centered))
    if sst / y.size < VARIANCE_FLOOR:
        raise UndefinedStatisticError("종속 변수 분산이 0입니다.", diagnostic={'sst': sst})
    resid = residualize(y, X)
    return 1.0 - float(np.dot(resid, resid)) / sst


def multi_partial_value(S: np.ndarray, y: np.ndarray, Z: np.ndarray) -> float:
    """
    sqrt((R²_full − R²_reduced) / (1 − R²_reduced))

    Raises:
        UndefinedStatisticError: R²_reduced ≥ 1 − 1e-12
    """
    r2_reduced = r_squared(y, Z)
    if r2_reduced >= R2_CEILING:
        raise UndefinedStatisticError(
            "통제 변수가 종속 변수를 완전히 설명합니다.",
            diagnostic={'r2_reduced': r2_reduced},
        )
    r2_full = r_squared(y, np.column_stack([Z, S]))
    ratio = (r2_full - r2_reduced) / (1.0 - r2_reduced)
    return math.sqrt(min(1.0, max(0.0, ratio)))


def _stack(x: np.ndarray, y: np.ndarray, Z: np.ndarray) -> np.ndarray:
    return np.column_stack([np.asarray(x, dtype=float).reshape(len(y), -1), np.asarray(y, dtype=float), Z])


def partial_correlation(x: Sequence[float], y: Sequence[float], controls: Optional[DesignMatrix] = None,
                        B: int = 2000, alpha: float = 0.05, seed: int = 0,
                        name: str = "partial_correlation", **result_fields) -> AnalysisResult:
    """
    통제 변수를 잔차화한 x, y의 편상관과 부트스트랩 신뢰구간

    Args:
        x: 독립 변수 열
        y: 종속 변수 열 (이진 DV는 0/1)
        controls: 통제 변수 설계 행렬 (None이면 절편만)
        B: 부트스트랩 재표본 수
        alpha: 유의수준
        seed: 부트스트랩 시드
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    Z = _controls_matrix(controls, n)
    control_names = controls.names if controls is not None else []
    if n <= Z.shape[1] + 1:
        raise UndefinedStatisticError(
            f"표본 수가 부족합니다 (n={n}, 통제 변수 {len(control_names)}개).",
            diagnostic={'n': n, 'controls': len(control_names)},
        )

    value = partial_correlation_value(x, y, Z)
    data = _stack(x, y, Z)

    def statistic(rows: np.ndarray) -> float:
        return partial_correlation_value(rows[:, 0], rows[:, 1], rows[:, 2:])

    boot = bootstrap_distribution(statistic, data, B=B, seed=seed)
    return AnalysisResult.with_ci(
        name, value, boot.interval(alpha), n,
        controls=list(control_names), **result_fields,
    )


def multi_partial_correlation(columns: Sequence[Sequence[float]], y: Sequence[float],
                              controls: Optional[DesignMatrix] = None, B: int = 2000,
                              alpha: float = 0.05, seed: int = 0,
                              name: str = "multi_partial_correlation", **result_fields) -> AnalysisResult:
    """
    변수 집합의 다중 편상관 (통제 변수 대비 증분 R² 비율의 제곱근, 항상 0 이상)

    Args:
        columns: 집합에 속한 열 목록 (비어있으면 안 됨)
    """
    if len(columns) == 0:
        raise ValueError("다중 편상관의 변수 집합이 비어있습니다.")
    y = np.asarray(y, dtype=float)
    n = y.size
    S = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    Z = _controls_matrix(controls, n)
    control_names = controls.names if controls is not None else []
    k = S.shape[1]
    if n <= Z.shape[1] + k + 1:
        raise UndefinedStatisticError(
            f"표본 수가 부족합니다 (n={n}, 변수 {k}개, 통제 변수 {len(control_names)}개).",
            diagnostic={'n': n, 'set_size': k, 'controls': len(control_names)},
        )

    value = multi_partial_value(S, y, Z)
    data = np.column_stack([S, y, Z])

    def statistic(rows: np.ndarray) -> float:
        return multi_partial_value(rows[:, :k], rows[:, k], rows[:, k + 1:])

    boot = bootstrap_distribution(statistic, data, B=B, seed=seed)
    result = AnalysisResult.with_ci(
        name, value, boot.interval(alpha), n,
        controls=list(control_names), **result_fields,
    )
    # 0 이상으로 정의되므로 유의성은 구간 하한이 0보다 큰지로 판단
    result.significant = result.ci_low > 0.0
    return result


@dataclass
class LogisticFit:
    """로지스틱 회귀 결과"""
    names: List[str]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    converged: bool
    iterations: int
    separated: bool
    log_likelihood: float
    n: int

    @property
    def z_values(self) -> np.ndarray:
        with np.errstate(divide='ignore', invalid='ignore'):
            return self.coefficients / self.standard_errors

    @property
    def p_values(self) -> np.ndarray:
        return 2.0 * norm.sf(np.abs(self.z_values))

    def wald_interval(self, alpha: float = 0.05) -> np.ndarray:
        """(k, 2) Wald 신뢰구간"""
        z = norm.ppf(1.0 - alpha / 2.0)
        return np.column_stack([self.coefficients - z * self.standard_errors,
                                self.coefficients + z * self.standard_errors])

    def as_dict(self) -> Dict[str, Dict[str, float]]:
        z_values = self.z_values
        p_values = self.p_values
        return {
            name: {
                'coefficient': float(self.coefficients[i]),
                'standard_error': float(self.standard_errors[i]),
                'z': float(z_values[i]),
                'p': float(p_values[i]),
            }
            for i, name in enumerate(self.names)
        }


def _expit(eta: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * eta))


def logistic_regression(X: DesignMatrix) -> LogisticFit:
    """
    IRLS 최대우도 로지스틱 회귀

    정규방정식에 1e-8 릿지 감쇠를 더하고, max|Δβ| < 1e-8 또는 100회 반복에서 멈춥니다.
    계수가 발산하거나 자료를 완전히 분리하면 separated=True 로 표시합니다.

    Raises:
        ValueError: y가 이진이 아니거나 n ≤ 열 수
    """
    y = X.y
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("로지스틱 회귀의 종속 변수는 0/1이어야 합니다.")
    A = X.matrix()
    n, k = A.shape
    if n <= k:
        raise ValueError(f"표본 수({n})가 열 수({k})보다 커야 합니다.")

    beta = np.zeros(k)
    ridge = IRLS_RIDGE * np.eye(k)
    converged = False
    iterations = 0
    for iterations in range(1, IRLS_MAX_ITERATIONS + 1):
        mu = _expit(A @ beta)
        w = mu * (1.0 - mu)
        hessian = (A * w[:, None]).T @ A + ridge
        gradient = A.T @ (y - mu)
        delta = np.linalg.solve(hessian, gradient)
        beta = beta + delta
        if np.max(np.abs(delta)) < IRLS_TOLERANCE:
            converged = True
            break

    mu = _expit(A @ beta)
    w = mu * (1.0 - mu)
    hessian = (A * w[:, None]).T @ A + ridge
    covariance = np.linalg.inv(hessian)
    standard_errors = np.sqrt(np.clip(np.diag(covariance), 0.0, None))

    eta = A @ beta
    perfectly_split = bool(np.all((eta > 0) == (y == 1.0)))
    separated = (not converged) or bool(np.max(np.abs(beta)) > SEPARATION_COEFFICIENT) or perfectly_split

    eps = 1e-300
    log_likelihood = float(np.sum(y * np.log(np.maximum(mu, eps)) + (1 - y) * np.log(np.maximum(1 - mu, eps))))
    return LogisticFit(
        names=[INTERCEPT] + X.names,
        coefficients=beta,
        standard_errors=standard_errors,
        converged=converged,
        iterations=iterations,
        separated=separated,
        log_likelihood=log_likelihood,
        n=n,
    )


def linear_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """단순 최소제곱 기울기"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    if sxx / max(1, x.size) < VARIANCE_FLOOR:
        raise UndefinedStatisticError("x 분산이 0이라 기울기를 정의할 수 없습니다.")
    return float(np.dot(xc, y - y.mean()) / sxx)
