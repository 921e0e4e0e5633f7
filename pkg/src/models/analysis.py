"""
분석 모델
설계 행렬, 분석 결과, 편향 입력, 분석 명세, 리포트를 정의합니다.
"""

from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.records import Decision

INTERCEPT = "intercept"


class StatisticKind(Enum):
    """분석 통계량 종류"""
    PARTIAL_CORRELATION = "partial_correlation"
    MULTI_PARTIAL_CORRELATION = "multi_partial_correlation"
    AUC = "auc"
    LOGISTIC = "logistic"
    RATE = "rate"
    BIAS = "bias"
    SLOPE = "slope"
    DIFFERENCE = "difference"


@dataclass
class DesignMatrix:
    """
    이름 붙은 회귀 변수와 종속 변수

    intercept 열은 항상 포함됩니다. 결측 행은 생성 시 제거되고
    dropped_rows 에 개수가 남습니다.
    """
    columns: "OrderedDict[str, np.ndarray]"
    y: np.ndarray
    dropped_rows: int = 0

    @classmethod
    def from_columns(cls, columns: Mapping[str, Sequence[Optional[float]]],
                     y: Sequence[Optional[float]]) -> 'DesignMatrix':
        """
        열 딕셔너리에서 설계 행렬을 만듭니다 (결측 행은 목록 단위로 삭제).

        Raises:
            ValueError: 열 이름 중복, 길이 불일치
        """
        names = list(columns.keys())
        if INTERCEPT in names:
            raise ValueError(f"'{INTERCEPT}'는 예약된 열 이름입니다.")
        if len(set(names)) != len(names):
            raise ValueError(f"열 이름이 중복되었습니다: {names}")

        y_arr = np.array([np.nan if v is None else float(v) for v in y], dtype=float)
        arrays = OrderedDict()
        for name in names:
            values = np.array([np.nan if v is None else float(v) for v in columns[name]], dtype=float)
            if values.shape != y_arr.shape:
                raise ValueError(f"열 '{name}' 길이({values.size})가 y 길이({y_arr.size})와 다릅니다.")
            arrays[name] = values

        keep = ~np.isnan(y_arr)
        for values in arrays.values():
            keep &= ~np.isnan(values)
        dropped = int((~keep).sum())
        return cls(
            columns=OrderedDict((name, values[keep]) for name, values in arrays.items()),
            y=y_arr[keep],
            dropped_rows=dropped,
        )

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def names(self) -> List[str]:
        return list(self.columns.keys())

    def matrix(self, names: Optional[Sequence[str]] = None) -> np.ndarray:
        """[intercept, names...] 행렬"""
        names = self.names if names is None else list(names)
        parts = [np.ones(self.n)] + [self.columns[name] for name in names]
        return np.column_stack(parts)

    def column(self, name: str) -> np.ndarray:
        return self.columns[name]

    def take(self, rows: np.ndarray) -> 'DesignMatrix':
        """행 인덱스로 부분 행렬을 만듭니다 (부트스트랩용)."""
        return DesignMatrix(
            columns=OrderedDict((name, values[rows]) for name, values in self.columns.items()),
            y=self.y[rows],
            dropped_rows=self.dropped_rows,
        )


@dataclass
class AnalysisResult:
    """부트스트랩 신뢰구간이 붙은 통계량 하나"""
    statistic_name: str
    value: float
    ci_low: float
    ci_high: float
    n: int
    controls: List[str] = field(default_factory=list)
    significant: bool = False
    model_id: str = ""
    dataset: str = ""
    details: Dict[str, Any] = field(default_factory=dict)
    input_hashes: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        # 백분위 구간이 점추정을 벗어나면 구간을 넓혀 ci_low <= value <= ci_high 를 유지
        self.ci_low = float(min(self.ci_low, self.value))
        self.ci_high = float(max(self.ci_high, self.value))
        self.value = float(self.value)

    @classmethod
    def with_ci(cls, statistic_name: str, value: float, interval, n: int, **kwargs) -> 'AnalysisResult':
        low, high = interval
        result = cls(statistic_name=statistic_name, value=value, ci_low=low, ci_high=high, n=n, **kwargs)
        result.significant = not (result.ci_low <= 0.0 <= result.ci_high)
        return result

    def to_record(self) -> Dict[str, Any]:
        return {
            'statistic_name': self.statistic_name,
            'model_id': self.model_id,
            'dataset': self.dataset,
            'value': self.value,
            'ci_low': self.ci_low,
            'ci_high': self.ci_high,
            'n': self.n,
            'controls': list(self.controls),
            'significant': self.significant,
            'details': dict(self.details),
            'input_hashes': dict(self.input_hashes),
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> 'AnalysisResult':
        return cls(
            statistic_name=record['statistic_name'],
            value=record['value'],
            ci_low=record['ci_low'],
            ci_high=record['ci_high'],
            n=record['n'],
            controls=list(record.get('controls', [])),
            significant=bool(record.get('significant', False)),
            model_id=record.get('model_id', ''),
            dataset=record.get('dataset', ''),
            details=dict(record.get('details', {})),
            input_hashes=dict(record.get('input_hashes', {})),
        )


@dataclass(frozen=True)
class BiasInputs:
    """편향 점수 입력 (시행 하나)"""
    decision: Decision
    baseline_correct: bool
    p: float
    t: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.t <= 1.0):
            raise ValueError(f"p, t는 [0,1] 범위여야 합니다: p={self.p}, t={self.t}")

    @property
    def m(self) -> float:
        return self.p - self.t


@dataclass(frozen=True)
class AnalysisSpec:
    """분석 하나의 명세"""
    name: str
    dataset: str
    model_id: str
    dv: str
    iv: List[str]
    controls: List[str]
    kind: StatisticKind

    def validate(self, available: Sequence[str]) -> None:
        missing = [c for c in [self.dv] + list(self.iv) + list(self.controls) if c not in available]
        if missing:
            raise ValueError(f"분석 '{self.name}'이 참조하는 열이 없습니다: {missing}")


@dataclass
class Report:
    """이름 붙은 결과 표와 입력 매니페스트"""
    tables: "OrderedDict[str, List[AnalysisResult]]" = field(default_factory=OrderedDict)
    manifests: List[Dict[str, Any]] = field(default_factory=list)
    matrices: "OrderedDict[str, List[Dict[str, Any]]]" = field(default_factory=OrderedDict)

    def add(self, table: str, result: AnalysisResult) -> None:
        self.tables.setdefault(table, []).append(result)

    def extend(self, table: str, results: Sequence[AnalysisResult]) -> None:
        for result in results:
            self.add(table, result)

    def is_empty(self) -> bool:
        return not any(self.tables.values()) and not any(self.matrices.values())
