"""
완성(completion) 요청/응답 모델과 선택지 분포
"""

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.question import OPTION_LABELS
from src.utils.errors import DegenerateDistributionError

PROBABILITY_TOLERANCE = 1e-9

TokenAlternatives = List[Tuple[str, float]]


class FinishReason(Enum):
    """완성 종료 사유"""
    STOP = "stop"
    LENGTH = "length"
    CONTENT_FILTER = "content_filter"
    OTHER = "other"

    @classmethod
    def parse(cls, value: Optional[str]) -> 'FinishReason':
        try:
            return cls(value)
        except ValueError:
            return cls.OTHER


class DistributionSource(Enum):
    """선택지 분포 출처"""
    LOGPROBS = "Logprobs"
    RESAMPLED = "Resampled"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class CompletionRequest:
    """시스템 + 사용자 프롬프트 하나로 구성된 완성 요청"""
    model_id: str
    system: str
    user: str
    temperature: float = 0.0
    max_output: int = 16
    want_top_logprobs: int = 0
    sample_index: int = 0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError(f"temperature는 음수일 수 없습니다: {self.temperature}")
        if self.max_output < 1:
            raise ValueError(f"max_output은 1 이상이어야 합니다: {self.max_output}")
        if self.want_top_logprobs < 0:
            raise ValueError(f"want_top_logprobs는 0 이상이어야 합니다: {self.want_top_logprobs}")

    def cache_key(self) -> str:
        """캐시 키 = hash(model_id, system, user, temperature, want_top_logprobs, sample_index)"""
        blob = json.dumps(
            {
                'model_id': self.model_id,
                'system': self.system,
                'user': self.user,
                'temperature': float(self.temperature),
                'want_top_logprobs': int(self.want_top_logprobs),
                'sample_index': int(self.sample_index),
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(blob.encode('utf-8')).hexdigest()

    def with_sample_index(self, sample_index: int) -> 'CompletionRequest':
        return CompletionRequest(
            model_id=self.model_id, system=self.system, user=self.user,
            temperature=self.temperature, max_output=self.max_output,
            want_top_logprobs=self.want_top_logprobs, sample_index=sample_index,
        )

    def with_user(self, user: str) -> 'CompletionRequest':
        return CompletionRequest(
            model_id=self.model_id, system=self.system, user=user,
            temperature=self.temperature, max_output=self.max_output,
            want_top_logprobs=self.want_top_logprobs, sample_index=self.sample_index,
        )


@dataclass(frozen=True)
class Completion:
    """모델 응답"""
    text: str
    top_logprobs: Optional[List[TokenAlternatives]] = None
    finish_reason: FinishReason = FinishReason.STOP

    def __post_init__(self):
        if self.top_logprobs is None:
            return
        normalized = []
        for alternatives in self.top_logprobs:
            for token, logprob in alternatives:
                if logprob > 0:
                    raise ValueError(f"log-probability는 0 이하여야 합니다: {token!r}={logprob}")
            # 토큰별 대안은 log-probability 내림차순으로 유지
            normalized.append(sorted(((str(t), float(lp)) for t, lp in alternatives), key=lambda x: -x[1]))
        object.__setattr__(self, 'top_logprobs', normalized)

    def to_record(self) -> Dict[str, Any]:
        return {
            'text': self.text,
            'top_logprobs': [[list(pair) for pair in alts] for alts in self.top_logprobs]
            if self.top_logprobs is not None else None,
            'finish_reason': self.finish_reason.value,
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> 'Completion':
        top = record.get('top_logprobs')
        return cls(
            text=record.get('text', ''),
            top_logprobs=[[(t, lp) for t, lp in alts] for alts in top] if top is not None else None,
            finish_reason=FinishReason.parse(record.get('finish_reason')),
        )


@dataclass(frozen=True)
class OptionDistribution:
    """라벨 집합 위의 정규화된 확률 분포"""
    probs: Dict[str, float]
    source: DistributionSource
    labels: Tuple[str, ...] = OPTION_LABELS

    def __post_init__(self):
        missing = [label for label in self.labels if label not in self.probs]
        if missing:
            raise DegenerateDistributionError(f"분포에 라벨이 빠져 있습니다: {missing}")
        extra = [label for label in self.probs if label not in self.labels]
        if extra:
            raise DegenerateDistributionError(f"분포에 알 수 없는 라벨이 있습니다: {extra}")
        if any(p < 0 or math.isnan(p) for p in self.probs.values()):
            raise DegenerateDistributionError(f"확률은 0 이상이어야 합니다: {self.probs}")
        total = math.fsum(self.probs.values())
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise DegenerateDistributionError(f"확률 합이 1이 아닙니다: {total}")
        # 라벨 순서로 고정
        object.__setattr__(self, 'probs', {label: float(self.probs[label]) for label in self.labels})

    @classmethod
    def from_masses(cls, masses: Dict[str, float], source: DistributionSource,
                    labels: Sequence[str] = OPTION_LABELS) -> 'OptionDistribution':
        """
        라벨별 질량을 정규화하여 분포를 만듭니다.

        Raises:
            DegenerateDistributionError: 총 질량이 0인 경우
        """
        labels = tuple(labels)
        total = math.fsum(max(0.0, masses.get(label, 0.0)) for label in labels)
        if total <= 0:
            raise DegenerateDistributionError("라벨에 할당된 확률 질량이 없습니다.")
        probs = {label: max(0.0, masses.get(label, 0.0)) / total for label in labels}
        # 부동소수 오차 보정: 가장 큰 질량에 잔차를 더함
        residual = 1.0 - math.fsum(probs.values())
        if residual:
            top = max(labels, key=lambda label: probs[label])
            probs[top] = max(0.0, probs[top] + residual)
        return cls(probs=probs, source=source, labels=labels)

    @classmethod
    def one_hot(cls, label: str, labels: Sequence[str] = OPTION_LABELS,
                source: DistributionSource = DistributionSource.DEGENERATE) -> 'OptionDistribution':
        labels = tuple(labels)
        if label not in labels:
            raise DegenerateDistributionError(f"알 수 없는 라벨: {label}")
        return cls(probs={l: (1.0 if l == label else 0.0) for l in labels}, source=source, labels=labels)

    def ranked(self) -> List[str]:
        """확률 내림차순 라벨 목록 (동률이면 앞 라벨 우선)"""
        order = {label: i for i, label in enumerate(self.labels)}
        return sorted(self.labels, key=lambda label: (-self.probs[label], order[label]))

    def top_label(self) -> str:
        return self.ranked()[0]

    def second_label(self) -> str:
        return self.ranked()[1]

    def top_probability(self) -> float:
        return self.probs[self.top_label()]

    def nonzero_count(self) -> int:
        return sum(1 for p in self.probs.values() if p > 0)

    def to_record(self) -> Dict[str, Any]:
        return {'probs': dict(self.probs), 'source': self.source.value, 'labels': list(self.labels)}

    @classmethod
    def from_record(cls, record: Optional[Dict[str, Any]]) -> Optional['OptionDistribution']:
        if record is None:
            return None
        return cls(
            probs={k: float(v) for k, v in record['probs'].items()},
            source=DistributionSource(record['source']),
            labels=tuple(record.get('labels', OPTION_LABELS)),
        )
