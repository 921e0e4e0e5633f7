"""
선택지 분포 추출
토큰 log-probability 또는 재표본 빈도로 라벨 분포를 만듭니다.
"""

import math
import string
from collections import Counter
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.completion import Completion, CompletionRequest, DistributionSource, OptionDistribution
from src.models.question import OPTION_LABELS
from src.provider.base import Provider
from src.utils.errors import DegenerateDistributionError
from src.utils.logger import get_logger

RESAMPLE_TEMPERATURE = 1.0

logger = get_logger(__name__)


def normalize_token(token: str) -> str:
    """공백 제거, 앞뒤 구두점 제거, 대문자화"""
    return token.strip().strip(string.punctuation + string.whitespace).upper()


def _answer_position(completion: Completion, labels: Sequence[str]) -> Optional[int]:
    """최상위 대안이 라벨인 첫 위치, 없으면 라벨 대안이 있는 첫 위치"""
    positions = completion.top_logprobs or []
    for i, alternatives in enumerate(positions):
        if alternatives and normalize_token(alternatives[0][0]) in labels:
            return i
    for i, alternatives in enumerate(positions):
        if any(normalize_token(token) in labels for token, _ in alternatives):
            return i
    return None


def option_distribution_from_logprobs(completion: Completion,
                                      labels: Sequence[str] = OPTION_LABELS) -> OptionDistribution:
    """
    답 위치 토큰 대안의 확률 질량을 라벨별로 합쳐 정규화합니다.

    공백/대소문자 변형은 같은 라벨로 합치고, 라벨이 아닌 대안의 질량은 버린 뒤 재정규화합니다.

    Raises:
        DegenerateDistributionError: 라벨로 정규화되는 토큰이 없는 경우
    """
    labels = tuple(labels)
    if not completion.top_logprobs:
        raise DegenerateDistributionError("완성에 top_logprobs가 없습니다.")
    position = _answer_position(completion, labels)
    if position is None:
        raise DegenerateDistributionError(f"답 위치에서 라벨 {labels} 로 정규화되는 토큰이 없습니다.")

    masses = {label: 0.0 for label in labels}
    for token, logprob in completion.top_logprobs[position]:
        label = normalize_token(token)
        if label in masses:
            masses[label] += math.exp(logprob)
    return OptionDistribution.from_masses(masses, DistributionSource.LOGPROBS, labels)


@dataclass
class ResampledAnswers:
    """재표본 응답과 파싱된 라벨"""
    texts: List[str]
    labels: List[Optional[str]]

    @property
    def valid(self) -> List[str]:
        return [label for label in self.labels if label is not None]

    def modal_label(self) -> Optional[str]:
        """최빈 라벨 (동률이면 먼저 나온 라벨)"""
        valid = self.valid
        if not valid:
            return None
        counts = Counter(valid)
        best = max(counts.values())
        tied = [label for label in dict.fromkeys(valid) if counts[label] == best]
        if len(tied) > 1:
            logger.debug(f"최빈 라벨 동률 {tied}: 먼저 나온 {tied[0]} 선택")
        return tied[0]

    def distribution(self, labels: Sequence[str] = OPTION_LABELS) -> OptionDistribution:
        valid = self.valid
        if not valid:
            raise DegenerateDistributionError(f"재표본 {len(self.labels)}개가 모두 파싱되지 않았습니다.")
        counts = Counter(valid)
        return OptionDistribution.from_masses(
            {label: float(counts.get(label, 0)) for label in labels},
            DistributionSource.RESAMPLED,
            labels,
        )


def resample_answers(provider: Provider, request: CompletionRequest, n: int,
                     parser: Callable[[str], Optional[str]]) -> ResampledAnswers:
    """
    sample_index 0..n-1 로 독립 표본 n개를 얻습니다.

    Raises:
        ValueError: temperature != 1.0 또는 n < 1
    """
    if request.temperature != RESAMPLE_TEMPERATURE:
        raise ValueError(f"재표본 추출은 temperature {RESAMPLE_TEMPERATURE}에서만 합니다: {request.temperature}")
    if n < 1:
        raise ValueError(f"재표본 수는 1 이상이어야 합니다: {n}")
    texts, labels = [], []
    for i in range(n):
        completion = provider.complete(request.with_sample_index(i))
        texts.append(completion.text)
        labels.append(parser(completion.text))
    return ResampledAnswers(texts=texts, labels=labels)


def option_distribution_by_resampling(provider: Provider, request: CompletionRequest, n: int,
                                      parser: Callable[[str], Optional[str]],
                                      labels: Sequence[str] = OPTION_LABELS) -> OptionDistribution:
    """
    파싱된 라벨의 경험 빈도 분포 (파싱 실패 표본은 분모에서 제외)

    Raises:
        DegenerateDistributionError: 모든 표본이 파싱되지 않는 경우
    """
    return resample_answers(provider, request, n, parser).distribution(labels)
