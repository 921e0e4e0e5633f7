"""
문항 표면 특징
문항 길이, 비알파벳 문자 비율, 서술자 원-핫 지시 변수를 계산합니다.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.question import Question, SurfaceFeatures


@dataclass(frozen=True)
class DescriptorVocabulary:
    """
    서술자 키별 범주 목록 (정렬됨)

    각 키의 사전순 첫 범주가 기준 범주이며 지시 변수에서 빠집니다.
    """
    categories: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    @classmethod
    def from_questions(cls, questions: Iterable[Question]) -> 'DescriptorVocabulary':
        values: Dict[str, set] = {}
        for question in questions:
            for key, value in question.descriptors.items():
                values.setdefault(key, set()).add(value)
        return cls({key: tuple(sorted(values[key])) for key in sorted(values)})

    def reference_category(self, key: str) -> str:
        return self.categories[key][0]

    def indicator_names(self) -> List[str]:
        """지시 변수 열 이름 ("키=범주")"""
        return [f"{key}={category}"
                for key, categories in self.categories.items()
                for category in categories[1:]]

    def indicators(self, descriptors: Dict[str, str]) -> Tuple[int, ...]:
        """알 수 없는 값이나 기준 범주는 모두 0"""
        row: List[int] = []
        for key, categories in self.categories.items():
            value = descriptors.get(key)
            row.extend(1 if value == category else 0 for category in categories[1:])
        return tuple(row)

    def to_record(self) -> Dict[str, List[str]]:
        return {key: list(categories) for key, categories in self.categories.items()}


def pct_non_alpha(text: str) -> float:
    """공백이 아닌 문자 중 글자가 아닌 문자의 비율"""
    visible = [ch for ch in text if not ch.isspace()]
    if not visible:
        return 0.0
    return sum(1 for ch in visible if not ch.isalpha()) / len(visible)


def compute_surface_features(question: Question, vocabulary: DescriptorVocabulary) -> SurfaceFeatures:
    """
    결정적 표면 특징 벡터를 계산합니다.

    Examples:
        "abc!" → 길이 4, pct_non_alpha 0.25
    """
    return SurfaceFeatures(
        question_length=max(1, len(question.text)),
        pct_non_alpha=pct_non_alpha(question.text),
        descriptor_indicators=vocabulary.indicators(question.descriptors),
    )


def surface_feature_columns(questions: List[Question],
                            vocabulary: DescriptorVocabulary) -> Dict[str, List[float]]:
    """회귀 설계 행렬용 통제 변수 열 (문항 순서 유지)"""
    names = ['question_length', 'pct_non_alpha'] + vocabulary.indicator_names()
    columns: Dict[str, List[float]] = {name: [] for name in names}
    for question in questions:
        for name, value in zip(names, compute_surface_features(question, vocabulary).as_vector()):
            columns[name].append(value)
    return columns
