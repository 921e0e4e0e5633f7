"""
문항 모델
데이터셋 문항, 문항 집합, 표면 특징을 정의합니다.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.utils.errors import DatasetError

OPTION_LABELS: Tuple[str, ...] = ('A', 'B', 'C', 'D')
SCHEMA_VERSION = 1


class QuestionFormat(Enum):
    """응답 형식"""
    MULTIPLE_CHOICE = "MultipleChoice"
    SHORT_ANSWER = "ShortAnswer"


class QuestionSource(Enum):
    """데이터셋 출처"""
    GPQA = "GPQA"
    GPSA = "GPSA"
    SIMPLEQA = "SimpleQA"
    SIMPLEMC = "SimpleMC"

    @property
    def expected_format(self) -> QuestionFormat:
        if self in (QuestionSource.GPQA, QuestionSource.SIMPLEMC):
            return QuestionFormat.MULTIPLE_CHOICE
        return QuestionFormat.SHORT_ANSWER


@dataclass(frozen=True)
class Question:
    """시험 문항 하나"""
    id: str
    text: str
    format: QuestionFormat
    reference_answer: str
    options: Optional[Tuple[str, ...]] = None
    descriptors: Dict[str, str] = field(default_factory=dict)

    @property
    def is_multiple_choice(self) -> bool:
        return self.format == QuestionFormat.MULTIPLE_CHOICE

    def option_map(self) -> Dict[str, str]:
        """라벨 → 선택지 텍스트"""
        if not self.options:
            return {}
        return dict(zip(OPTION_LABELS, self.options))

    def correct_option_text(self) -> str:
        """정답 선택지의 전체 텍스트"""
        return self.option_map()[self.reference_answer]

    def validate(self) -> None:
        """
        문항 불변식을 검사합니다.

        Raises:
            DatasetError: 불변식 위반 (문항 id 포함)
        """
        if not self.id:
            raise DatasetError("문항 id가 비어있습니다.")
        if self.is_multiple_choice:
            if self.options is None or len(self.options) != len(OPTION_LABELS):
                count = 0 if self.options is None else len(self.options)
                raise DatasetError(
                    f"문항 {self.id}: 객관식 문항은 선택지가 정확히 4개여야 합니다 (현재 {count}개).",
                    question_id=self.id,
                )
            if self.reference_answer not in OPTION_LABELS:
                raise DatasetError(
                    f"문항 {self.id}: 정답 라벨 '{self.reference_answer}'가 A-D가 아닙니다.",
                    question_id=self.id,
                )
        else:
            if self.options is not None:
                raise DatasetError(f"문항 {self.id}: 단답형 문항에는 선택지가 없어야 합니다.", question_id=self.id)
            if not self.reference_answer or not self.reference_answer.strip():
                raise DatasetError(f"문항 {self.id}: 단답형 정답이 비어있습니다.", question_id=self.id)

    def to_record(self) -> Dict[str, Any]:
        """JSONL 레코드로 변환합니다."""
        record: Dict[str, Any] = {
            'schema_version': SCHEMA_VERSION,
            'id': self.id,
            'text': self.text,
            'format': self.format.value,
            'reference_answer': self.reference_answer,
            'descriptors': dict(self.descriptors),
        }
        if self.options is not None:
            record['options'] = self.option_map()
        return record

    @classmethod
    def from_record(cls, record: Dict[str, Any], line_number: Optional[int] = None) -> 'Question':
        """
        JSONL 레코드에서 문항을 만듭니다.

        Raises:
            DatasetError: 스키마 불일치 또는 불변식 위반
        """
        question_id = str(record.get('id', '')).strip()
        where = f"{line_number}번째 줄" if line_number is not None else "레코드"

        version = record.get('schema_version', SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise DatasetError(f"{where}: 지원하지 않는 schema_version {version}", line_number, question_id or None)

        for key in ('id', 'text', 'format', 'reference_answer'):
            if key not in record:
                raise DatasetError(f"{where}: 필수 필드 '{key}'가 없습니다 (문항 {question_id or '?'}).",
                                   line_number, question_id or None)
        try:
            fmt = QuestionFormat(record['format'])
        except ValueError:
            raise DatasetError(f"{where}: 알 수 없는 format '{record['format']}' (문항 {question_id}).",
                               line_number, question_id)

        options = None
        raw_options = record.get('options')
        if raw_options is not None:
            if isinstance(raw_options, dict):
                labels = list(raw_options.keys())
                if sorted(labels) != list(OPTION_LABELS) or len(labels) != len(OPTION_LABELS):
                    raise DatasetError(
                        f"문항 {question_id}: 선택지 라벨은 A, B, C, D여야 합니다 (현재 {labels}).",
                        line_number, question_id,
                    )
                options = tuple(str(raw_options[label]) for label in OPTION_LABELS)
            elif isinstance(raw_options, list):
                options = tuple(str(option) for option in raw_options)
            else:
                raise DatasetError(f"문항 {question_id}: options 형식이 잘못되었습니다.", line_number, question_id)

        descriptors = record.get('descriptors') or {}
        if not isinstance(descriptors, dict):
            raise DatasetError(f"문항 {question_id}: descriptors는 객체여야 합니다.", line_number, question_id)

        question = cls(
            id=question_id,
            text=str(record['text']),
            format=fmt,
            reference_answer=str(record['reference_answer']).strip(),
            options=options,
            descriptors={str(k): str(v) for k, v in descriptors.items()},
        )
        try:
            question.validate()
        except DatasetError as e:
            raise DatasetError(str(e), line_number, question_id)
        return question


@dataclass(frozen=True)
class SurfaceFeatures:
    """문항 표면 특징 (난이도 단서 통제 변수)"""
    question_length: int
    pct_non_alpha: float
    descriptor_indicators: Tuple[int, ...] = ()

    def as_vector(self) -> List[float]:
        return [float(self.question_length), float(self.pct_non_alpha)] + [float(v) for v in self.descriptor_indicators]


@dataclass
class QuestionSet:
    """같은 형식의 문항 집합"""
    name: str
    source: QuestionSource
    questions: List[Question]

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """집합 불변식: 비어있지 않음, 단일 형식, 고유 id"""
        if not self.questions:
            raise DatasetError(f"문항 집합 '{self.name}'이 비어있습니다.")
        formats = {q.format for q in self.questions}
        if len(formats) != 1:
            raise DatasetError(f"문항 집합 '{self.name}'에 여러 형식이 섞여 있습니다: {sorted(f.value for f in formats)}")
        seen = set()
        for question in self.questions:
            if question.id in seen:
                raise DatasetError(f"문항 집합 '{self.name}'에 중복 id가 있습니다: {question.id}", question_id=question.id)
            seen.add(question.id)

    @property
    def format(self) -> QuestionFormat:
        return self.questions[0].format

    def __len__(self) -> int:
        return len(self.questions)

    def __iter__(self):
        return iter(self.questions)

    def by_id(self) -> Dict[str, Question]:
        return {q.id: q for q in self.questions}

    def ids(self) -> List[str]:
        return [q.id for q in self.questions]
