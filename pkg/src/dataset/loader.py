"""
문항 집합 로더
JSONL 문항 파일을 읽고 검증하며, 수집(ingest) 단계의 품질 필터를 적용합니다.
"""

import json
import re
from pathlib import Path
from typing import List, Optional, Tuple, Union

# 프로젝트 루트를 Python 경로에 추가
import sys
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.question import Question, QuestionSet, QuestionSource
from src.utils.errors import DatasetError
from src.utils.logger import StructuredReport, get_logger
from src.utils.records import write_jsonl

logger = get_logger(__name__)

_SPACE_RE = re.compile(r'\s+')


def normalize_text(text: str) -> str:
    """비교용 정규화: 소문자, 공백 축약, 앞뒤 공백 제거"""
    return _SPACE_RE.sub(' ', text).strip().lower()


def load_question_set(path: Union[str, Path], expected_source: QuestionSource,
                      name: Optional[str] = None) -> QuestionSet:
    """
    JSONL 문항 파일을 읽어 검증된 QuestionSet을 만듭니다.

    Args:
        path: 문항 파일 경로
        expected_source: 기대하는 데이터셋 출처 (형식 검사에 사용)
        name: 집합 이름 (없으면 파일 이름)

    Raises:
        DatasetError: 파일 없음, JSON 파싱 오류(줄 번호 포함), 불변식 위반(문항 id 포함)
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"문항 파일이 없습니다: {path}")

    questions: List[Question] = []
    seen = set()
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"{path.name} {line_number}번째 줄: JSON 파싱 오류 - {e.msg}", line_number)
            if not isinstance(record, dict):
                raise DatasetError(f"{path.name} {line_number}번째 줄: 객체가 아닌 레코드", line_number)

            question = Question.from_record(record, line_number)
            if question.format != expected_source.expected_format:
                raise DatasetError(
                    f"문항 {question.id}: {expected_source.value} 데이터셋은 {expected_source.expected_format.value} "
                    f"형식이어야 합니다 (현재 {question.format.value}).",
                    line_number, question.id,
                )
            if question.id in seen:
                raise DatasetError(f"문항 {question.id}: 중복 id ({line_number}번째 줄)", line_number, question.id)
            seen.add(question.id)
            questions.append(question)

    if not questions:
        raise DatasetError(f"문항 파일이 비어있습니다: {path}")

    question_set = QuestionSet(name=name or path.stem, source=expected_source, questions=questions)
    logger.info(f"문항 집합 로드: {question_set.name} ({len(question_set)}문항, {expected_source.value})")
    return question_set


def _reference_problem(question: Question) -> Optional[str]:
    if question.is_multiple_choice:
        return None
    if not re.search(r'\w', question.reference_answer):
        return "unparseable_reference"
    return None


def quality_filter(question_set: QuestionSet,
                   report: Optional[StructuredReport] = None) -> Tuple[QuestionSet, List[Tuple[str, str]]]:
    """
    가벼운 품질 필터: 빈 문항 텍스트, 해석할 수 없는 정답, 중복 문항 텍스트를 제거합니다.

    Returns:
        (필터링된 집합, [(문항 id, 제거 사유)])
    """
    kept: List[Question] = []
    dropped: List[Tuple[str, str]] = []
    seen_texts = set()

    for question in question_set:
        normalized = normalize_text(question.text)
        reason = None
        if not normalized:
            reason = "empty_text"
        else:
            reason = _reference_problem(question)
            if reason is None and normalized in seen_texts:
                reason = "duplicate_text"

        if reason:
            dropped.append((question.id, reason))
            logger.warning(f"문항 제외: {question.id} ({reason})")
            if report is not None:
                report.record("dropped", question_id=question.id, reason=reason, dataset=question_set.name)
            continue
        seen_texts.add(normalized)
        kept.append(question)

    if not kept:
        raise DatasetError(f"문항 집합 '{question_set.name}'의 모든 문항이 품질 필터에서 제외되었습니다.")

    if report is not None:
        report.record("summary", dataset=question_set.name, kept=len(kept), dropped=len(dropped))
    return QuestionSet(name=question_set.name, source=question_set.source, questions=kept), dropped


def save_question_set(question_set: QuestionSet, path: Union[str, Path]) -> Tuple[str, int]:
    """
    문항 집합을 JSONL로 저장합니다.

    Returns:
        (sha256, 문항 수)
    """
    return write_jsonl(path, (q.to_record() for q in question_set))
