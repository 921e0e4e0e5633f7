"""
파생 데이터셋 생성
단답형 → 객관식 (생성 모델로 오답 선택지 생성), 객관식 → 단답형 (정답 선택지 텍스트로 투영)
"""

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

# 프로젝트 루트를 Python 경로에 추가
import sys
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.dataset.loader import normalize_text
from src.models.question import OPTION_LABELS, Question, QuestionFormat, QuestionSet, QuestionSource
from src.provider.base import Provider
from src.utils.errors import DatasetError, ProviderError
from src.utils.logger import StructuredReport, get_logger
from src.utils.seeding import keyed_rng

DISTRACTOR_PROMPT_VERSION = "distractors-v1"
DISTRACTOR_COUNT = len(OPTION_LABELS) - 1

DISTRACTOR_SYSTEM = (
    "You write plausible but incorrect answer options for quiz questions. "
    "Reply with exactly three alternatives, one per line, with no numbering and no explanation."
)

DISTRACTOR_USER = (
    "Question: {question}\n"
    "Correct answer: {answer}\n"
    "Write three different answers that are plausible, of the same type and style as the correct answer, "
    "and definitely wrong."
)

_BULLET_RE = re.compile(r'^\s*(?:[-*•]|\(?\d+[.)]|\(?[A-Da-d][.)])\s*')

SOURCE_DERIVATIONS = {
    QuestionSource.SIMPLEQA: QuestionSource.SIMPLEMC,
    QuestionSource.GPQA: QuestionSource.GPSA,
}

logger = get_logger(__name__)


def parse_distractors(text: str) -> List[str]:
    """응답 줄에서 번호/글머리표를 떼고 빈 줄을 버립니다."""
    items = []
    for line in text.splitlines():
        item = _BULLET_RE.sub('', line).strip().strip('"').strip()
        if item:
            items.append(item)
    return items


@dataclass
class DerivationOutcome:
    """문항 하나의 파생 결과"""
    question_id: str
    question: Optional[Question] = None
    reason: Optional[str] = None
    attempts: int = 0
    distractors: List[str] = field(default_factory=list)


def _validate_distractors(reference: str, distractors: List[str]) -> Optional[str]:
    ref = normalize_text(reference)
    if any(normalize_text(d) == ref for d in distractors):
        return "distractor_equals_reference"
    if len({normalize_text(d) for d in distractors}) < DISTRACTOR_COUNT or len(distractors) < DISTRACTOR_COUNT:
        return "too_few_distinct_distractors"
    return None


def build_multiple_choice(question: Question, distractors: List[str], seed: int) -> Question:
    """정답과 오답 3개를 (seed, 문항 id) 로 섞어 객관식 문항을 만듭니다."""
    candidates = [question.reference_answer] + list(distractors[:DISTRACTOR_COUNT])
    order = keyed_rng(seed, 'derive_multiple_choice', question.id).permutation(len(candidates)).tolist()
    options = tuple(candidates[i] for i in order)
    derived = Question(
        id=question.id,
        text=question.text,
        format=QuestionFormat.MULTIPLE_CHOICE,
        reference_answer=OPTION_LABELS[order.index(0)],
        options=options,
        descriptors=dict(question.descriptors),
    )
    derived.validate()
    return derived


def _derive_one(question: Question, generator: Provider, seed: int, max_retries: int) -> DerivationOutcome:
    outcome = DerivationOutcome(question_id=question.id)
    request = generator.request(
        DISTRACTOR_SYSTEM,
        DISTRACTOR_USER.format(question=question.text, answer=question.reference_answer),
        temperature=0.0,
        max_output=128,
    )
    for attempt in range(max_retries + 1):
        outcome.attempts = attempt + 1
        try:
            completion = generator.complete(request)
        except ProviderError as e:
            outcome.reason = f"generator_failure: {e}"
            logger.warning(f"오답 생성 실패 ({question.id}, 시도 {attempt + 1}): {e}")
            continue

        distractors = parse_distractors(completion.text)[:DISTRACTOR_COUNT]
        outcome.distractors = distractors
        problem = _validate_distractors(question.reference_answer, distractors)
        if problem is None:
            outcome.question = build_multiple_choice(question, distractors, seed)
            outcome.reason = None
            return outcome
        outcome.reason = problem
        if problem == "distractor_equals_reference":
            return outcome
    return outcome


def derive_multiple_choice(question_set: QuestionSet, generator: Provider, seed: int,
                           report_path: Optional[Union[str, Path]] = None, max_retries: int = 2,
                           max_workers: int = 4, name: Optional[str] = None) -> QuestionSet:
    """
    단답형 집합에서 객관식 집합을 파생합니다.

    오답 생성이 실패하거나 정답과 같은 오답이 나온 문항은 제외되고 파생 리포트에 기록됩니다.
    생성 호출은 동시에 실행되지만 결과는 입력 순서를 따릅니다.

    Raises:
        DatasetError: 입력이 단답형이 아니거나 살아남은 문항이 없는 경우
    """
    if question_set.format != QuestionFormat.SHORT_ANSWER:
        raise DatasetError(f"derive_multiple_choice 입력은 단답형이어야 합니다: {question_set.name}")

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        outcomes = list(pool.map(lambda q: _derive_one(q, generator, seed, max_retries), question_set.questions))

    report = StructuredReport(Path(report_path), 'derivation') if report_path else None
    try:
        derived: List[Question] = []
        for outcome in outcomes:
            if outcome.question is not None:
                derived.append(outcome.question)
                if report:
                    report.record("derived", question_id=outcome.question_id, attempts=outcome.attempts,
                                  reference_label=outcome.question.reference_answer)
            else:
                logger.warning(f"파생 제외: {outcome.question_id} ({outcome.reason})")
                if report:
                    report.record("dropped", question_id=outcome.question_id, attempts=outcome.attempts,
                                  reason=outcome.reason, distractors=outcome.distractors)
        if report:
            report.record("summary", generator=generator.model_id, prompt_version=DISTRACTOR_PROMPT_VERSION,
                          seed=seed, derived=len(derived), dropped=len(outcomes) - len(derived))
    finally:
        if report:
            report.close()

    if not derived:
        raise DatasetError(f"'{question_set.name}'에서 파생된 객관식 문항이 없습니다.")
    source = SOURCE_DERIVATIONS.get(question_set.source, QuestionSource.SIMPLEMC)
    logger.info(f"객관식 파생 완료: {len(derived)}/{len(question_set)}문항 → {source.value}")
    return QuestionSet(name=name or source.value.lower(), source=source, questions=derived)


def derive_short_answer(question_set: QuestionSet, name: Optional[str] = None) -> QuestionSet:
    """
    객관식 집합에서 선택지를 없애고 정답을 정답 선택지의 전체 텍스트로 바꿉니다.

    Raises:
        DatasetError: 입력이 객관식이 아닌 경우
    """
    if question_set.format != QuestionFormat.MULTIPLE_CHOICE:
        raise DatasetError(f"derive_short_answer 입력은 객관식이어야 합니다: {question_set.name}")

    questions = [
        Question(
            id=q.id,
            text=q.text,
            format=QuestionFormat.SHORT_ANSWER,
            reference_answer=q.correct_option_text().strip(),
            descriptors=dict(q.descriptors),
        )
        for q in question_set
    ]
    source = SOURCE_DERIVATIONS.get(question_set.source, QuestionSource.GPSA)
    return QuestionSet(name=name or source.value.lower(), source=source, questions=questions)
