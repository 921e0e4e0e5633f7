"""
응답 파싱
선택지 라벨 추출, 거절 응답 탐지, 단답형 문자열 정규화
"""

import re
from enum import Enum
from typing import Iterable, Optional, Sequence

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.question import OPTION_LABELS
from src.provider.distributions import normalize_token

DEFAULT_REFUSAL_PATTERNS = (
    "i don't know",
    "i do not know",
    "cannot answer",
    "can't answer",
    "unable to answer",
    "i'm not able to",
    "no answer",
)

DEFAULT_AMBIGUOUS_PATTERNS = (
    "not sure",
    "uncertain",
    "it is unclear",
)

_SPACE_RE = re.compile(r'\s+')
_CURLY_QUOTES = str.maketrans({'’': "'", '‘': "'", '“': '"', '”': '"'})


class RefusalKind(Enum):
    """거절 판정"""
    NONE = "none"
    REFUSAL = "refusal"
    AMBIGUOUS = "ambiguous"


def _label_group(labels: Sequence[str]) -> str:
    return "|".join(re.escape(label) for label in labels)


def parse_option_label(text: str, labels: Sequence[str] = OPTION_LABELS) -> Optional[str]:
    """
    응답에서 선택지 라벨을 찾습니다.

    순서: 응답 전체가 라벨 하나 → "answer:/choice:" 뒤의 라벨 → 처음 나오는 독립된 대문자 라벨

    Examples:
        " b. " → "B", "Answer: B" → "B", "As an AI..." → None
    """
    if not text:
        return None
    labels = tuple(labels)

    whole = normalize_token(text)
    if whole in labels:
        return whole

    # 소문자 라벨은 응답 끝에 있을 때만 ("answer is a city" 오인 방지)
    lead = r'(?i:\b(?:answer|choice)\b)\s*(?:is)?\s*[:\-]?\s*[\(\[\*"\']*'
    explicit = re.search(rf'{lead}({_label_group(labels)})(?![A-Za-z])', text)
    if explicit:
        return explicit.group(1)
    lower = [label.lower() for label in labels]
    explicit = re.search(rf'{lead}({_label_group(lower)})[\)\]\*"\'.\s]*$', text)
    if explicit:
        return explicit.group(1).upper()

    standalone = re.search(rf'(?<![A-Za-z])({_label_group(labels)})(?![A-Za-z])', text)
    if standalone:
        return standalone.group(1)
    return None


def normalize_answer(text: str) -> str:
    """단답형 비교용: 소문자, 앞뒤 공백 제거, 공백 축약, 끝 마침표 제거"""
    text = _SPACE_RE.sub(' ', (text or '').translate(_CURLY_QUOTES)).strip().lower()
    return text.rstrip('.').strip()


def classify_refusal(text: str, patterns: Iterable[str] = DEFAULT_REFUSAL_PATTERNS,
                     ambiguous_patterns: Iterable[str] = DEFAULT_AMBIGUOUS_PATTERNS) -> RefusalKind:
    """
    거절 여부를 판정합니다.

    명확한 거절 문구는 REFUSAL, 얼버무림 문구는 AMBIGUOUS (판정 패널이 채점), 나머지는 NONE
    """
    lowered = normalize_answer(text)
    if not lowered:
        return RefusalKind.REFUSAL
    if any(p.lower() in lowered for p in patterns):
        return RefusalKind.REFUSAL
    if any(p.lower() in lowered for p in ambiguous_patterns):
        return RefusalKind.AMBIGUOUS
    return RefusalKind.NONE


def parse_yes_no(text: str) -> Optional[bool]:
    """판정 응답의 첫 단어가 YES/NO 이면 bool, 아니면 None (Invalid)"""
    words = (text or '').strip().split()
    if not words:
        return None
    first = normalize_token(words[0])
    if first == 'YES':
        return True
    if first == 'NO':
        return False
    return None
