"""
채점
객관식 라벨 비교와 단답형 판정 패널 (3명 중 2명 이상 일치)
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.baseline.parsing import normalize_answer, parse_yes_no
from src.baseline.prompts import build_judge_prompt
from src.models.question import OPTION_LABELS
from src.models.records import JudgeVerdict
from src.provider.base import Provider
from src.utils.errors import ConfigError, ProviderError
from src.utils.logger import get_logger

PANEL_SIZE = 3
CONSENSUS_MIN = 2

logger = get_logger(__name__)


def score_mc(chosen_label: str, reference_answer: str) -> bool:
    """
    객관식 채점

    Raises:
        ValueError: 라벨이 A-D가 아닌 경우
    """
    for label in (chosen_label, reference_answer):
        if label not in OPTION_LABELS:
            raise ValueError(f"선택지 라벨이 아닙니다: {label!r}")
    return chosen_label == reference_answer


def consensus(verdicts: Sequence[JudgeVerdict]) -> Optional[bool]:
    """유효하고 같은 판정이 2개 이상이면 그 값, 아니면 None (제외)"""
    valid = [v.matches for v in verdicts if v.is_valid]
    if valid.count(True) >= CONSENSUS_MIN:
        return True
    if valid.count(False) >= CONSENSUS_MIN:
        return False
    return None


@dataclass
class ShortAnswerScore:
    """단답형 채점 결과"""
    is_correct: Optional[bool]
    excluded: bool
    verdicts: List[JudgeVerdict] = field(default_factory=list)
    exact_match: bool = False

    @property
    def exclusion_reason(self) -> Optional[str]:
        return "no_judge_consensus" if self.excluded else None


class JudgePanel:
    """평가 대상과 다른 계열의 판정 모델 3개로 이루어진 패널"""

    def __init__(self, judges: Sequence[Provider], evaluated_family: str):
        self.judges = list(judges)
        self.evaluated_family = evaluated_family
        self._validate()

    def _validate(self):
        errors = []
        if len(self.judges) != PANEL_SIZE:
            errors.append(f"판정 패널은 정확히 {PANEL_SIZE}개 모델이어야 합니다 (현재 {len(self.judges)}개).")
        same = [j.name for j in self.judges if j.family == self.evaluated_family]
        if same:
            errors.append(f"평가 대상과 같은 계열({self.evaluated_family})의 판정 모델: {same}")
        if errors:
            raise ConfigError("판정 패널 설정 오류:\n" + "\n".join(f"- {e}" for e in errors))

    def _ask(self, judge: Provider, question_text: str, reference: str, response: str) -> JudgeVerdict:
        system, user = build_judge_prompt(question_text, reference, response)
        try:
            completion = judge.complete(judge.request(system, user, temperature=0.0, max_output=4))
        except ProviderError as e:
            logger.warning(f"판정 모델 {judge.name} 호출 실패, Invalid 처리: {e}")
            return JudgeVerdict(judge_model=judge.model_id, matches=None)
        return JudgeVerdict(judge_model=judge.model_id, matches=parse_yes_no(completion.text))

    def verdicts(self, question_text: str, reference: str, response: str) -> List[JudgeVerdict]:
        """판정 3개를 동시에 받습니다 (결과는 패널 순서)."""
        with ThreadPoolExecutor(max_workers=PANEL_SIZE) as pool:
            futures = [pool.submit(self._ask, judge, question_text, reference, response) for judge in self.judges]
            return [f.result() for f in futures]


def score_short_answer(response: str, reference: str, panel: Optional[JudgePanel],
                       question_text: str = "") -> ShortAnswerScore:
    """
    단답형 채점

    정규화된 문자열이 같으면 판정 모델을 부르지 않고 정답 처리합니다.
    그 외에는 패널 판정 중 유효하고 같은 값이 2개 이상일 때만 채택하고, 아니면 제외합니다.

    Raises:
        ConfigError: 정확 일치가 아닌데 패널이 없는 경우
    """
    if normalize_answer(response) == normalize_answer(reference):
        return ShortAnswerScore(is_correct=True, excluded=False, exact_match=True)
    if panel is None:
        raise ConfigError("단답형 채점에는 판정 패널이 필요합니다.", hint="baseline.judges 를 설정하세요.")

    verdicts = panel.verdicts(question_text, reference, response)
    result = consensus(verdicts)
    return ShortAnswerScore(is_correct=result, excluded=result is None, verdicts=verdicts)
