"""
기준 테스트, 판정, 유도 프로브 프롬프트 템플릿
템플릿 문자열이 바뀌면 버전도 올립니다 (캐시 키와 골든 테스트가 템플릿 바이트에 의존).
"""

from dataclasses import dataclass
from typing import Dict, Tuple

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.question import OPTION_LABELS, Question
from src.models.records import ElicitedKind

BASELINE_PROMPT_VERSION = "baseline-v1"
JUDGE_PROMPT_VERSION = "judge-v1"
ELICIT_PROMPT_VERSION = "elicit-v1"

OPTION_RULE = "----------"

PromptPair = Tuple[str, str]


def render_question(question: Question) -> str:
    """문항 블록 (객관식이면 선택지 포함)"""
    lines = ["Question:", question.text]
    if question.is_multiple_choice:
        lines.append(OPTION_RULE)
        lines.extend(f"{label}: {text}" for label, text in question.option_map().items())
        lines.append(OPTION_RULE)
    return "\n".join(lines)


def label_list(labels) -> str:
    """"A, B, C, or D" 형식"""
    labels = list(labels)
    if len(labels) == 1:
        return labels[0]
    return ", ".join(labels[:-1]) + f", or {labels[-1]}"


# 기준 능력 테스트
BASELINE_MC_SYSTEM = (
    "You are taking a multiple-choice test. Pick the option you think is correct. "
    "Output only the letter of your choice."
)
BASELINE_SA_SYSTEM = (
    "You are taking a short-answer test. Answer with a few words or a number. "
    "Output only your answer."
)
STRICT_MC_SUFFIX = "\nReply with exactly one letter ({labels}) and nothing else."
STRICT_SA_SUFFIX = "\nReply with only the answer itself, no explanation."


def build_baseline_prompt(question: Question, strict: bool = False) -> PromptPair:
    body = render_question(question)
    if question.is_multiple_choice:
        user = f"{body}\nYour answer ({label_list(OPTION_LABELS)}):"
        if strict:
            user += STRICT_MC_SUFFIX.format(labels=label_list(OPTION_LABELS))
        return BASELINE_MC_SYSTEM, user
    user = f"{body}\nYour answer:"
    if strict:
        user += STRICT_SA_SUFFIX
    return BASELINE_SA_SYSTEM, user


# 판정 패널
JUDGE_SYSTEM = (
    "You grade answers to quiz questions. Decide whether the candidate answer means the same thing "
    "as the reference answer. Reply with YES or NO only."
)
JUDGE_USER = (
    "Question:\n{question}\n\n"
    "Reference answer: {reference}\n"
    "Candidate answer: {response}\n\n"
    "Does the candidate answer match the reference answer? (YES or NO):"
)
JUDGE_MARKER = "Does the candidate answer match the reference answer?"


def build_judge_prompt(question_text: str, reference: str, response: str) -> PromptPair:
    return JUDGE_SYSTEM, JUDGE_USER.format(question=question_text, reference=reference, response=response)


# 유도 프로브: 구간 라벨, 구간 설명, 구간 중앙값
@dataclass(frozen=True)
class BinScale:
    """백분율 구간 척도"""
    labels: Tuple[str, ...]
    descriptions: Tuple[str, ...]
    midpoints: Tuple[float, ...]

    def midpoint_map(self) -> Dict[str, float]:
        return dict(zip(self.labels, self.midpoints))

    def bin_for(self, percent: float) -> str:
        """백분율이 속하는 구간 라벨 (중앙값 기준 가장 가까운 구간)"""
        return min(self.labels, key=lambda label: abs(self.midpoint_map()[label] - percent))


OBJECTIVE_SCALE = BinScale(
    labels=('A', 'B', 'C', 'D', 'E', 'F', 'G'),
    descriptions=('<5%', '5-10%', '10-20%', '20-40%', '40-60%', '60-80%', '>80%'),
    midpoints=(2.5, 7.5, 15.0, 30.0, 50.0, 70.0, 90.0),
)

SELF_CONFIDENCE_SCALE = BinScale(
    labels=('A', 'B', 'C', 'D', 'E', 'F', 'G', 'H'),
    descriptions=('<5%', '5-10%', '10-20%', '20-40%', '40-60%', '60-80%', '80-90%', '>90%'),
    midpoints=(2.5, 7.5, 15.0, 30.0, 50.0, 70.0, 85.0, 95.0),
)

ELICIT_OBJECTIVE_MARKER = "What share of college-educated adults would answer this question correctly?"
ELICIT_SELF_MARKER = "How likely is it that you would answer this question correctly?"

ELICIT_OBJECTIVE_SYSTEM = (
    "Help me rate how hard test questions are. I will show you a question, and you estimate roughly what "
    "percentage of college-educated adults would get it right. Answer only with the letter of the range "
    "you pick; do not output anything else."
)
ELICIT_SELF_SYSTEM = (
    "I will show you a test question, and you tell me how confident you are that you would answer it "
    "correctly. Answer only with the letter of the range you pick; do not output anything else."
)


def scale_for(kind: ElicitedKind) -> BinScale:
    return OBJECTIVE_SCALE if kind == ElicitedKind.OBJECTIVE_DIFFICULTY else SELF_CONFIDENCE_SCALE


def build_elicitation_prompt(question: Question, kind: ElicitedKind) -> PromptPair:
    scale = scale_for(kind)
    if kind == ElicitedKind.OBJECTIVE_DIFFICULTY:
        system, marker = ELICIT_OBJECTIVE_SYSTEM, ELICIT_OBJECTIVE_MARKER
    else:
        system, marker = ELICIT_SELF_SYSTEM, ELICIT_SELF_MARKER
    bins = "\n".join(f"{label}: {desc}" for label, desc in zip(scale.labels, scale.descriptions))
    user = (
        f"{render_question(question)}\n\n"
        f"{marker}\n\n"
        f"{bins}\n\n"
        f"Your choice ({label_list(scale.labels)}):"
    )
    return system, user
