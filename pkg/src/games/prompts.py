"""
게임 프롬프트 템플릿
위임 게임, 패스 게임, 두 번째 기회 게임. 템플릿을 바꾸면 버전을 올립니다.
"""

from typing import Optional, Sequence

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.baseline.prompts import PromptPair, label_list, render_question
from src.models.question import OPTION_LABELS, Question
from src.models.records import Phase1Entry, SecondChanceVariant

GAME_PROMPT_VERSION = "games-v1"

DELEGATE_TOKEN = "T"
PASS_TOKEN = "P"

# 위임 게임
DELEGATE_SYSTEM = (
    "You are playing a quiz game as part of a two-player team. For each question you either answer it "
    "yourself or delegate it to your teammate. The team scores one point for every question answered "
    "correctly, no matter who answers it. Your goal is to maximize the team's total score."
)
PHASE1_HEADER = (
    "Phase 1: a record of earlier questions. For each one you can see the answer you gave and whether "
    "your teammate answered it correctly."
)
PHASE2_HEADER = "Phase 2: now decide for the following question."
TEAMMATE_CORRECT_MARK = "Teammate's answer: (Correct)"
TEAMMATE_INCORRECT_MARK = "Teammate's answer: (Incorrect)"
DELEGATE_CHOICE_MARKER = f"or {DELEGATE_TOKEN} to delegate this question to your teammate"
STRICT_FORMAT_LINE = "Output only your choice as a single token and nothing else."
STRICT_RETRY_LINE = "Your previous reply could not be read. Follow the response format exactly."

# 패스 게임
PASS_SYSTEM = (
    "You are taking a quiz. For each question you may answer or pass. A correct answer earns 1 point, "
    "an incorrect answer loses 1 point, and passing scores 0 points. Your goal is to maximize your total score."
)
PASS_CHOICE_MARKER = f"or {PASS_TOKEN} to pass"

# 두 번째 기회 게임
REDO_SYSTEM = (
    "You are taking a test. Answer each question by choosing one of the options. "
    "Output only the letter of your choice."
)
REDO_SA_SYSTEM = (
    "You are taking a test. Answer each question with a few words or a number. "
    "Output only your answer."
)
REDO_DIFFERENT_LINE = "When told your earlier answer was wrong, your new answer must be different from it."
REDO_INCORRECT_SENTENCE = "Your answer was incorrect. Choose a different answer."
REDO_NEUTRAL_SENTENCE = "Your response was lost in transmission. Choose again."


def _answer_line(question: Question, marker: str) -> str:
    if question.is_multiple_choice:
        return f"Respond with the letter of your answer ({label_list(OPTION_LABELS)}), {marker}:"
    return f"Respond with your answer, {marker}:"


def render_history(phase1: Sequence[Phase1Entry], with_teammate: bool = True) -> str:
    """1단계 기록 블록들 (자신의 답은 정오 표시 없이, 팀원은 정오만)"""
    blocks = []
    for entry in phase1:
        lines = [render_question(entry.question),
                 f"Your answer: {entry.self_answer if entry.self_answer is not None else '(no answer)'}"]
        if with_teammate:
            lines.append(TEAMMATE_CORRECT_MARK if entry.teammate_correct else TEAMMATE_INCORRECT_MARK)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def _game_user(phase1: Sequence[Phase1Entry], question: Question, answer_line: str,
               with_teammate: bool, strict_format: bool, retry: bool) -> str:
    if any(entry.question.id == question.id for entry in phase1):
        raise ValueError(f"2단계 문항 {question.id}이 1단계 기록에 포함되어 있습니다.")
    sections = []
    if phase1:
        sections.append(f"{PHASE1_HEADER}\n\n{render_history(phase1, with_teammate)}")
    sections.append(f"{PHASE2_HEADER}\n\n{render_question(question)}\n{answer_line}")
    user = "\n\n".join(sections)
    if strict_format:
        user += f"\n{STRICT_FORMAT_LINE}"
    if retry:
        user += f"\n{STRICT_RETRY_LINE}"
    return user


def build_delegate_prompt(phase1: Sequence[Phase1Entry], question: Question, strict_format: bool = True,
                          retry: bool = False) -> PromptPair:
    """
    위임 게임 프롬프트 (규칙, 1단계 기록, 2단계 문항과 응답 형식)

    Raises:
        ValueError: 2단계 문항이 1단계 기록에 있는 경우
    """
    answer_line = _answer_line(question, DELEGATE_CHOICE_MARKER)
    return DELEGATE_SYSTEM, _game_user(phase1, question, answer_line, True, strict_format, retry)


def build_pass_prompt(phase1: Sequence[Phase1Entry], question: Question, strict_format: bool = True,
                      retry: bool = False) -> PromptPair:
    """패스 게임 프롬프트 (팀원 없이 자신의 이전 답만 기록)"""
    answer_line = _answer_line(question, PASS_CHOICE_MARKER)
    return PASS_SYSTEM, _game_user(phase1, question, answer_line, False, strict_format, retry)


def build_redo_prompt(question: Question, variant: SecondChanceVariant, retry: bool = False) -> PromptPair:
    """
    두 번째 기회 게임 프롬프트

    Incorrect 와 Neutral 은 안내 문장과 시스템 프롬프트의 "다른 답" 줄만 다릅니다.
    기준 테스트의 답은 절대 포함하지 않습니다.
    """
    system = REDO_SYSTEM if question.is_multiple_choice else REDO_SA_SYSTEM
    if variant == SecondChanceVariant.INCORRECT:
        system = f"{system}\n{REDO_DIFFERENT_LINE}"
        sentence = REDO_INCORRECT_SENTENCE
    else:
        sentence = REDO_NEUTRAL_SENTENCE
    if question.is_multiple_choice:
        answer_line = f"Your answer ({label_list(OPTION_LABELS)}):"
    else:
        answer_line = "Your answer:"
    user = f"{render_question(question)}\n{sentence}\n{answer_line}"
    if retry:
        user += f"\n{STRICT_RETRY_LINE}"
    return system, user


def choice_token(prompt_user: str) -> Optional[str]:
    """프롬프트가 허용하는 회피 토큰 (위임 T / 패스 P)"""
    if DELEGATE_CHOICE_MARKER in prompt_user:
        return DELEGATE_TOKEN
    if PASS_CHOICE_MARKER in prompt_user:
        return PASS_TOKEN
    return None
