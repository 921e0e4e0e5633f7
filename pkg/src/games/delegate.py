"""
위임 게임과 패스 게임
1단계 기록(가상 팀원 포함)을 만들고, 2단계에서 답변/위임(또는 답변/패스) 결정을 받아 채점합니다.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.baseline.parsing import normalize_answer, parse_option_label
from src.baseline.scoring import JudgePanel, score_short_answer
from src.dataset.splits import split_phases
from src.games.prompts import DELEGATE_TOKEN, PASS_TOKEN, build_delegate_prompt, build_pass_prompt
from src.models.question import OPTION_LABELS, Question, QuestionSet
from src.models.records import (
    BaselineRecord,
    Decision,
    DelegateTrial,
    GameKind,
    Phase1Entry,
    TeammateProfile,
)
from src.provider.base import Provider
from src.provider.distributions import normalize_token
from src.utils.errors import ProviderError, UndefinedStatisticError
from src.utils.logger import get_logger
from src.utils.seeding import keyed_rng, keyed_uniform

logger = get_logger(__name__)


@dataclass(frozen=True)
class ParsedDecision:
    """파싱된 결정과 (답변이면) 답"""
    decision: Decision
    answer: Optional[str] = None


@dataclass
class GameSettings:
    """답변/회피 게임 실행 설정"""
    phase1_size: int = 50
    strict_format: bool = True
    temperature: float = 0.0
    max_output: int = 16
    max_workers: int = 8
    dataset: str = ""
    run_id: str = ""

    @classmethod
    def from_config(cls, config: dict, section: str = 'delegate_game', dataset: str = "",
                    run_id: str = "") -> 'GameSettings':
        game = config.get(section, {})
        return cls(
            phase1_size=int(game.get('phase1_size', 50 if section == 'delegate_game' else 0)),
            strict_format=bool(game.get('strict_format', True)),
            temperature=float(game.get('temperature', 0.0)),
            max_output=int(game.get('max_output', 16)),
            max_workers=int(config.get('run', {}).get('max_concurrent', 8)),
            dataset=dataset,
            run_id=run_id,
        )


def simulate_teammate(phase1_questions: Sequence[Question], profile: TeammateProfile) -> List[Tuple[str, bool]]:
    """
    정확히 round(target × n) 문항을 정답으로 표시합니다.

    어느 문항이 정답인지는 seed 로 섞은 순서로만 정해지며 문항 난이도와 무관합니다.

    Raises:
        ValueError: 1단계 문항이 없는 경우
    """
    n = len(phase1_questions)
    if n == 0:
        raise ValueError("팀원 시뮬레이션에는 1단계 문항이 필요합니다.")
    correct = set(keyed_rng(profile.seed, 'teammate').permutation(n)[:profile.correct_count(n)].tolist())
    return [(q.id, i in correct) for i, q in enumerate(phase1_questions)]


def parse_decision(reply: str, short_answer: bool = False, avoid_token: str = DELEGATE_TOKEN,
                   labels: Sequence[str] = OPTION_LABELS) -> Optional[ParsedDecision]:
    """
    게임 응답을 결정으로 바꿉니다.

    객관식: 회피 토큰(T/P) → 위임/패스, 선택지 라벨 → 답변. 단답형: 첫 토큰이 회피 토큰이면 위임/패스,
    아니면 응답 전체가 답. 읽을 수 없으면 None.

    Examples:
        " t" → Delegate, "Answer: B" → Answer(B)
    """
    avoid = Decision.DELEGATE if avoid_token == DELEGATE_TOKEN else Decision.PASS
    text = (reply or '').strip()
    if not text:
        return None

    if short_answer:
        if normalize_token(text.split()[0]) == avoid_token:
            return ParsedDecision(avoid)
        return ParsedDecision(Decision.ANSWER, text)

    label = parse_option_label(text, tuple(labels) + (avoid_token,))
    if label is None:
        return None
    if label == avoid_token:
        return ParsedDecision(avoid)
    return ParsedDecision(Decision.ANSWER, label)


def phase1_entries(phase1_questions: Sequence[Question], baseline: Dict[str, BaselineRecord],
                   profile: Optional[TeammateProfile]) -> List[Phase1Entry]:
    """1단계 기록: 기준 테스트의 자기 답 + 팀원 정오"""
    marks = dict(simulate_teammate(phase1_questions, profile)) if (profile and phase1_questions) else {}
    entries = []
    for question in phase1_questions:
        record = baseline.get(question.id)
        entries.append(Phase1Entry(
            question=question,
            self_answer=record.answer if record is not None else None,
            teammate_correct=marks.get(question.id, False),
        ))
    return entries


def baseline_index(baseline: Sequence[BaselineRecord], model_id: Optional[str] = None) -> Dict[str, BaselineRecord]:
    return {r.question_id: r for r in baseline if model_id is None or r.model_id == model_id}


def answers_differ(question: Question, game_answer: str, baseline_answer: str) -> bool:
    if question.is_multiple_choice:
        return game_answer != baseline_answer
    return normalize_answer(game_answer) != normalize_answer(baseline_answer)


class AnswerOrAvoidGame:
    """
    답변/회피 게임 공통 실행기

    kind 가 DELEGATE 이면 팀원이 있는 위임 게임, PASS 이면 +1/-1/0 패스 게임입니다.
    """

    def __init__(self, model: Provider, kind: GameKind, seed: int, settings: Optional[GameSettings] = None,
                 profile: Optional[TeammateProfile] = None, panel: Optional[JudgePanel] = None):
        if kind == GameKind.DELEGATE and profile is None:
            raise ValueError("위임 게임에는 TeammateProfile이 필요합니다.")
        self.model = model
        self.kind = kind
        self.seed = seed
        self.settings = settings or GameSettings()
        self.profile = profile
        self.panel = panel
        self.avoid_token = DELEGATE_TOKEN if kind == GameKind.DELEGATE else PASS_TOKEN
        self.logger = get_logger(__name__)

    def _prompt(self, phase1: List[Phase1Entry], question: Question, retry: bool) -> Tuple[str, str]:
        if self.kind == GameKind.DELEGATE:
            return build_delegate_prompt(phase1, question, self.settings.strict_format, retry)
        return build_pass_prompt(phase1, question, self.settings.strict_format, retry)

    def _ask(self, phase1: List[Phase1Entry], question: Question) -> Tuple[Optional[ParsedDecision], str]:
        text = ""
        for retry in (False, True):
            system, user = self._prompt(phase1, question, retry)
            completion = self.model.complete(self.model.request(
                system, user, temperature=self.settings.temperature, max_output=self.settings.max_output))
            text = completion.text
            parsed = parse_decision(text, not question.is_multiple_choice, self.avoid_token)
            if parsed is not None:
                return parsed, text
        return None, text

    def _score_answer(self, question: Question, answer: str) -> Optional[bool]:
        if question.is_multiple_choice:
            return answer == question.reference_answer
        score = score_short_answer(answer, question.reference_answer, self.panel, question.text)
        return None if score.excluded else score.is_correct

    def play(self, question: Question, phase1: List[Phase1Entry], record: BaselineRecord) -> DelegateTrial:
        trial = DelegateTrial(
            question_id=question.id,
            model_id=self.model.model_id,
            game=self.kind,
            baseline_ref=record.ref,
            teammate_accuracy=self.profile.target_accuracy if self.profile else None,
            run_id=self.settings.run_id,
        )
        try:
            parsed, text = self._ask(phase1, question)
        except ProviderError as e:
            self.logger.error(f"{self.model.name}/{question.id}: 프로바이더 오류로 시행 제외 - {e}")
            trial.excluded = True
            trial.exclusion_reason = f"provider_error: {e}"
            return trial

        trial.response_text = text
        if parsed is None:
            trial.excluded = True
            trial.exclusion_reason = "unparseable"
            return trial

        trial.decision = parsed.decision
        if parsed.decision == Decision.ANSWER:
            trial.answer = parsed.answer
            if record.answer is not None:
                trial.changed_from_baseline = answers_differ(question, parsed.answer, record.answer)
            trial.is_correct = self._score_answer(question, parsed.answer)
            if trial.is_correct is None:
                trial.excluded = True
                trial.exclusion_reason = "no_judge_consensus"
                return trial
            if self.kind == GameKind.PASS:
                trial.points = 1 if trial.is_correct else -1
            else:
                trial.points = 1 if trial.is_correct else 0
        elif parsed.decision == Decision.DELEGATE:
            # 위임 시행은 목표 정확도로 새로 뽑은 값으로 채점
            trial.is_correct = keyed_uniform(self.seed, 'delegated', question.id) < self.profile.target_accuracy
            trial.points = 1 if trial.is_correct else 0
        else:
            trial.points = 0
        trial.validate()
        return trial

    def run(self, question_set: QuestionSet, baseline: Sequence[BaselineRecord]) -> List[DelegateTrial]:
        """
        Raises:
            ValueError: 2단계 문항에 기준 레코드가 없는 경우
        """
        index = baseline_index(baseline, self.model.model_id)
        phase1_questions, phase2_questions = split_phases(question_set, self.settings.phase1_size, self.seed)
        missing = [q.id for q in phase2_questions if q.id not in index]
        if missing:
            raise ValueError(f"기준 레코드가 없는 2단계 문항 {len(missing)}개: {missing[:5]}")

        phase1 = phase1_entries(phase1_questions, index, self.profile)
        with ThreadPoolExecutor(max_workers=max(1, self.settings.max_workers)) as pool:
            trials = list(pool.map(lambda q: self.play(q, phase1, index[q.id]), phase2_questions))
        trials.sort(key=lambda t: t.question_id)

        excluded = sum(1 for t in trials if t.excluded)
        avoided = sum(1 for t in trials if not t.excluded and t.decision != Decision.ANSWER)
        self.logger.info(
            f"{self.kind.value} 게임 완료: {self.model.name} / {question_set.name} - "
            f"시행 {len(trials)}, 회피 {avoided}, 제외 {excluded}"
        )
        return trials


def run_delegate_game(model: Provider, question_set: QuestionSet, baseline: Sequence[BaselineRecord],
                      profile: TeammateProfile, seed: int, settings: Optional[GameSettings] = None,
                      panel: Optional[JudgePanel] = None) -> List[DelegateTrial]:
    """위임 게임 2단계 시행 목록 (문항 id 순)"""
    return AnswerOrAvoidGame(model, GameKind.DELEGATE, seed, settings, profile, panel).run(question_set, baseline)


def run_pass_game(model: Provider, question_set: QuestionSet, baseline: Sequence[BaselineRecord],
                  seed: int, settings: Optional[GameSettings] = None,
                  panel: Optional[JudgePanel] = None) -> List[DelegateTrial]:
    """패스 게임 시행 목록 (정답 +1, 오답 -1, 패스 0)"""
    settings = settings or GameSettings(phase1_size=0)
    return AnswerOrAvoidGame(model, GameKind.PASS, seed, settings, None, panel).run(question_set, baseline)


def pass_score(trials: Sequence[DelegateTrial]) -> int:
    return sum(t.points or 0 for t in trials if not t.excluded)


def team_accuracy(trials: Sequence[DelegateTrial]) -> float:
    """제외되지 않은 모든 시행(답변 + 위임)의 정답 비율"""
    scored = [t for t in trials if not t.excluded]
    if not scored:
        raise UndefinedStatisticError("채점된 시행이 없습니다.", diagnostic={'n_trials': len(trials)})
    return sum(1 for t in scored if t.is_correct) / len(scored)


def team_accuracy_gain(trials: Sequence[DelegateTrial], self_accuracy: float, teammate_accuracy: float) -> float:
    """팀 정확도 − max(자기 정확도, 팀원 정확도)"""
    return team_accuracy(trials) - max(self_accuracy, teammate_accuracy)


def change_rate(trials: Sequence[DelegateTrial], baseline: Sequence[BaselineRecord]) -> float:
    """
    답변 시행 중 기준 답과 달라진 비율

    Raises:
        UndefinedStatisticError: 기준 답이 있는 답변 시행이 없는 경우
    """
    index = {r.ref: r for r in baseline}
    answered = [t for t in trials
                if t.answered and t.baseline_ref in index and index[t.baseline_ref].answer is not None
                and t.changed_from_baseline is not None]
    if not answered:
        raise UndefinedStatisticError("기준 답이 있는 답변 시행이 없습니다.",
                                      diagnostic={'n_trials': len(trials)})
    return sum(1 for t in answered if t.changed_from_baseline) / len(answered)
