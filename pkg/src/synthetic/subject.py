"""
합성 피험자 프로바이더
프롬프트 종류(기준 테스트, 위임/패스 게임, 두 번째 기회, 유도 프로브)를 표지 문장으로 구분하고
생성 모델의 행동을 완성으로 돌려줍니다.
"""

import threading
from typing import Dict, Iterable, List, Optional

import numpy as np

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.baseline.parsing import normalize_answer
from src.baseline.prompts import (
    ELICIT_OBJECTIVE_MARKER,
    ELICIT_SELF_MARKER,
    JUDGE_MARKER,
    OBJECTIVE_SCALE,
    SELF_CONFIDENCE_SCALE,
    BinScale,
    render_question,
)
from src.baseline.runner import with_distribution
from src.games.prompts import (
    DELEGATE_CHOICE_MARKER,
    DELEGATE_TOKEN,
    PASS_CHOICE_MARKER,
    PASS_TOKEN,
    REDO_INCORRECT_SENTENCE,
    REDO_NEUTRAL_SENTENCE,
    TEAMMATE_CORRECT_MARK,
    TEAMMATE_INCORRECT_MARK,
)
from src.models.completion import Completion, CompletionRequest
from src.models.question import OPTION_LABELS, Question
from src.models.records import BaselineRecord, Decision, Regime, SecondChanceVariant
from src.provider.base import Provider
from src.provider.scripted import logprob_completion
from src.synthetic.world import (
    SubjectParams,
    SyntheticWorld,
    baseline_belief,
    delegate_policy,
    internal_confidence,
    pass_policy,
    percent_bin_masses,
    render_answer,
    second_chance_behavior,
)
from src.utils.errors import ConfigError, ProviderTransportError
from src.utils.logger import get_logger
from src.utils.seeding import keyed_rng

QUESTION_HEAD = "Question:\n"
REFERENCE_HEAD = "Reference answer: "
CANDIDATE_HEAD = "Candidate answer: "
NO_HISTORY_TEAMMATE_ACCURACY = 0.5


def judge_reply(user: str) -> str:
    """판정 프롬프트: 정규화한 후보 답이 기준 답과 같으면 YES"""
    fields = {}
    for line in user.split("\n"):
        for head in (REFERENCE_HEAD, CANDIDATE_HEAD):
            if line.startswith(head):
                fields[head] = line[len(head):]
    if len(fields) < 2:
        return "INVALID"
    same = normalize_answer(fields[REFERENCE_HEAD]) == normalize_answer(fields[CANDIDATE_HEAD])
    return "YES" if same else "NO"


def teammate_accuracy_from_prompt(user: str) -> float:
    """1단계 기록의 팀원 정답 표시 비율 (기록이 없으면 0.5)"""
    correct = user.count(TEAMMATE_CORRECT_MARK)
    total = correct + user.count(TEAMMATE_INCORRECT_MARK)
    return correct / total if total else NO_HISTORY_TEAMMATE_ACCURACY


class SyntheticSubject(Provider):
    """
    메타인지 파라미터를 알고 있는 검증용 피험자

    사용 전에 bind_questions 로 문항 집합을 알려줘야 합니다. 응답은 요청 순서와 무관하게
    (seed, 문항 id) 로만 결정됩니다.
    """

    kind = "synthetic"

    def __init__(self, params: SubjectParams, world: SyntheticWorld, model_id: str = "synthetic-subject",
                 family: str = "synthetic", supports_logprobs: bool = True, top_logprobs: int = 5,
                 name: Optional[str] = None):
        super().__init__(model_id=model_id, family=family, supports_logprobs=supports_logprobs,
                         top_logprobs=top_logprobs, name=name)
        self.params = params
        self.world = world
        self._by_first_line: Dict[str, List[Question]] = {}
        self._lock = threading.Lock()
        self.logger = get_logger(__name__)

    @classmethod
    def from_config(cls, name: str, provider_config: Dict, config: Dict) -> 'SyntheticSubject':
        """
        providers.<name> 의 subject 이름으로 synthetic_subjects 파라미터를 찾습니다.

        Raises:
            ConfigError: 알 수 없는 피험자 이름
        """
        subject = provider_config.get('subject')
        subjects = config.get('synthetic_subjects', {})
        if 'params' in provider_config:
            params = SubjectParams.from_config(provider_config['params'])
        elif subject in subjects:
            params = SubjectParams.from_config(subjects[subject])
        else:
            raise ConfigError(f"합성 피험자 '{subject}'가 synthetic_subjects에 없습니다.",
                              hint=f"사용 가능: {sorted(subjects)}")
        return cls(
            params=params,
            world=SyntheticWorld.from_config(config, provider_config.get('seed')),
            model_id=provider_config.get('model_id', name),
            family=provider_config.get('family', 'synthetic'),
            supports_logprobs=bool(provider_config.get('supports_logprobs', True)),
            top_logprobs=int(provider_config.get('top_logprobs', 5)),
            name=name,
        )

    def bind_questions(self, questions: Iterable[Question]) -> None:
        """프롬프트에서 문항을 찾을 수 있도록 문항을 등록합니다."""
        with self._lock:
            for question in questions:
                first_line = question.text.split("\n", 1)[0]
                bucket = self._by_first_line.setdefault(first_line, [])
                if all(q.id != question.id for q in bucket):
                    bucket.append(question)

    def locate(self, user: str) -> Question:
        """
        프롬프트의 마지막 문항 블록에 해당하는 문항

        Raises:
            ProviderTransportError: 등록되지 않은 문항
        """
        start = user.rfind(QUESTION_HEAD)
        if start >= 0:
            tail = user[start:]
            first_line = tail[len(QUESTION_HEAD):].split("\n", 1)[0]
            for question in self._by_first_line.get(first_line, []):
                if tail.startswith(render_question(question)):
                    return question
        raise ProviderTransportError("합성 피험자에 등록되지 않은 문항입니다.",
                                     hint="bind_questions로 문항 집합을 먼저 등록하세요.")

    # 응답 생성

    def _labelled(self, text: str, masses: Dict[str, float], request: CompletionRequest) -> Completion:
        if request.want_top_logprobs <= 0:
            return Completion(text=text)
        return logprob_completion(text, masses)

    def _baseline_reply(self, question: Question, request: CompletionRequest) -> Completion:
        belief = baseline_belief(self.params, self.world, question)
        label = belief.answer
        # 로그 확률 없이 온도 > 0 으로 재표본하면 분포에서 뽑음
        if request.temperature > 0 and request.want_top_logprobs <= 0:
            rng = keyed_rng(self.world.seed, 'resample', question.id, request.sample_index)
            probs = np.array([belief.distribution.probs[l] for l in OPTION_LABELS])
            label = OPTION_LABELS[int(rng.choice(len(OPTION_LABELS), p=probs / probs.sum()))]
        text = render_answer(question, label)
        if not question.is_multiple_choice:
            return Completion(text=text)
        return self._labelled(text, belief.distribution.probs, request)

    def _game_reply(self, question: Question, user: str) -> Completion:
        confidence = internal_confidence(self.params, self.world, question.id)
        if DELEGATE_CHOICE_MARKER in user:
            decision = delegate_policy(self.params, confidence, teammate_accuracy_from_prompt(user))
        else:
            decision = pass_policy(self.params, confidence)
        if decision == Decision.DELEGATE:
            return Completion(text=DELEGATE_TOKEN)
        if decision == Decision.PASS:
            return Completion(text=PASS_TOKEN)
        belief = baseline_belief(self.params, self.world, question)
        return Completion(text=render_answer(question, belief.answer))

    def _redo_reply(self, question: Question, user: str, request: CompletionRequest) -> Completion:
        variant = SecondChanceVariant.INCORRECT if REDO_INCORRECT_SENTENCE in user else SecondChanceVariant.NEUTRAL
        behavior = second_chance_behavior(self.params, self.world, question, variant)
        text = render_answer(question, behavior.answer)
        if not question.is_multiple_choice:
            return Completion(text=text)
        return self._labelled(text, behavior.distribution.probs, request)

    def _elicit_reply(self, question: Question, scale: BinScale, percent: float,
                      request: CompletionRequest) -> Completion:
        masses = percent_bin_masses(percent, scale.labels, scale.midpoints)
        text = max(masses, key=masses.get)
        return self._labelled(text, masses, request)

    def complete(self, request: CompletionRequest) -> Completion:
        user = request.user
        if JUDGE_MARKER in user:
            return Completion(text=judge_reply(user))
        question = self.locate(user)
        if ELICIT_OBJECTIVE_MARKER in user:
            percent = 100.0 * self.world.population_share(question.id)
            return self._elicit_reply(question, OBJECTIVE_SCALE, percent, request)
        if ELICIT_SELF_MARKER in user:
            percent = 100.0 * internal_confidence(self.params, self.world, question.id)
            return self._elicit_reply(question, SELF_CONFIDENCE_SCALE, percent, request)
        if DELEGATE_CHOICE_MARKER in user or PASS_CHOICE_MARKER in user:
            return self._game_reply(question, user)
        if REDO_INCORRECT_SENTENCE in user or REDO_NEUTRAL_SENTENCE in user:
            return self._redo_reply(question, user, request)
        return self._baseline_reply(question, request)


def synth_baseline(params: SubjectParams, world: SyntheticWorld, questions: Iterable[Question],
                   model_id: str = "synthetic-subject", dataset: str = "", run_id: str = "") -> List[BaselineRecord]:
    """
    프로바이더를 거치지 않고 합성 피험자의 기준 레코드를 직접 만듭니다 (LogprobTemp1 형식).

    Returns:
        문항 id 순으로 정렬된 BaselineRecord 목록
    """
    records = []
    for question in questions:
        belief = baseline_belief(params, world, question)
        record = BaselineRecord(
            question_id=question.id,
            model_id=model_id,
            regime=Regime.LOGPROB_TEMP1,
            response_text=render_answer(question, belief.answer),
            dataset=dataset,
            run_id=run_id,
        )
        if question.is_multiple_choice:
            record.chosen_label = belief.answer
            with_distribution(record, belief.distribution)
            record.is_correct = belief.answer == question.reference_answer
        else:
            record.is_correct = record.response_text == question.reference_answer
        record.validate()
        records.append(record)
    records.sort(key=lambda r: r.question_id)
    return records
