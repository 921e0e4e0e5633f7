"""
스크립트 프로바이더
테스트와 오프라인 파생 작업용으로 미리 정한 응답을 돌려줍니다.
"""

import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.completion import Completion, CompletionRequest
from src.provider.base import Provider
from src.utils.errors import ProviderTransportError

Reply = Union[str, Completion, Sequence[Union[str, Completion]], Callable[[CompletionRequest], Union[str, Completion]]]


def logprob_completion(text: str, probabilities: Dict[str, float], extra_positions: int = 0) -> Completion:
    """
    첫 토큰 대안 분포를 가진 완성을 만듭니다.

    Args:
        text: 응답 텍스트
        probabilities: 토큰 → 확률 (0 은 생략)
        extra_positions: 뒤따르는 토큰 위치 수 (단일 대안)
    """
    first = [(token, math.log(p)) for token, p in probabilities.items() if p > 0]
    positions = [first] + [[('\n', 0.0)] for _ in range(extra_positions)]
    return Completion(text=text, top_logprobs=positions)


@dataclass
class ScriptRule:
    """user 프롬프트에 match 가 포함되면 reply 를 돌려주는 규칙"""
    match: str
    reply: Reply


class ScriptedProvider(Provider):
    """
    규칙 기반 고정 응답 프로바이더

    reply 가 목록이면 sample_index 번째 항목을, 함수이면 요청을 넘겨 얻은 값을 씁니다.
    """

    kind = "scripted"

    def __init__(self, model_id: str = "scripted", rules: Optional[List[ScriptRule]] = None,
                 default: Optional[Reply] = None, family: str = "scripted",
                 supports_logprobs: bool = True, top_logprobs: int = 5, name: Optional[str] = None,
                 fail_times: int = 0):
        super().__init__(model_id=model_id, family=family, supports_logprobs=supports_logprobs,
                         top_logprobs=top_logprobs, name=name)
        self.rules = list(rules or [])
        self.default = default
        self.fail_times = fail_times
        self.calls: List[CompletionRequest] = []
        self._lock = threading.Lock()

    @classmethod
    def from_config(cls, name: str, provider_config: Dict) -> 'ScriptedProvider':
        """설정의 replies: [{match, reply}] 와 default_reply 로 만듭니다."""
        rules = [ScriptRule(match=str(r['match']), reply=r['reply']) for r in provider_config.get('replies', [])]
        return cls(
            model_id=provider_config.get('model_id', name),
            rules=rules,
            default=provider_config.get('default_reply'),
            family=provider_config.get('family', 'scripted'),
            supports_logprobs=bool(provider_config.get('supports_logprobs', True)),
            top_logprobs=int(provider_config.get('top_logprobs', 5)),
            name=name,
        )

    def add_rule(self, match: str, reply: Reply) -> None:
        self.rules.append(ScriptRule(match, reply))

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def _select(self, request: CompletionRequest) -> Reply:
        for rule in self.rules:
            if rule.match in request.user or rule.match in request.system:
                return rule.reply
        if self.default is None:
            raise ProviderTransportError(f"스크립트에 일치하는 응답이 없습니다: {request.user[:80]!r}")
        return self.default

    def complete(self, request: CompletionRequest) -> Completion:
        with self._lock:
            self.calls.append(request)
            if self.fail_times > 0:
                self.fail_times -= 1
                raise ProviderTransportError("스크립트된 전송 실패")

        reply = self._select(request)
        if callable(reply):
            reply = reply(request)
        elif isinstance(reply, (list, tuple)):
            reply = reply[request.sample_index % len(reply)]

        if isinstance(reply, Completion):
            return self._truncate(reply, request.want_top_logprobs)
        return Completion(text=str(reply))

    @staticmethod
    def _truncate(completion: Completion, want: int) -> Completion:
        if completion.top_logprobs is None:
            return completion
        if want <= 0:
            return Completion(text=completion.text, finish_reason=completion.finish_reason)
        positions: List[List[Tuple[str, float]]] = [alts[:want] for alts in completion.top_logprobs]
        return Completion(text=completion.text, top_logprobs=positions, finish_reason=completion.finish_reason)
