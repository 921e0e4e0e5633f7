"""
프로바이더 공통 인터페이스
"""

import threading
from abc import ABC, abstractmethod
from typing import Optional

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.completion import Completion, CompletionRequest
from src.provider.cache import CompletionCache
from src.utils.logger import get_logger


class Provider(ABC):
    """단일 system + user 프롬프트 완성 인터페이스 (스레드 안전)"""

    kind: str = "abstract"

    def __init__(self, model_id: str, family: str = "", supports_logprobs: bool = False,
                 top_logprobs: int = 0, name: Optional[str] = None):
        self.model_id = model_id
        self.family = family or model_id
        self.supports_logprobs = supports_logprobs
        self.top_logprobs = top_logprobs
        self.name = name or model_id

    @abstractmethod
    def complete(self, request: CompletionRequest) -> Completion:
        """
        완성을 요청합니다.

        Raises:
            ProviderTransportError: 재시도 소진
            ProviderAuthError: 인증 실패
        """

    def request(self, system: str, user: str, temperature: float = 0.0, max_output: int = 16,
                want_top_logprobs: int = 0, sample_index: int = 0) -> CompletionRequest:
        """이 프로바이더의 model_id로 요청 객체를 만듭니다."""
        if want_top_logprobs and not self.supports_logprobs:
            want_top_logprobs = 0
        return CompletionRequest(
            model_id=self.model_id,
            system=system,
            user=user,
            temperature=temperature,
            max_output=max_output,
            want_top_logprobs=want_top_logprobs,
            sample_index=sample_index,
        )

    def close(self) -> None:
        """보유한 자원을 정리합니다."""

    def __repr__(self):
        return f"<{type(self).__name__}(name='{self.name}', model_id='{self.model_id}')>"


class CachedProvider(Provider):
    """내용 주소 캐시를 앞에 둔 프로바이더"""

    kind = "cached"

    def __init__(self, inner: Provider, cache: CompletionCache):
        super().__init__(
            model_id=inner.model_id,
            family=inner.family,
            supports_logprobs=inner.supports_logprobs,
            top_logprobs=inner.top_logprobs,
            name=inner.name,
        )
        self.inner = inner
        self.cache = cache
        self.logger = get_logger(__name__)
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> Completion:
        key = request.cache_key()
        cached = self.cache.get(key)
        if cached is not None:
            with self._lock:
                self.hits += 1
            return cached

        completion = self.inner.complete(request)
        self.cache.put(key, completion, request)
        with self._lock:
            self.misses += 1
        return completion

    def close(self) -> None:
        self.inner.close()
