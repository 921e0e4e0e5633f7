"""
API 클라이언트 프로바이더
OpenAI 호환 /chat/completions 엔드포인트와 통신하여 완성과 토큰 log-probability를 받습니다.
"""

import os
import threading
import time
from typing import Any, Dict, List, Optional

import requests

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.completion import Completion, CompletionRequest, FinishReason
from src.provider.base import Provider
from src.provider.rate_limit import TokenBucket
from src.utils.errors import ProviderAuthError, ProviderError, ProviderTransportError
from src.utils.logger import get_logger

RETRYABLE_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}
AUTH_STATUS = {401, 403}


class _RetryableResponse(Exception):
    """재시도 가능한 HTTP 응답"""


class APIClientProvider(Provider):
    """OpenAI 호환 채팅 완성 API 클라이언트"""

    kind = "openai_compatible"

    def __init__(self, name: str, provider_config: Dict[str, Any]):
        super().__init__(
            model_id=provider_config['model_id'],
            family=provider_config.get('family', ''),
            supports_logprobs=bool(provider_config.get('supports_logprobs', False)),
            top_logprobs=int(provider_config.get('top_logprobs', 0)),
            name=name,
        )
        self.logger = get_logger(__name__)

        # API 설정
        self.base_url = str(provider_config.get('endpoint', '')).rstrip('/')
        self.credential_env = provider_config.get('credential_env')
        self.timeout = provider_config.get('timeout_seconds', 60)
        retry_config = provider_config.get('retry', {}) or {}
        self.max_attempts = int(retry_config.get('attempts', 5))
        self.retry_delay = float(retry_config.get('delay_seconds', 2))
        self.max_retry_delay = float(retry_config.get('max_delay_seconds', 60))

        self._validate_config()

        # 요청 제한
        rpm = provider_config.get('rate_limit_rpm')
        self.rate_limiter = TokenBucket(float(rpm)) if rpm else None
        self._in_flight = threading.BoundedSemaphore(int(provider_config.get('max_in_flight', 4)))

        # HTTP 세션
        self.session = requests.Session()
        self.session.headers.update({
            'User-Agent': 'MetacogHarness/1.0',
            'Accept': 'application/json',
            'Content-Type': 'application/json',
        })

        # 연결 풀 설정
        adapter = requests.adapters.HTTPAdapter(
            pool_connections=10,
            pool_maxsize=20,
            max_retries=0  # 자체 재시도 로직 사용
        )
        self.session.mount('http://', adapter)
        self.session.mount('https://', adapter)

    def _validate_config(self):
        """API 설정을 검증합니다."""
        if not self.base_url:
            raise ValueError(f"프로바이더 {self.name}: endpoint가 설정되지 않았습니다.")

        if not self.credential_env:
            raise ValueError(f"프로바이더 {self.name}: credential_env가 설정되지 않았습니다.")

        if self.timeout <= 0:
            raise ValueError("API timeout은 양수여야 합니다.")

        if self.max_attempts < 1:
            raise ValueError("retry.attempts는 1 이상이어야 합니다.")

        if self.retry_delay < 0:
            raise ValueError("retry.delay_seconds는 0 이상이어야 합니다.")

    def _api_key(self) -> str:
        api_key = os.getenv(self.credential_env, '')
        if not api_key:
            raise ProviderAuthError(
                f"프로바이더 {self.name}: 환경 변수 {self.credential_env}가 설정되지 않았습니다.",
                hint=f"export {self.credential_env}=...",
            )
        return api_key

    def _payload(self, request: CompletionRequest) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            'model': request.model_id,
            'messages': [
                {'role': 'system', 'content': request.system},
                {'role': 'user', 'content': request.user},
            ],
            'temperature': request.temperature,
            'max_tokens': request.max_output,
        }
        if request.want_top_logprobs and self.supports_logprobs:
            payload['logprobs'] = True
            payload['top_logprobs'] = min(request.want_top_logprobs, self.top_logprobs or request.want_top_logprobs)
        return payload

    def backoff_delay(self, attempt: int) -> float:
        """attempt(0부터)번째 실패 후 대기 시간"""
        return min(self.max_retry_delay, self.retry_delay * (2 ** attempt))

    def complete(self, request: CompletionRequest) -> Completion:
        """
        완성을 요청합니다. 일시적 실패는 지수 백오프로 재시도합니다.

        Raises:
            ProviderAuthError: 401/403 또는 자격 증명 누락 (재시도 없음)
            ProviderError: 그 밖의 4xx (재시도 없음)
            ProviderTransportError: 재시도 소진
        """
        url = f"{self.base_url}/chat/completions"
        headers = {'Authorization': f"Bearer {self._api_key()}"}
        payload = self._payload(request)
        last_error = "알 수 없는 오류"

        for attempt in range(self.max_attempts):
            if self.rate_limiter is not None:
                self.rate_limiter.acquire()
            try:
                self.logger.debug(f"완성 요청 {attempt + 1}/{self.max_attempts}: {self.name}")
                with self._in_flight:
                    response = self.session.post(url, json=payload, headers=headers, timeout=self.timeout)
                return self._process_response(response)

            except requests.exceptions.Timeout:
                last_error = f"요청 타임아웃 (시도 {attempt + 1}/{self.max_attempts})"
            except requests.exceptions.ConnectionError as e:
                last_error = f"연결 오류 (시도 {attempt + 1}/{self.max_attempts}): {str(e)}"
            except _RetryableResponse as e:
                last_error = f"{str(e)} (시도 {attempt + 1}/{self.max_attempts})"
            except requests.exceptions.RequestException as e:
                last_error = f"요청 오류 (시도 {attempt + 1}/{self.max_attempts}): {str(e)}"

            self.logger.warning(f"{self.name}: {last_error}")
            if attempt < self.max_attempts - 1:
                delay = self.backoff_delay(attempt)
                self.logger.info(f"{delay:.1f}초 후 재시도...")
                time.sleep(delay)

        raise ProviderTransportError(
            f"프로바이더 {self.name}: 최대 재시도 횟수 초과 - {last_error}",
            hint="네트워크 상태나 rate_limit_rpm 설정을 확인하세요.",
        )

    def _process_response(self, response: requests.Response) -> Completion:
        """API 응답을 처리합니다."""
        status = response.status_code

        if status in AUTH_STATUS:
            raise ProviderAuthError(
                f"인증 실패 (HTTP {status}) - {self.credential_env} 값을 확인하세요.",
                hint=f"check {self.credential_env}",
            )

        if status in RETRYABLE_STATUS or status >= 500:
            raise _RetryableResponse(f"일시적 오류 (HTTP {status})")

        if status >= 400:
            try:
                error_msg = response.json().get('error', {})
                if isinstance(error_msg, dict):
                    error_msg = error_msg.get('message', 'Bad Request')
            except ValueError:
                error_msg = response.text.strip()[:500] or 'Bad Request'
            raise ProviderError(f"잘못된 요청 (HTTP {status}): {error_msg}")

        try:
            body = response.json()
            choice = body['choices'][0]
        except (ValueError, KeyError, IndexError) as e:
            raise _RetryableResponse(f"응답 파싱 실패: {str(e)}")

        message = choice.get('message') or {}
        text = message.get('content') or ''
        return Completion(
            text=text,
            top_logprobs=self._parse_logprobs(choice.get('logprobs')),
            finish_reason=FinishReason.parse(choice.get('finish_reason')),
        )

    @staticmethod
    def _parse_logprobs(logprobs: Optional[Dict[str, Any]]) -> Optional[List[List[tuple]]]:
        """choices[0].logprobs.content 를 토큰별 (token, logprob) 대안 목록으로 바꿉니다."""
        if not logprobs or not logprobs.get('content'):
            return None
        positions = []
        for item in logprobs['content']:
            alternatives = [(alt['token'], min(0.0, float(alt['logprob']))) for alt in item.get('top_logprobs') or []]
            if not alternatives:
                alternatives = [(item['token'], min(0.0, float(item['logprob'])))]
            positions.append(alternatives)
        return positions

    def close(self):
        """API 클라이언트를 종료합니다."""
        try:
            self.session.close()
            self.logger.debug(f"API 클라이언트 세션 종료: {self.name}")
        except Exception as e:
            self.logger.error(f"API 클라이언트 종료 중 오류: {str(e)}")
