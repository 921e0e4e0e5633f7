"""
하네스 예외 계층
모든 도메인 오류는 HarnessError를 상속합니다.
"""

from typing import Optional


class HarnessError(Exception):
    """하네스 기본 예외"""

    hint: Optional[str] = None

    def __init__(self, message: str, hint: Optional[str] = None):
        super().__init__(message)
        if hint is not None:
            self.hint = hint

    def to_dict(self) -> dict:
        """CLI 구조화 오류 출력용 딕셔너리"""
        return {
            'error': type(self).__name__,
            'message': str(self),
            'hint': self.hint,
        }


class ConfigError(HarnessError, ValueError):
    """설정 오류"""


class DatasetError(HarnessError, ValueError):
    """데이터셋 파싱 또는 불변식 위반 오류"""

    def __init__(self, message: str, line_number: Optional[int] = None, question_id: Optional[str] = None):
        super().__init__(message)
        self.line_number = line_number
        self.question_id = question_id


class ProviderError(HarnessError):
    """프로바이더 호출 오류"""


class ProviderTransportError(ProviderError):
    """재시도를 모두 소진한 전송 오류"""


class ProviderAuthError(ProviderError):
    """인증 오류 (재시도하지 않음)"""


class OfflineViolationError(ProviderError):
    """--offline 모드에서 라이브 프로바이더를 사용하려 한 경우"""


class DegenerateDistributionError(HarnessError, ValueError):
    """선택지 분포를 만들 수 없는 경우"""


class UndefinedStatisticError(HarnessError, ValueError):
    """통계량이 정의되지 않는 경우 (진단 메시지 포함)"""

    def __init__(self, message: str, diagnostic: Optional[dict] = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class MissingArtifactError(HarnessError):
    """선행 단계 산출물이 없는 경우"""

    def __init__(self, artifact: str, command: str):
        super().__init__(
            f"필요한 산출물이 없습니다: {artifact}. 먼저 `{command}` 명령을 실행하세요 (run {command} first).",
            hint=f"run {command} first",
        )
        self.artifact = artifact
        self.command = command


class ArtifactConflictError(HarnessError):
    """이전 실행의 산출물을 다른 내용으로 덮어쓰려 한 경우"""
