"""
로깅 시스템 모듈
메타인지 게임 평가 하네스의 로깅을 담당합니다.
"""

import gzip
import json
import logging
import logging.handlers
import os
import shutil
import sys
import threading
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

# 프로젝트 루트를 Python 경로에 추가
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

# 설정 모듈 임포트
try:
    from config.settings import get_logging_config
except ImportError:
    # 설정 모듈이 없는 경우 기본값 사용
    def get_logging_config():
        return {
            'level': 'INFO',
            'file': 'logs/harness.log',
            'max_bytes': 10485760,
            'backup_count': 5,
            'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            'console_level': 'INFO',
            'structured': True,
        }

ROOT_LOGGER_NAME = "metacog"
DEFAULT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(funcName)s - %(message)s'


class StructuredFormatter(logging.Formatter):
    """구조화된 로그 포맷터 (JSON lines 형식)"""

    def __init__(self, include_timestamp: bool = True):
        super().__init__()
        self.include_timestamp = include_timestamp

    def format(self, record):
        log_entry = {
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
        }
        if self.include_timestamp:
            log_entry['timestamp'] = datetime.fromtimestamp(record.created).isoformat()
            log_entry['module'] = record.module
            log_entry['function'] = record.funcName
            log_entry['line'] = record.lineno

        # 추가 컨텍스트 정보
        if hasattr(record, 'extra_data'):
            log_entry.update(record.extra_data)

        if record.exc_info:
            log_entry['exception'] = self.formatException(record.exc_info)

        return json.dumps(log_entry, ensure_ascii=False, sort_keys=True, default=str)


class CompressedRotatingFileHandler(logging.handlers.RotatingFileHandler):
    """압축 기능이 포함된 로테이팅 파일 핸들러"""

    def __init__(self, filename, mode='a', maxBytes=0, backupCount=0, encoding=None, delay=False, errors=None, compress=True):
        super().__init__(filename, mode, maxBytes, backupCount, encoding, delay, errors)
        self.compress = compress

    def doRollover(self):
        """로그 파일 로테이션을 수행합니다."""
        if self.stream:
            self.stream.close()
            self.stream = None

        if self.backupCount > 0:
            for i in range(self.backupCount - 1, 0, -1):
                sfn = f"{self.baseFilename}.{i}.gz" if self.compress else f"{self.baseFilename}.{i}"
                dfn = f"{self.baseFilename}.{i + 1}.gz" if self.compress else f"{self.baseFilename}.{i + 1}"
                if os.path.exists(sfn):
                    if os.path.exists(dfn):
                        os.remove(dfn)
                    os.rename(sfn, dfn)

            dfn = f"{self.baseFilename}.1"
            if os.path.exists(dfn):
                os.remove(dfn)
            os.rename(self.baseFilename, dfn)
            if self.compress:
                self._compress_file(dfn)

        if not self.delay:
            self.stream = self._open()

    def _compress_file(self, filename):
        """파일을 gzip으로 압축합니다."""
        try:
            with open(filename, 'rb') as f_in:
                with gzip.open(filename + '.gz', 'wb') as f_out:
                    shutil.copyfileobj(f_in, f_out)
            os.remove(filename)
        except OSError:
            # 압축 실패 시 원본 파일 유지
            pass


class ColoredFormatter(logging.Formatter):
    """컬러 콘솔 출력을 위한 포맷터"""

    COLORS = {
        'DEBUG': '\033[36m',      # 청록색
        'INFO': '\033[32m',       # 녹색
        'WARNING': '\033[33m',    # 노란색
        'ERROR': '\033[31m',      # 빨간색
        'CRITICAL': '\033[35m',   # 자주색
        'RESET': '\033[0m'
    }

    def format(self, record):
        original_levelname = record.levelname
        if record.levelname in self.COLORS:
            record.levelname = f"{self.COLORS[record.levelname]}{record.levelname}{self.COLORS['RESET']}"
        try:
            return super().format(record)
        finally:
            # 다른 핸들러에 영향 주지 않도록 복원
            record.levelname = original_levelname


class LoggerManager:
    """로거 관리를 담당하는 클래스"""

    _lock = threading.Lock()

    def __init__(self, name: str = ROOT_LOGGER_NAME, config: Optional[Dict[str, Any]] = None):
        self.name = name
        self.config = config if config is not None else get_logging_config()
        self.logger = logging.getLogger(self.name)
        self.run_handlers: list = []
        self._setup_logger()

    def _setup_logger(self):
        """로거를 설정합니다."""
        with self._lock:
            self.logger.setLevel(logging.DEBUG)

            # 기존 핸들러 제거 (중복 방지)
            for handler in self.logger.handlers[:]:
                self.logger.removeHandler(handler)
                handler.close()

            self._add_console_handler(self.config)
            self.logger.propagate = False

    def _add_console_handler(self, config: Dict[str, Any]):
        """콘솔 핸들러를 추가합니다."""
        console_level = getattr(logging, str(config.get('console_level', 'INFO')).upper(), logging.INFO)
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(console_level)

        fmt = config.get('format', DEFAULT_FORMAT)
        if sys.stderr.isatty():
            formatter = ColoredFormatter(fmt)
        else:
            formatter = logging.Formatter(fmt)

        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

    def attach_run_directory(self, log_dir: Path) -> None:
        """
        실행(run) 로그 디렉토리에 텍스트 로그와 구조화 로그 핸들러를 붙입니다.

        Args:
            log_dir: results/<run-id>/logs 경로
        """
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        log_level = getattr(logging, str(self.config.get('level', 'INFO')).upper(), logging.INFO)

        text_handler = CompressedRotatingFileHandler(
            filename=str(log_dir / 'harness.log'),
            maxBytes=int(self.config.get('max_bytes', 10485760)),
            backupCount=int(self.config.get('backup_count', 5)),
            encoding='utf-8',
            compress=True
        )
        text_handler.setLevel(log_level)
        text_handler.setFormatter(logging.Formatter(FILE_FORMAT))
        self.logger.addHandler(text_handler)
        self.run_handlers.append(text_handler)

        if self.config.get('structured', True):
            structured_handler = logging.FileHandler(str(log_dir / 'events.jsonl'), encoding='utf-8')
            structured_handler.setLevel(log_level)
            structured_handler.setFormatter(StructuredFormatter())
            self.logger.addHandler(structured_handler)
            self.run_handlers.append(structured_handler)

    def detach_run_handlers(self) -> None:
        """실행 단위 핸들러를 제거합니다."""
        for handler in self.run_handlers:
            self.logger.removeHandler(handler)
            handler.close()
        self.run_handlers = []

    def get_logger(self, name: Optional[str] = None) -> logging.Logger:
        """
        로거를 반환합니다.

        Args:
            name: 로거 이름 (None인 경우 기본 이름 사용)

        Returns:
            설정된 로거 객체
        """
        if name:
            return logging.getLogger(f"{self.name}.{name}")
        return self.logger

    def set_level(self, level: str):
        """
        콘솔 로그 레벨을 설정합니다.

        Args:
            level: 로그 레벨 (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        """
        try:
            log_level = getattr(logging, level.upper())
        except AttributeError:
            self.logger.warning(f"잘못된 로그 레벨: {level}. 기본값 INFO를 사용합니다.")
            log_level = logging.INFO
        for handler in self.logger.handlers:
            if handler not in self.run_handlers:
                handler.setLevel(log_level)

    def log_with_context(self, level: str, message: str, **context):
        """
        컨텍스트 정보와 함께 로그를 기록합니다.

        Args:
            level: 로그 레벨
            message: 로그 메시지
            **context: 추가 컨텍스트 정보
        """
        level_no = getattr(logging, level.upper(), logging.INFO)
        self.logger.log(level_no, message, extra={'extra_data': context})


class StructuredReport:
    """
    구조화 로그 파일 하나에 이벤트를 기록하는 리포트 객체

    파생 리포트, 수집 리포트처럼 실행 산출물로 남겨야 하는 로그에 사용합니다.
    타임스탬프를 포함하지 않으므로 같은 입력이면 같은 파일이 만들어집니다.
    """

    def __init__(self, path: Path, name: str):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        # 로거 이름이 파일에 기록되므로 매니저에 등록하지 않은 독립 로거를 씁니다
        self.logger = logging.Logger(f"{ROOT_LOGGER_NAME}.report.{name}")
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False
        self.handler = logging.FileHandler(str(self.path), mode='w', encoding='utf-8')
        self.handler.setFormatter(StructuredFormatter(include_timestamp=False))
        self.logger.addHandler(self.handler)
        self.count = 0

    def record(self, event: str, **context):
        """리포트에 이벤트 한 줄을 기록합니다."""
        self.logger.info(event, extra={'extra_data': context})
        self.count += 1

    def close(self):
        """리포트 파일을 닫습니다."""
        self.logger.removeHandler(self.handler)
        self.handler.close()


# 전역 로거 매니저 인스턴스
_logger_manager = LoggerManager()


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    로거를 반환하는 편의 함수입니다.

    Args:
        name: 로거 이름 (None인 경우 기본 이름 사용)

    Returns:
        설정된 로거 객체
    """
    return _logger_manager.get_logger(name)


def get_logger_manager() -> LoggerManager:
    """전역 로거 매니저를 반환합니다."""
    return _logger_manager


def set_log_level(level: str):
    """
    전역 콘솔 로그 레벨을 설정합니다.

    Args:
        level: 로그 레벨 (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    """
    _logger_manager.set_level(level)


def log_with_context(level: str, message: str, **context):
    """
    컨텍스트 정보와 함께 로그를 기록합니다.

    Args:
        level: 로그 레벨
        message: 로그 메시지
        **context: 추가 컨텍스트 정보
    """
    _logger_manager.log_with_context(level, message, **context)


if __name__ == "__main__":
    logger = get_logger("smoke")
    logger.debug("디버그 메시지입니다.")
    logger.info("정보 메시지입니다.")
    logger.warning("경고 메시지입니다.")
    log_with_context("INFO", "기준 테스트 시작", model_id="synthetic-subject", questions=100)
