"""
완성 응답 디스크 캐시
<directory>/<key[:2]>/<key>.json 에 원자적으로 저장합니다.
"""

import json
import threading
from pathlib import Path
from typing import Dict, Optional, Union

# 프로젝트 루트를 Python 경로에 추가
import sys
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.completion import Completion, CompletionRequest
from src.utils.logger import get_logger
from src.utils.records import atomic_write_bytes, dumps_record


class CompletionCache:
    """내용 주소 기반 완성 캐시 (동시 읽기, 키별 단일 쓰기)"""

    def __init__(self, directory: Union[str, Path], enabled: bool = True):
        self.directory = Path(directory)
        self.enabled = enabled
        self.logger = get_logger(__name__)
        self._locks: Dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def path_for(self, key: str) -> Path:
        return self.directory / key[:2] / f"{key}.json"

    def _lock_for(self, key: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(key)
            if lock is None:
                lock = threading.Lock()
                self._locks[key] = lock
            return lock

    def get(self, key: str) -> Optional[Completion]:
        """캐시된 완성을 돌려줍니다. 없거나 손상되었으면 None."""
        if not self.enabled:
            return None
        path = self.path_for(key)
        if not path.exists():
            return None
        try:
            with open(path, 'r', encoding='utf-8') as f:
                record = json.load(f)
            return Completion.from_record(record['completion'])
        except (OSError, ValueError, KeyError) as e:
            self.logger.warning(f"손상된 캐시 항목을 무시합니다: {path} ({e})")
            return None

    def put(self, key: str, completion: Completion, request: Optional[CompletionRequest] = None) -> None:
        """완성을 저장합니다. 이미 있는 키는 다시 쓰지 않습니다."""
        if not self.enabled:
            return
        with self._lock_for(key):
            path = self.path_for(key)
            if path.exists():
                return
            record = {'key': key, 'completion': completion.to_record()}
            if request is not None:
                record['request'] = {
                    'model_id': request.model_id,
                    'temperature': request.temperature,
                    'want_top_logprobs': request.want_top_logprobs,
                    'sample_index': request.sample_index,
                }
            atomic_write_bytes(path, (dumps_record(record) + '\n').encode('utf-8'))

    def __contains__(self, key: str) -> bool:
        return self.enabled and self.path_for(key).exists()
