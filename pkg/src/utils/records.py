"""
줄 단위 JSON 레코드 입출력
정렬된 키, 원자적 쓰기, 내용 해시를 제공합니다.
"""

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Tuple, Union


def _default(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if is_dataclass(value):
        return asdict(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if hasattr(value, 'item'):
        # numpy 스칼라
        return value.item()
    raise TypeError(f"JSON 직렬화할 수 없는 값: {type(value).__name__}")


def dumps_record(record: Dict[str, Any]) -> str:
    """레코드를 정규화된 JSON 한 줄로 변환합니다."""
    return json.dumps(record, sort_keys=True, ensure_ascii=False, default=_default, separators=(',', ':'))


def encode_records(records: Iterable[Dict[str, Any]]) -> bytes:
    """레코드 목록을 JSONL 바이트로 인코딩합니다."""
    return ''.join(dumps_record(r) + '\n' for r in records).encode('utf-8')


def sha256_bytes(data: bytes) -> str:
    """바이트의 SHA-256 해시"""
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Union[str, Path]) -> str:
    """파일의 SHA-256 해시"""
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_bytes(path: Union[str, Path], data: bytes) -> None:
    """임시 파일에 쓴 뒤 os.replace로 교체합니다."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix='.tmp', dir=str(path.parent))
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise


def write_jsonl(path: Union[str, Path], records: Iterable[Dict[str, Any]]) -> Tuple[str, int]:
    """
    레코드를 JSONL 파일로 원자적으로 씁니다.

    Returns:
        (sha256, 레코드 수)
    """
    records = list(records)
    data = encode_records(records)
    atomic_write_bytes(path, data)
    return sha256_bytes(data), len(records)


def iter_jsonl(path: Union[str, Path]) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """(줄 번호, 레코드)를 순서대로 돌려줍니다. 빈 줄은 건너뜁니다."""
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            yield line_number, json.loads(line)


def read_jsonl(path: Union[str, Path]) -> List[Dict[str, Any]]:
    """JSONL 파일 전체를 읽습니다."""
    return [record for _, record in iter_jsonl(path)]
