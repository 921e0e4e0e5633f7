"""
실행 저장소
results/<run-id>/{datasets,records,tables,manifest,logs} 아래에 산출물을 쓰고 레지스트리에 등록합니다.
"""

import hashlib
import json
import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

# 프로젝트 루트를 Python 경로에 추가
import sys
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.db.connection import DatabaseManager
from src.models.run_manifest import RunArtifact, RunManifest
from src.utils.errors import ArtifactConflictError, MissingArtifactError
from src.utils.logger import get_logger
from src.utils.records import atomic_write_bytes, encode_records, read_jsonl, sha256_bytes

ARTIFACT_KINDS = ('datasets', 'records', 'tables', 'manifest', 'logs')
_UNSAFE_RE = re.compile(r'[^A-Za-z0-9._-]+')


def default_run_id(config_digest: str, seed: int) -> str:
    """설정 해시와 시드로 정해지는 실행 ID"""
    digest = hashlib.sha256(f"{config_digest}:{seed}".encode('utf-8')).hexdigest()
    return f"run-{digest[:12]}"


def slug(*parts: str) -> str:
    """파일 이름에 쓸 수 있는 조각으로 바꿔 '__' 로 잇습니다."""
    return '__'.join(_UNSAFE_RE.sub('_', str(p)).strip('_') or '_' for p in parts)


class RunStore:
    """
    실행 하나의 산출물 디렉토리

    같은 경로에 다시 쓸 때는 바이트가 같아야 합니다 (멱등 재실행). 내용이 다르면
    ArtifactConflictError 를 냅니다. db_manager 가 있으면 쓴 산출물을 run_artifacts 에 등록합니다.
    """

    def __init__(self, results_dir: Union[str, Path], run_id: str, db_manager: Optional[DatabaseManager] = None):
        self.run_id = run_id
        self.root = Path(results_dir) / run_id
        self.db_manager = db_manager
        self.logger = get_logger(__name__)
        self.written: Dict[str, str] = {}

    def path(self, kind: str, name: str) -> Path:
        if kind not in ARTIFACT_KINDS:
            raise ValueError(f"알 수 없는 산출물 종류: {kind}")
        return self.root / kind / name

    def relative(self, path: Path) -> str:
        return Path(path).relative_to(self.root).as_posix()

    def exists(self, kind: str, name: str) -> bool:
        return self.path(kind, name).is_file()

    # 쓰기

    def write_path(self, path: Path, data: bytes, record_count: Optional[int] = None) -> str:
        """
        바이트를 씁니다. 이미 같은 바이트가 있으면 그대로 둡니다.

        Returns:
            sha256

        Raises:
            ArtifactConflictError: 다른 내용의 파일이 이미 있는 경우
        """
        path = Path(path)
        digest = sha256_bytes(data)
        relative = self.relative(path)
        if path.is_file():
            existing = sha256_bytes(path.read_bytes())
            if existing != digest:
                raise ArtifactConflictError(
                    f"{self.run_id}/{relative}: 이전 실행의 산출물과 내용이 다릅니다.",
                    hint="설정이나 시드를 바꿨다면 --run-id 로 새 실행 ID를 지정하세요.",
                )
            self.logger.debug(f"산출물 재사용: {relative}")
        else:
            atomic_write_bytes(path, data)
            self.logger.debug(f"산출물 저장: {relative} ({len(data)} bytes)")
        self.written[relative] = digest
        self._register(relative, digest, record_count)
        return digest

    def write_bytes(self, kind: str, name: str, data: bytes, record_count: Optional[int] = None) -> str:
        return self.write_path(self.path(kind, name), data, record_count)

    def write_records(self, kind: str, name: str, records: Iterable[Dict[str, Any]]) -> Tuple[str, int]:
        """레코드를 JSONL 로 씁니다. 모든 레코드에 run_id 를 넣습니다."""
        stamped = [dict(record, run_id=self.run_id) for record in records]
        digest = self.write_bytes(kind, name, encode_records(stamped), len(stamped))
        return digest, len(stamped)

    def write_manifest(self, command: str, manifest: Dict[str, Any]) -> str:
        """manifest/<명령>.json (한 번 쓰면 바뀌지 않음)"""
        data = (json.dumps(manifest, sort_keys=True, ensure_ascii=False, indent=2) + "\n").encode('utf-8')
        return self.write_bytes('manifest', f'{command}.json', data)

    def register_existing(self, kind: str, name: str, record_count: Optional[int] = None) -> str:
        """다른 코드가 직접 쓴 파일(구조화 리포트)을 등록합니다."""
        path = self.path(kind, name)
        digest = sha256_bytes(path.read_bytes())
        relative = self.relative(path)
        self.written[relative] = digest
        self._register(relative, digest, record_count)
        return digest

    def _register(self, relative: str, digest: str, record_count: Optional[int]) -> None:
        if self.db_manager is None:
            return
        kind = relative.split('/', 1)[0]
        with self.db_manager.get_session() as session:
            RunArtifact.register(session, self.run_id, kind, relative, digest, record_count)

    # 읽기

    def read_records(self, kind: str, name: str, command: str) -> List[Dict[str, Any]]:
        """
        Raises:
            MissingArtifactError: 파일이 없는 경우 (먼저 실행할 명령 이름 포함)
        """
        path = self.path(kind, name)
        if not path.is_file():
            raise MissingArtifactError(f"{self.run_id}/{kind}/{name}", command)
        return read_jsonl(path)

    def digest(self, kind: str, name: str) -> str:
        """파일의 sha256 (이번 명령에서 쓴 파일이면 기록된 값)"""
        path = self.path(kind, name)
        relative = self.relative(path)
        return self.written.get(relative) or sha256_bytes(path.read_bytes())

    def names(self, kind: str, prefix: str = "") -> List[str]:
        """종류 디렉토리 안의 파일 이름 (정렬됨)"""
        directory = self.root / kind
        if not directory.is_dir():
            return []
        return sorted(p.name for p in directory.iterdir() if p.is_file() and p.name.startswith(prefix))

    # 레지스트리

    def start_command(self, command: str, config_digest: str, seed: int, code_version: str) -> Optional[int]:
        """run_manifests 에 실행 시작을 기록하고 행 id 를 돌려줍니다."""
        if self.db_manager is None:
            return None
        with self.db_manager.get_session() as session:
            return RunManifest.start(session, self.run_id, command, config_digest, seed, code_version).id

    def finish_command(self, manifest_id: Optional[int], dataset_hashes: Dict[str, str],
                       model_ids: List[str], error: Optional[str] = None) -> None:
        if self.db_manager is None or manifest_id is None:
            return
        with self.db_manager.get_session() as session:
            manifest = RunManifest.get_by_id(session, manifest_id)
            if manifest is None:
                return
            if error is None:
                manifest.mark_succeeded(session, dataset_hashes, model_ids)
            else:
                manifest.mark_failed(session, error)
