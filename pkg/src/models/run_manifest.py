"""
실행 매니페스트 모델
명령 실행 한 번의 입력 해시와 산출물 목록을 레지스트리에 기록합니다.
"""

from typing import Any, Dict, List, Optional

from sqlalchemy import Column, DateTime, Integer, String, Text, JSON
from sqlalchemy.orm import Session

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.db.base import BaseModel, utcnow


class RunManifest(BaseModel):
    """명령 실행 기록"""

    __tablename__ = 'run_manifests'

    run_id = Column(String(64), nullable=False, index=True, comment='실행 ID')
    command = Column(String(50), nullable=False, comment='하위 명령 이름')
    config_hash = Column(String(64), nullable=False, comment='설정 SHA-256')
    dataset_hashes = Column(JSON, nullable=False, default=dict, comment='데이터셋 이름 → SHA-256')
    model_ids = Column(JSON, nullable=False, default=list, comment='사용한 모델 ID 목록')
    seed = Column(Integer, nullable=False, comment='실행 시드')
    code_version = Column(String(50), nullable=False, comment='하네스 코드 버전')
    status = Column(String(20), nullable=False, default='running', comment='running, succeeded, failed')
    started_at = Column(DateTime, nullable=False, default=utcnow)
    finished_at = Column(DateTime, nullable=True)
    error_message = Column(Text, nullable=True)

    def __repr__(self):
        return f"<RunManifest(run_id='{self.run_id}', command='{self.command}', status='{self.status}')>"

    @classmethod
    def start(cls, session: Session, run_id: str, command: str, config_hash: str, seed: int,
              code_version: str, dataset_hashes: Optional[Dict[str, str]] = None,
              model_ids: Optional[List[str]] = None) -> 'RunManifest':
        """실행 시작을 기록합니다."""
        manifest = cls(
            run_id=run_id,
            command=command,
            config_hash=config_hash,
            dataset_hashes=dict(dataset_hashes or {}),
            model_ids=list(model_ids or []),
            seed=seed,
            code_version=code_version,
            status='running',
            started_at=utcnow(),
        )
        return manifest.save(session)

    def mark_succeeded(self, session: Session, dataset_hashes: Optional[Dict[str, str]] = None,
                       model_ids: Optional[List[str]] = None) -> 'RunManifest':
        """성공으로 표시합니다."""
        changes: Dict[str, Any] = {'status': 'succeeded', 'finished_at': utcnow()}
        if dataset_hashes is not None:
            changes['dataset_hashes'] = dict(dataset_hashes)
        if model_ids is not None:
            changes['model_ids'] = list(model_ids)
        return self.update(session, **changes)

    def mark_failed(self, session: Session, error_message: str) -> 'RunManifest':
        """실패로 표시합니다."""
        return self.update(session, status='failed', finished_at=utcnow(), error_message=error_message)

    @classmethod
    def history(cls, session: Session, run_id: str) -> List['RunManifest']:
        """실행 ID의 명령 기록을 시간 순으로 반환합니다."""
        return session.query(cls).filter(cls.run_id == run_id).order_by(cls.id).all()


class RunArtifact(BaseModel):
    """실행 산출물 파일"""

    __tablename__ = 'run_artifacts'

    run_id = Column(String(64), nullable=False, index=True)
    kind = Column(String(50), nullable=False, comment='datasets, records, tables, manifest')
    relative_path = Column(String(500), nullable=False, comment='results/<run-id> 기준 상대 경로')
    sha256 = Column(String(64), nullable=False)
    record_count = Column(Integer, nullable=True)

    def __repr__(self):
        return f"<RunArtifact(run_id='{self.run_id}', path='{self.relative_path}')>"

    @classmethod
    def register(cls, session: Session, run_id: str, kind: str, relative_path: str,
                 sha256: str, record_count: Optional[int] = None) -> 'RunArtifact':
        """산출물을 등록합니다. 같은 경로와 해시가 이미 있으면 기존 행을 돌려줍니다."""
        existing = (
            session.query(cls)
            .filter(cls.run_id == run_id, cls.relative_path == relative_path, cls.sha256 == sha256)
            .first()
        )
        if existing is not None:
            return existing
        artifact = cls(run_id=run_id, kind=kind, relative_path=relative_path,
                       sha256=sha256, record_count=record_count)
        return artifact.save(session)

    @classmethod
    def for_run(cls, session: Session, run_id: str) -> List['RunArtifact']:
        return session.query(cls).filter(cls.run_id == run_id).order_by(cls.relative_path).all()
