"""
데이터베이스 연결 모듈
실행 레지스트리용 SQLite 및 PostgreSQL 연결을 관리합니다.
"""

from pathlib import Path
from typing import Any, Dict, Optional
import sys

from sqlalchemy import Engine, create_engine, text
from sqlalchemy.orm import Session, sessionmaker
from sqlalchemy.pool import QueuePool, StaticPool

# 프로젝트 루트를 Python 경로에 추가
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.utils.logger import get_logger

# 설정 모듈 임포트
try:
    from config.settings import get_database_config
except ImportError:
    # 설정 모듈이 없는 경우 기본값 사용
    def get_database_config():
        return {
            'type': 'sqlite',
            'sqlite_path': 'results/registry.db',
        }


class DatabaseManager:
    """데이터베이스 연결 및 세션 관리를 담당하는 클래스"""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config if config is not None else get_database_config()
        self.logger = get_logger(__name__)
        self.engine: Optional[Engine] = None
        self.SessionLocal: Optional[sessionmaker] = None
        self._setup_database()

    def _setup_database(self):
        """데이터베이스 연결을 설정합니다."""
        db_type = self.config.get('type', 'sqlite')

        if db_type == 'sqlite':
            self._setup_sqlite()
        elif db_type == 'postgresql':
            self._setup_postgresql()
        else:
            raise ValueError(f"지원하지 않는 데이터베이스 타입: {db_type}")

        # 세션 팩토리 생성
        self.SessionLocal = sessionmaker(
            autocommit=False,
            autoflush=False,
            expire_on_commit=False,
            bind=self.engine
        )

    def _setup_sqlite(self):
        """SQLite 데이터베이스를 설정합니다."""
        sqlite_path = str(self.config.get('sqlite_path', 'results/registry.db'))

        if sqlite_path == ':memory:':
            self.engine = create_engine(
                "sqlite://",
                connect_args={"check_same_thread": False},
                poolclass=StaticPool,
                echo=False
            )
        else:
            # 데이터베이스 디렉토리 생성
            Path(sqlite_path).parent.mkdir(parents=True, exist_ok=True)
            self.engine = create_engine(
                f"sqlite:///{sqlite_path}",
                connect_args={"check_same_thread": False},
                poolclass=QueuePool,
                pool_size=1,
                max_overflow=0,
                echo=False
            )

        self.logger.debug(f"SQLite 데이터베이스 연결 설정 완료: {sqlite_path}")

    def _setup_postgresql(self):
        """PostgreSQL 데이터베이스를 설정합니다."""
        host = self.config.get('host', 'localhost')
        port = self.config.get('port', 5432)
        user = self.config.get('user', 'postgres')
        password = self.config.get('password', '')
        dbname = self.config.get('dbname', 'metacog_registry')

        self.engine = create_engine(
            f"postgresql://{user}:{password}@{host}:{port}/{dbname}",
            poolclass=QueuePool,
            pool_size=self.config.get('pool_size', 5),
            max_overflow=self.config.get('max_overflow', 10),
            pool_pre_ping=True,  # 연결 상태 확인
            echo=False
        )

        self.logger.debug(f"PostgreSQL 데이터베이스 연결 설정 완료: {host}:{port}/{dbname}")

    def get_engine(self) -> Engine:
        """데이터베이스 엔진을 반환합니다."""
        if not self.engine:
            raise RuntimeError("데이터베이스 엔진이 초기화되지 않았습니다.")
        return self.engine

    def get_session(self) -> Session:
        """데이터베이스 세션을 반환합니다."""
        if not self.SessionLocal:
            raise RuntimeError("데이터베이스 세션이 초기화되지 않았습니다.")
        return self.SessionLocal()

    def test_connection(self) -> bool:
        """데이터베이스 연결을 테스트합니다."""
        try:
            with self.get_session() as session:
                session.execute(text("SELECT 1"))
                return True
        except Exception as e:
            self.logger.error(f"데이터베이스 연결 테스트 실패: {e}")
            return False

    def create_tables(self, base):
        """데이터베이스 테이블을 생성합니다."""
        base.metadata.create_all(bind=self.engine)
        self.logger.debug("데이터베이스 테이블 생성 완료")

    def drop_tables(self, base):
        """데이터베이스 테이블을 삭제합니다."""
        base.metadata.drop_all(bind=self.engine)
        self.logger.debug("데이터베이스 테이블 삭제 완료")

    def close(self):
        """데이터베이스 연결을 종료합니다."""
        if self.engine:
            self.engine.dispose()
            self.logger.debug("데이터베이스 연결이 종료되었습니다.")


# 전역 데이터베이스 매니저 (처음 사용할 때 생성)
_db_manager: Optional[DatabaseManager] = None


def get_db_manager() -> DatabaseManager:
    """데이터베이스 매니저를 반환합니다."""
    global _db_manager
    if _db_manager is None:
        _db_manager = DatabaseManager()
    return _db_manager


def get_session() -> Session:
    """데이터베이스 세션을 반환합니다."""
    return get_db_manager().get_session()
