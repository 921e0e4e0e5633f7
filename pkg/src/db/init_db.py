"""
실행 레지스트리 데이터베이스 초기화 스크립트
"""

import sys
from pathlib import Path
from typing import Optional

from sqlalchemy import inspect

# 프로젝트 루트를 Python 경로에 추가
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.db.base import Base
from src.db.connection import DatabaseManager
from src.models.run_manifest import RunArtifact, RunManifest  # noqa: F401  (테이블 등록)
from src.utils.logger import get_logger


def init_database(db_manager: Optional[DatabaseManager] = None) -> bool:
    """레지스트리 테이블을 생성합니다."""
    logger = get_logger(__name__)
    owns_manager = db_manager is None

    try:
        db_manager = db_manager or DatabaseManager()

        if not db_manager.test_connection():
            logger.error("❌ 데이터베이스 연결 실패")
            return False

        db_manager.create_tables(Base)
        tables = inspect(db_manager.get_engine()).get_table_names()
        logger.debug(f"레지스트리 테이블: {', '.join(sorted(tables))}")
        return True

    except Exception as e:
        logger.error(f"데이터베이스 초기화 실패: {str(e)}")
        logger.exception("상세 에러 정보:")
        return False

    finally:
        if owns_manager and db_manager is not None:
            db_manager.close()


def drop_database(db_manager: Optional[DatabaseManager] = None) -> bool:
    """레지스트리 테이블을 삭제합니다. (주의: 모든 실행 기록이 삭제됩니다)"""
    logger = get_logger(__name__)
    owns_manager = db_manager is None

    try:
        db_manager = db_manager or DatabaseManager()
        logger.warning("⚠️ 레지스트리 테이블 삭제 (모든 실행 기록이 삭제됩니다)")
        db_manager.drop_tables(Base)
        return True

    except Exception as e:
        logger.error(f"데이터베이스 테이블 삭제 실패: {str(e)}")
        return False

    finally:
        if owns_manager and db_manager is not None:
            db_manager.close()


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description='실행 레지스트리 초기화 도구')
    parser.add_argument('action', choices=['init', 'drop', 'reset'],
                        help='수행할 작업: init(초기화), drop(삭제), reset(리셋)')
    args = parser.parse_args()

    if args.action == 'init':
        success = init_database()
    elif args.action == 'drop':
        success = drop_database()
    else:
        success = drop_database() and init_database()
    sys.exit(0 if success else 1)
