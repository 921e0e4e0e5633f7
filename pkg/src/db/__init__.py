"""
데이터베이스 패키지 초기화
"""

from .connection import DatabaseManager
from .base import Base, BaseModel, TimestampMixin

__all__ = [
    'DatabaseManager',
    'Base',
    'BaseModel',
    'TimestampMixin',
]
