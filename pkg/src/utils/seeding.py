"""
키 기반 결정적 난수
(seed, 문항 id, 용도 ...) 로만 난수가 결정되므로 실행 순서나 동시성과 무관하게 재현됩니다.
"""

import hashlib
from typing import Union

import numpy as np

Key = Union[int, str]


def key_to_int(*parts: Key) -> int:
    """키 조각들을 안정적인 64비트 정수로 바꿉니다 (파이썬 hash() 는 프로세스마다 달라서 쓰지 않음)."""
    joined = '\x1f'.join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(joined.encode('utf-8')).digest()[:8], 'big')


def keyed_rng(seed: int, *keys: Key) -> np.random.Generator:
    """seed 와 키 조각으로 독립 난수 생성기를 만듭니다."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, key_to_int(*keys)])


def keyed_uniform(seed: int, *keys: Key) -> float:
    """[0, 1) 균등 난수 하나"""
    return float(keyed_rng(seed, *keys).random())
