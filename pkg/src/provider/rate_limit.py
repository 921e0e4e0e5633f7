"""
토큰 버킷 요청 속도 제한
"""

import threading
import time
from typing import Callable, Optional


class TokenBucket:
    """분당 요청 수 기반 토큰 버킷"""

    def __init__(self, requests_per_minute: float, capacity: Optional[float] = None,
                 clock: Callable[[], float] = time.monotonic, sleep: Callable[[float], None] = time.sleep):
        if requests_per_minute <= 0:
            raise ValueError(f"requests_per_minute는 양수여야 합니다: {requests_per_minute}")
        self.rate = requests_per_minute / 60.0
        self.capacity = capacity if capacity is not None else max(1.0, requests_per_minute / 60.0)
        self.tokens = self.capacity
        self.clock = clock
        self.sleep = sleep
        self.updated = clock()
        self._lock = threading.Lock()

    def _refill(self) -> None:
        now = self.clock()
        elapsed = max(0.0, now - self.updated)
        self.tokens = min(self.capacity, self.tokens + elapsed * self.rate)
        self.updated = now

    def acquire(self) -> float:
        """
        토큰 하나를 얻을 때까지 기다립니다.

        Returns:
            기다린 총 시간 (초)
        """
        waited = 0.0
        while True:
            with self._lock:
                self._refill()
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return waited
                wait = (1.0 - self.tokens) / self.rate
            self.sleep(wait)
            waited += wait
