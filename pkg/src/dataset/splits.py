"""
게임 단계 분할
"""

from typing import List, Tuple

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.question import Question, QuestionSet
from src.utils.seeding import keyed_rng


def split_phases(question_set: QuestionSet, n_phase1: int, seed: int) -> Tuple[List[Question], List[Question]]:
    """
    seed 로 결정되는 서로소 분할 (phase1 은 정확히 n_phase1 문항)

    두 목록 모두 원래 집합의 순서를 유지합니다.

    Raises:
        ValueError: n_phase1 < 0 또는 n_phase1 >= 문항 수
    """
    total = len(question_set)
    if n_phase1 < 0:
        raise ValueError(f"n_phase1 은 0 이상이어야 합니다: {n_phase1}")
    if n_phase1 >= total:
        raise ValueError(f"n_phase1({n_phase1})은 문항 수({total})보다 작아야 합니다.")

    chosen = set(keyed_rng(seed, 'split_phases', question_set.name)
                 .permutation(total)[:n_phase1].tolist())
    phase1 = [q for i, q in enumerate(question_set.questions) if i in chosen]
    phase2 = [q for i, q in enumerate(question_set.questions) if i not in chosen]
    return phase1, phase2
