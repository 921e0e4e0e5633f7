"""
답변/위임 편향 점수 (TWC, PWC)
"""

import math
from typing import Sequence, Tuple

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.analysis import BiasInputs
from src.models.records import Decision
from src.utils.errors import UndefinedStatisticError


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name}는 [0,1] 범위여야 합니다: {value}")


def twc(fpr: float, fnr: float, teammate_accuracy: float) -> float:
    """
    팀원 가중 확신 점수 TWC = FPR·t − FNR·(1 − t)

    양수면 과신(답해야 할 때보다 더 많이 답함), 음수면 과소 확신입니다.
    """
    _check_unit('fpr', fpr)
    _check_unit('fnr', fnr)
    _check_unit('teammate_accuracy', teammate_accuracy)
    return fpr * teammate_accuracy - fnr * (1.0 - teammate_accuracy)


def error_rates(trials: Sequence[BiasInputs]) -> Tuple[float, float]:
    """
    (FPR, FNR)

    FPR = 기준 테스트에서 틀린 문항 중 답한 비율,
    FNR = 기준 테스트에서 맞힌 문항 중 위임한 비율.

    Raises:
        UndefinedStatisticError: 맞힌 문항이나 틀린 문항이 없는 경우
    """
    wrong = [t for t in trials if not t.baseline_correct]
    right = [t for t in trials if t.baseline_correct]
    if not wrong or not right:
        raise UndefinedStatisticError(
            "FPR/FNR은 기준 정답과 오답이 모두 있어야 정의됩니다.",
            diagnostic={'baseline_wrong': len(wrong), 'baseline_right': len(right)},
        )
    fpr = sum(1 for t in wrong if t.decision == Decision.ANSWER) / len(wrong)
    fnr = sum(1 for t in right if t.decision != Decision.ANSWER) / len(right)
    return fpr, fnr


def pwc(trials: Sequence[BiasInputs]) -> float:
    """
    확률 가중 확신 점수

    PWC = (Σ_{m<0, 답함} |p−t| − Σ_{m>0, 위임} |p−t|) / (두 합의 합).
    m = 0 인 시행은 제외하고, 두 합이 모두 0이면 0을 돌려줍니다.
    """
    over = math.fsum(abs(t.m) for t in trials if t.m < 0 and t.decision == Decision.ANSWER)
    under = math.fsum(abs(t.m) for t in trials if t.m > 0 and t.decision != Decision.ANSWER)
    total = over + under
    if total == 0.0:
        return 0.0
    return (over - under) / total
