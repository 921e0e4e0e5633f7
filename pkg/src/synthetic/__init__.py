"""
합성 피험자 패키지 초기화
"""

from .subject import SyntheticSubject, synth_baseline, teammate_accuracy_from_prompt
from .world import (
    SubjectParams,
    SyntheticWorld,
    baseline_belief,
    delegate_policy,
    expected_accuracy,
    expected_change_rates,
    expected_normalized_lift,
    internal_confidence,
    pass_policy,
    second_chance_behavior,
)

__all__ = [
    'SyntheticSubject',
    'synth_baseline',
    'teammate_accuracy_from_prompt',
    'SubjectParams',
    'SyntheticWorld',
    'baseline_belief',
    'delegate_policy',
    'expected_accuracy',
    'expected_change_rates',
    'expected_normalized_lift',
    'internal_confidence',
    'pass_policy',
    'second_chance_behavior',
]
