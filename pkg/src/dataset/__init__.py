"""
데이터셋 패키지 초기화
"""

from .derivation import derive_multiple_choice, derive_short_answer, parse_distractors
from .features import DescriptorVocabulary, compute_surface_features, pct_non_alpha, surface_feature_columns
from .loader import load_question_set, normalize_text, quality_filter, save_question_set
from .splits import split_phases

__all__ = [
    'derive_multiple_choice',
    'derive_short_answer',
    'parse_distractors',
    'DescriptorVocabulary',
    'compute_surface_features',
    'pct_non_alpha',
    'surface_feature_columns',
    'load_question_set',
    'normalize_text',
    'quality_filter',
    'save_question_set',
    'split_phases',
]
