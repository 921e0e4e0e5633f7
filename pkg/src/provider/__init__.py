"""
프로바이더 패키지 초기화
"""

from .base import CachedProvider, Provider
from .cache import CompletionCache
from .distributions import (
    ResampledAnswers,
    normalize_token,
    option_distribution_by_resampling,
    option_distribution_from_logprobs,
    resample_answers,
)
from .factory import ProviderRegistry
from .scripted import ScriptRule, ScriptedProvider, logprob_completion

__all__ = [
    'CachedProvider',
    'Provider',
    'CompletionCache',
    'ResampledAnswers',
    'normalize_token',
    'option_distribution_by_resampling',
    'option_distribution_from_logprobs',
    'resample_answers',
    'ProviderRegistry',
    'ScriptRule',
    'ScriptedProvider',
    'logprob_completion',
]
