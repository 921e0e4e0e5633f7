"""
모델 패키지 초기화
"""

from .question import OPTION_LABELS, Question, QuestionFormat, QuestionSet, QuestionSource, SurfaceFeatures
from .completion import Completion, CompletionRequest, DistributionSource, FinishReason, OptionDistribution
from .run_manifest import RunArtifact, RunManifest

__all__ = [
    'OPTION_LABELS',
    'Question',
    'QuestionFormat',
    'QuestionSet',
    'QuestionSource',
    'SurfaceFeatures',
    'Completion',
    'CompletionRequest',
    'DistributionSource',
    'FinishReason',
    'OptionDistribution',
    'RunArtifact',
    'RunManifest',
]
