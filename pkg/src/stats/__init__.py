"""
통계 엔진 패키지
"""

from .descriptive import auc, auc_from_labels, entropy, pearson
from .resampling import bootstrap_ci, bootstrap_distribution
from .regression import (
    linear_slope,
    logistic_regression,
    multi_partial_correlation,
    partial_correlation,
)
from .hypothesis_tests import binomial_test, wilcoxon_signed_rank
from .bias import error_rates, pwc, twc

__all__ = [
    'auc',
    'auc_from_labels',
    'entropy',
    'pearson',
    'bootstrap_ci',
    'bootstrap_distribution',
    'linear_slope',
    'logistic_regression',
    'multi_partial_correlation',
    'partial_correlation',
    'binomial_test',
    'wilcoxon_signed_rank',
    'error_rates',
    'pwc',
    'twc',
]
