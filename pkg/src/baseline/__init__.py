"""
기준 능력 테스트 패키지 초기화
"""

from .elicitation import elicit_percent, percent_from_bins, run_elicitation, weighted_percent
from .parsing import RefusalKind, classify_refusal, normalize_answer, parse_option_label, parse_yes_no
from .runner import BaselineRunner, BaselineSettings, accuracy, run_baseline
from .scoring import JudgePanel, ShortAnswerScore, consensus, score_mc, score_short_answer

__all__ = [
    'elicit_percent',
    'percent_from_bins',
    'run_elicitation',
    'weighted_percent',
    'RefusalKind',
    'classify_refusal',
    'normalize_answer',
    'parse_option_label',
    'parse_yes_no',
    'BaselineRunner',
    'BaselineSettings',
    'accuracy',
    'run_baseline',
    'JudgePanel',
    'ShortAnswerScore',
    'consensus',
    'score_mc',
    'score_short_answer',
]
