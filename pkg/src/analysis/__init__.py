"""
분석 패키지 초기화
"""

from .analyses import (
    ParadigmComparison,
    baseline_accuracy_summary,
    bias_analysis,
    calibration_auc_analysis,
    capability_trend,
    change_rate_analysis,
    control_impact_analysis,
    cue_audit,
    introspection_analysis,
    lift_analysis,
    match_questions,
    paradigm_comparison,
    self_report_analysis,
    strategy_matrix,
    strategy_row,
    team_gain_analysis,
)
from .report import emit_report, report_from_records, report_to_records, results_frame
from .tables import AnalysisSettings, build_baseline_table, build_decision_table, cue_columns

__all__ = [
    'ParadigmComparison',
    'baseline_accuracy_summary',
    'bias_analysis',
    'calibration_auc_analysis',
    'capability_trend',
    'change_rate_analysis',
    'control_impact_analysis',
    'cue_audit',
    'introspection_analysis',
    'lift_analysis',
    'match_questions',
    'paradigm_comparison',
    'self_report_analysis',
    'strategy_matrix',
    'strategy_row',
    'team_gain_analysis',
    'emit_report',
    'report_from_records',
    'report_to_records',
    'results_frame',
    'AnalysisSettings',
    'build_baseline_table',
    'build_decision_table',
    'cue_columns',
]
