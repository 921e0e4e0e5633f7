"""
메타인지 게임 패키지 초기화
"""

from .delegate import (
    AnswerOrAvoidGame,
    GameSettings,
    ParsedDecision,
    change_rate,
    parse_decision,
    pass_score,
    run_delegate_game,
    run_pass_game,
    simulate_teammate,
    team_accuracy,
    team_accuracy_gain,
)
from .prompts import build_delegate_prompt, build_pass_prompt, build_redo_prompt
from .second_chance import (
    SecondChanceGame,
    SecondChanceSettings,
    StrategyTestSettings,
    normalized_lift,
    run_second_chance,
    strategy_tests,
    summarize,
)

__all__ = [
    'AnswerOrAvoidGame',
    'GameSettings',
    'ParsedDecision',
    'change_rate',
    'parse_decision',
    'pass_score',
    'run_delegate_game',
    'run_pass_game',
    'simulate_teammate',
    'team_accuracy',
    'team_accuracy_gain',
    'build_delegate_prompt',
    'build_pass_prompt',
    'build_redo_prompt',
    'SecondChanceGame',
    'SecondChanceSettings',
    'StrategyTestSettings',
    'normalized_lift',
    'run_second_chance',
    'strategy_tests',
    'summarize',
]
