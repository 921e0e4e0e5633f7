"""
분석용 결합 표
게임 시행, 기준 레코드, 표면 특징, 유도 백분율을 문항 단위 DataFrame 으로 합칩니다.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence

import numpy as np
import pandas as pd

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.dataset.features import DescriptorVocabulary, surface_feature_columns
from src.models.question import Question
from src.models.records import BaselineRecord, Decision, DelegateTrial, ElicitedKind, ElicitedPercent

BASE_CUE_COLUMNS = ('question_length', 'pct_non_alpha')
OBJECTIVE_COLUMN = 'objective_percent'
SELF_REPORT_COLUMN = 'self_percent'


@dataclass
class AnalysisSettings:
    """분석 공통 설정"""
    resamples: int = 2000
    alpha: float = 0.05
    seed: int = 0
    exclude_changed: bool = False
    mc_chance: float = 0.25

    @classmethod
    def from_config(cls, config: dict) -> 'AnalysisSettings':
        stats = config.get('stats', {})
        return cls(
            resamples=int(stats.get('bootstrap_resamples', 2000)),
            alpha=float(stats.get('alpha', 0.05)),
            seed=int(config.get('run', {}).get('seed', 0)),
            exclude_changed=bool(config.get('analysis', {}).get('exclude_changed', False)),
        )


def _elicited_map(elicited: Iterable[ElicitedPercent], kind: ElicitedKind, model_id: str) -> Dict[str, float]:
    return {e.question_id: e.percent for e in elicited if e.kind == kind and e.model_id == model_id}


def build_decision_table(trials: Sequence[DelegateTrial], baseline: Sequence[BaselineRecord],
                         questions: Sequence[Question], elicited: Iterable[ElicitedPercent] = (),
                         exclude_changed: bool = False) -> pd.DataFrame:
    """
    결정 분석용 표 (문항 id 순)

    제외된 시행과 기준 정오가 없는 시행은 빠집니다. decision 은 답변=1, 위임/패스=0 이고
    엔트로피는 부호를 뒤집은 neg_entropy 도 함께 둡니다 (양수 = 자기 성찰 방향).
    """
    baseline_by_ref = {r.ref: r for r in baseline}
    question_by_id = {q.id: q for q in questions}
    elicited = list(elicited)

    rows = []
    for trial in trials:
        record = baseline_by_ref.get(trial.baseline_ref)
        if trial.excluded or trial.decision is None or record is None or record.is_correct is None:
            continue
        if trial.question_id not in question_by_id:
            continue
        if exclude_changed and trial.changed_from_baseline:
            continue
        rows.append({
            'question_id': trial.question_id,
            'model_id': trial.model_id,
            'game': trial.game.value,
            'decision': 1.0 if trial.decision == Decision.ANSWER else 0.0,
            'baseline_correct': 1.0 if record.is_correct else 0.0,
            'entropy': record.entropy if record.entropy is not None else np.nan,
            'top_probability': record.top_probability if record.top_probability is not None else np.nan,
            'changed': np.nan if trial.changed_from_baseline is None else float(trial.changed_from_baseline),
            'is_correct': np.nan if trial.is_correct is None else float(trial.is_correct),
            'teammate_accuracy': np.nan if trial.teammate_accuracy is None else trial.teammate_accuracy,
        })

    table = pd.DataFrame(rows, columns=[
        'question_id', 'model_id', 'game', 'decision', 'baseline_correct', 'entropy', 'top_probability',
        'changed', 'is_correct', 'teammate_accuracy',
    ])
    table = table.sort_values('question_id', kind='mergesort').reset_index(drop=True)
    table['neg_entropy'] = -table['entropy']

    ordered = [question_by_id[qid] for qid in table['question_id']]
    vocabulary = DescriptorVocabulary.from_questions(questions)
    for name, values in surface_feature_columns(ordered, vocabulary).items():
        table[name] = pd.Series(values, dtype=float)

    model_id = trials[0].model_id if trials else ""
    objective = _elicited_map(elicited, ElicitedKind.OBJECTIVE_DIFFICULTY, model_id)
    self_report = _elicited_map(elicited, ElicitedKind.SELF_CONFIDENCE, model_id)
    table[OBJECTIVE_COLUMN] = table['question_id'].map(objective).astype(float)
    table[SELF_REPORT_COLUMN] = table['question_id'].map(self_report).astype(float)
    return table


def build_baseline_table(baseline: Sequence[BaselineRecord]) -> pd.DataFrame:
    """채점된 기준 레코드 표"""
    rows = [{
        'question_id': r.question_id,
        'model_id': r.model_id,
        'is_correct': 1.0 if r.is_correct else 0.0,
        'top_probability': r.top_probability if r.top_probability is not None else np.nan,
        'entropy': r.entropy if r.entropy is not None else np.nan,
    } for r in baseline if r.scored]
    table = pd.DataFrame(rows, columns=['question_id', 'model_id', 'is_correct', 'top_probability', 'entropy'])
    table['neg_entropy'] = -table['entropy']
    return table.sort_values(['model_id', 'question_id'], kind='mergesort').reset_index(drop=True)


def cue_columns(table: pd.DataFrame, include_objective: bool = True) -> List[str]:
    """표면 단서 열: 길이, 비알파벳 비율, 서술자 지시 변수, (모든 행에 있으면) 유도된 객관적 난이도"""
    names = list(BASE_CUE_COLUMNS) + descriptor_columns(table)
    if include_objective and OBJECTIVE_COLUMN in table and len(table) and table[OBJECTIVE_COLUMN].notna().all():
        names.append(OBJECTIVE_COLUMN)
    return names


def complete_rows(table: pd.DataFrame, columns: Sequence[str]) -> pd.DataFrame:
    """지정한 열에 결측이 없는 행만 남깁니다."""
    return table.dropna(subset=list(columns)).reset_index(drop=True)


def descriptor_columns(table: pd.DataFrame) -> List[str]:
    return [c for c in table.columns if '=' in c]
