"""
명명된 분석
자기 성찰 편상관, 단서 영향, 보정 AUC, 편향 점수, 변경률, 능력 추세, 패러다임 비교, 단서 오용 감사를
AnalysisResult 로 계산합니다.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import binomtest

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.analysis.tables import (
    SELF_REPORT_COLUMN,
    AnalysisSettings,
    build_baseline_table,
    complete_rows,
    cue_columns,
    descriptor_columns,
)
from src.games.second_chance import normalized_lift, paired_changes
from src.models.analysis import AnalysisResult, AnalysisSpec, BiasInputs, DesignMatrix, StatisticKind
from src.models.records import (
    STRATEGY_TESTS,
    BaselineRecord,
    Decision,
    SecondChanceSummary,
    SecondChanceTrial,
    StrategyClassification,
)
from src.stats.bias import error_rates, pwc, twc
from src.stats.descriptive import auc_from_labels, pearson
from src.stats.hypothesis_tests import binomial_test, wilcoxon_signed_rank
from src.stats.regression import linear_slope, logistic_regression, multi_partial_correlation, partial_correlation
from src.stats.resampling import bootstrap_distribution
from src.utils.errors import UndefinedStatisticError
from src.utils.logger import get_logger

logger = get_logger(__name__)

AUC_NULL = 0.5


def _controls(frame: pd.DataFrame, names: Sequence[str]) -> Optional[DesignMatrix]:
    if not names:
        return None
    return DesignMatrix.from_columns({name: frame[name].tolist() for name in names}, frame['decision'].tolist())


def _checked(table: pd.DataFrame, name: str, iv: Sequence[str], controls: Sequence[str], kind: StatisticKind,
             model_id: str, dataset: str) -> AnalysisSpec:
    """결정(decision)을 종속 변수로 하는 분석의 열 검사"""
    analysis = AnalysisSpec(name=name, dataset=dataset, model_id=model_id, dv='decision',
                            iv=list(iv), controls=list(controls), kind=kind)
    analysis.validate(list(table.columns))
    return analysis


def _bootstrapped(name: str, kind: StatisticKind, stat: Callable[[np.ndarray], float], data: np.ndarray,
                  settings: AnalysisSettings, **fields) -> AnalysisResult:
    """행 부트스트랩 백분위 구간을 붙인 결과"""
    value = stat(data)
    boot = bootstrap_distribution(stat, data, B=settings.resamples, seed=settings.seed)
    details = dict(fields.pop('details', {}))
    details.setdefault('kind', kind.value)
    return AnalysisResult.with_ci(name, value, boot.interval(settings.alpha), len(data), details=details, **fields)


# 위임 게임: 자기 성찰과 단서

def introspection_analysis(table: pd.DataFrame, settings: AnalysisSettings, model_id: str = "",
                           dataset: str = "") -> Tuple[AnalysisResult, AnalysisResult]:
    """
    (기준 정오 → 답변 결정, −엔트로피 → 답변 결정) 편상관

    표면 단서와 (있으면) 유도된 객관적 난이도를 통제합니다. 양수가 자기 성찰 방향입니다.

    Raises:
        UndefinedStatisticError: 표본 부족 또는 잔차 분산 없음
    """
    cues = cue_columns(table)
    for name, iv in (('correctness_decision', 'baseline_correct'), ('entropy_decision', 'neg_entropy')):
        _checked(table, name, [iv], cues, StatisticKind.PARTIAL_CORRELATION, model_id, dataset)
    frame = complete_rows(table, ['decision', 'baseline_correct'] + cues)
    correctness = partial_correlation(
        frame['baseline_correct'], frame['decision'], _controls(frame, cues),
        B=settings.resamples, alpha=settings.alpha, seed=settings.seed, name='correctness_decision',
        model_id=model_id, dataset=dataset,
        details={'kind': StatisticKind.PARTIAL_CORRELATION.value, 'dropped_rows': len(table) - len(frame)},
    )

    frame = complete_rows(table, ['decision', 'neg_entropy'] + cues)
    entropy_result = partial_correlation(
        frame['neg_entropy'], frame['decision'], _controls(frame, cues),
        B=settings.resamples, alpha=settings.alpha, seed=settings.seed, name='entropy_decision',
        model_id=model_id, dataset=dataset,
        details={'kind': StatisticKind.PARTIAL_CORRELATION.value, 'dropped_rows': len(table) - len(frame)},
    )
    return correctness, entropy_result


def control_impact_analysis(table: pd.DataFrame, settings: AnalysisSettings, variant: str = "A",
                            model_id: str = "", dataset: str = "") -> AnalysisResult:
    """
    단서 집합 → 답변 결정 다중 편상관

    variant A 는 기준 정오, B 는 −엔트로피를 통제합니다.
    """
    control = {'A': 'baseline_correct', 'B': 'neg_entropy'}.get(variant)
    if control is None:
        raise ValueError(f"알 수 없는 변형: {variant} (A 또는 B)")
    cues = cue_columns(table)
    _checked(table, f'control_impact_{variant}', cues, [control], StatisticKind.MULTI_PARTIAL_CORRELATION,
             model_id, dataset)
    frame = complete_rows(table, ['decision', control] + cues)
    return multi_partial_correlation(
        [frame[c] for c in cues], frame['decision'], _controls(frame, [control]),
        B=settings.resamples, alpha=settings.alpha, seed=settings.seed, name=f'control_impact_{variant}',
        model_id=model_id, dataset=dataset,
        details={'kind': StatisticKind.MULTI_PARTIAL_CORRELATION.value, 'cues': list(cues)},
    )


def cue_audit(table: pd.DataFrame, settings: AnalysisSettings, model_id: str = "",
              dataset: str = "") -> AnalysisResult:
    """
    단서 오용 감사

    답변 결정을 단서에 로지스틱 회귀한 뒤, 유의한 회귀 변수 중 계수 부호가 그 단서와 기준 정확도의
    상관 부호와 반대인 비율을 구합니다. 구간은 Clopper-Pearson 정확 구간입니다.

    Raises:
        UndefinedStatisticError: 유의한 회귀 변수가 없는 경우
    """
    cues = [c for c in cue_columns(table, include_objective=False) if table[c].nunique(dropna=True) > 1]
    if not cues:
        raise UndefinedStatisticError("변이가 있는 단서 열이 없습니다.", diagnostic={'columns': list(table.columns)})
    _checked(table, 'cue_misuse_fraction', cues, ['baseline_correct'], StatisticKind.LOGISTIC, model_id, dataset)
    frame = complete_rows(table, ['decision', 'baseline_correct'] + cues)
    fit = logistic_regression(_controls(frame, cues))
    coefficients = fit.as_dict()

    contradicting, significant = [], []
    for name in cues:
        entry = coefficients[name]
        if entry['p'] >= settings.alpha:
            continue
        try:
            accuracy_corr = pearson(frame[name], frame['baseline_correct'])
        except UndefinedStatisticError:
            continue
        significant.append(name)
        if np.sign(entry['coefficient']) != np.sign(accuracy_corr):
            contradicting.append(name)

    if not significant:
        raise UndefinedStatisticError("유의한 단서 회귀 변수가 없습니다.",
                                      diagnostic={'regressors': len(cues), 'separated': fit.separated})
    interval = binomtest(len(contradicting), len(significant)).proportion_ci(confidence_level=1.0 - settings.alpha)
    result = AnalysisResult(
        statistic_name='cue_misuse_fraction',
        value=len(contradicting) / len(significant),
        ci_low=float(interval.low),
        ci_high=float(interval.high),
        n=len(significant),
        controls=[],
        model_id=model_id,
        dataset=dataset,
        details={
            'kind': StatisticKind.LOGISTIC.value,
            'contradicting': contradicting,
            'significant': significant,
            'separated': fit.separated,
            'descriptor_regressors': descriptor_columns(frame),
        },
    )
    return result


def bias_analysis(table: pd.DataFrame, settings: AnalysisSettings, model_id: str = "",
                  dataset: str = "") -> Tuple[AnalysisResult, AnalysisResult]:
    """
    (TWC, PWC) 와 부트스트랩 구간

    양수는 답해야 할 때보다 더 많이 답하는 과신 방향입니다.
    """
    frame = complete_rows(table, ['decision', 'baseline_correct', 'top_probability', 'teammate_accuracy'])
    data = frame[['decision', 'baseline_correct', 'top_probability', 'teammate_accuracy']].to_numpy(dtype=float)

    def inputs(rows: np.ndarray) -> List[BiasInputs]:
        return [BiasInputs(decision=Decision.ANSWER if d == 1.0 else Decision.DELEGATE,
                           baseline_correct=bool(c), p=float(p), t=float(t)) for d, c, p, t in rows]

    def twc_stat(rows: np.ndarray) -> float:
        fpr, fnr = error_rates(inputs(rows))
        return twc(fpr, fnr, float(np.mean(rows[:, 3])))

    def pwc_stat(rows: np.ndarray) -> float:
        return pwc(inputs(rows))

    if len(data) == 0:
        raise UndefinedStatisticError("편향 분석에 쓸 시행이 없습니다.", diagnostic={'rows': len(table)})
    return (
        _bootstrapped('twc', StatisticKind.BIAS, twc_stat, data, settings, model_id=model_id, dataset=dataset),
        _bootstrapped('pwc', StatisticKind.BIAS, pwc_stat, data, settings, model_id=model_id, dataset=dataset),
    )


def change_rate_analysis(table: pd.DataFrame, settings: AnalysisSettings, model_id: str = "",
                         dataset: str = "") -> AnalysisResult:
    """답변 시행 중 기준 답과 달라진 비율"""
    frame = complete_rows(table[table['decision'] == 1.0], ['changed'])
    if frame.empty:
        raise UndefinedStatisticError("기준 답이 있는 답변 시행이 없습니다.", diagnostic={'rows': len(table)})
    data = frame['changed'].to_numpy(dtype=float)
    return _bootstrapped('game_change_rate', StatisticKind.RATE, lambda rows: float(np.mean(rows)), data,
                         settings, model_id=model_id, dataset=dataset)


def team_gain_analysis(table: pd.DataFrame, self_accuracy: float, settings: AnalysisSettings,
                       model_id: str = "", dataset: str = "") -> AnalysisResult:
    """팀 정확도 − max(자기 정확도, 팀원 정확도)"""
    frame = complete_rows(table, ['is_correct', 'teammate_accuracy'])
    if frame.empty:
        raise UndefinedStatisticError("채점된 시행이 없습니다.", diagnostic={'rows': len(table)})
    ceiling = max(self_accuracy, float(frame['teammate_accuracy'].iloc[0]))
    data = frame['is_correct'].to_numpy(dtype=float)
    return _bootstrapped('team_accuracy_gain', StatisticKind.DIFFERENCE, lambda rows: float(np.mean(rows)) - ceiling,
                         data, settings, model_id=model_id, dataset=dataset,
                         details={'self_accuracy': self_accuracy, 'ceiling': ceiling})


# 기준 테스트

def baseline_accuracy_summary(baseline: Sequence[BaselineRecord], settings: AnalysisSettings,
                              chance: Optional[float] = None, model_id: str = "",
                              dataset: str = "") -> AnalysisResult:
    """
    기준 정확도와 우연 수준 대비 정확 이항 검정

    significant 는 단측 p < alpha 입니다.
    """
    scored = [r for r in baseline if r.scored]
    if not scored:
        raise UndefinedStatisticError("채점된 기준 레코드가 없습니다.", diagnostic={'records': len(baseline)})
    chance = settings.mc_chance if chance is None else chance
    data = np.array([1.0 if r.is_correct else 0.0 for r in scored])
    result = _bootstrapped('baseline_accuracy', StatisticKind.RATE, lambda rows: float(np.mean(rows)), data,
                           settings, model_id=model_id, dataset=dataset)
    p = binomial_test(int(data.sum()), int(data.size), chance)
    result.details.update({'chance': chance, 'binomial_p': p})
    result.significant = p < settings.alpha
    return result


def calibration_auc_analysis(baseline: Sequence[BaselineRecord], settings: AnalysisSettings,
                             model_id: str = "", dataset: str = "") -> List[AnalysisResult]:
    """
    최상위 확률 AUC 와 −엔트로피 AUC (정답/오답 구분)

    Raises:
        UndefinedStatisticError: 분포가 있는 기준 레코드가 한 종류(정답 또는 오답)뿐인 경우
    """
    table = build_baseline_table(baseline)
    frame = complete_rows(table, ['top_probability', 'neg_entropy'])
    labels = frame['is_correct'].to_numpy(dtype=float)
    results = []
    for name, column in (('calibration_auc_top_probability', 'top_probability'),
                         ('calibration_auc_entropy', 'neg_entropy')):
        data = np.column_stack([frame[column].to_numpy(dtype=float), labels])
        auc_stat = lambda rows: auc_from_labels(rows[:, 0], rows[:, 1] == 1.0)
        if len(data) == 0:
            raise UndefinedStatisticError("분포가 있는 기준 레코드가 없습니다.", diagnostic={'records': len(baseline)})
        result = _bootstrapped(name, StatisticKind.AUC, auc_stat, data, settings, model_id=model_id, dataset=dataset,
                               details={'null': AUC_NULL})
        result.significant = not (result.ci_low <= AUC_NULL <= result.ci_high)
        results.append(result)
    return results


# 두 번째 기회 게임

def lift_analysis(game_trials: Sequence[SecondChanceTrial], neutral_trials: Sequence[SecondChanceTrial],
                  settings: AnalysisSettings, model_id: str = "", dataset: str = "") -> List[AnalysisResult]:
    """변경률 리프트와 정규화 리프트 (짝지은 문항 부트스트랩)"""
    pairs = paired_changes(game_trials, neutral_trials)
    if len(pairs) == 0:
        raise UndefinedStatisticError("두 변형 모두 유효한 문항이 없습니다.",
                                      diagnostic={'game': len(game_trials), 'neutral': len(neutral_trials)})

    def lift(rows: np.ndarray) -> float:
        return float(rows[:, 0].mean() - rows[:, 1].mean())

    def normalized(rows: np.ndarray) -> float:
        return normalized_lift(float(rows[:, 0].mean()), float(rows[:, 1].mean()))

    return [
        _bootstrapped('change_rate_lift', StatisticKind.DIFFERENCE, lift, pairs, settings,
                      model_id=model_id, dataset=dataset),
        _bootstrapped('normalized_lift', StatisticKind.DIFFERENCE, normalized, pairs, settings,
                      model_id=model_id, dataset=dataset),
    ]


def strategy_row(model_id: str, dataset: str, classification: StrategyClassification,
                 summary: SecondChanceSummary) -> Dict[str, Any]:
    """전략 분류 행렬의 한 행"""
    row: Dict[str, Any] = {'model_id': model_id, 'dataset': dataset}
    row.update({name: classification.tests[name].value for name in STRATEGY_TESTS})
    row['verdict'] = classification.verdict.value if classification.verdict else None
    row['neutral_entropy_check'] = classification.neutral_entropy_check.value
    row['normalized_lift'] = summary.normalized_lift
    row['n_game'] = summary.n_game
    row['n_neutral'] = summary.n_neutral
    return row


def strategy_matrix(rows: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """(모델, 데이터셋) 순으로 정렬한 전략 분류 행렬"""
    return sorted(rows, key=lambda r: (r['model_id'], r['dataset']))


# 모델 간 비교

def capability_trend(per_model: Sequence[Tuple[str, float, float]], settings: AnalysisSettings,
                     statistic: str = 'correctness_decision', dataset: str = "") -> AnalysisResult:
    """
    기준 정확도 순으로 정렬한 모델 순위에 대한 자기 성찰 값의 선형 기울기

    Args:
        per_model: (model_id, 기준 정확도, 편상관 값) 목록

    Raises:
        UndefinedStatisticError: 모델이 3개 미만인 경우
    """
    if len(per_model) < 3:
        raise UndefinedStatisticError("능력 추세에는 모델이 3개 이상 필요합니다.", diagnostic={'models': len(per_model)})
    ordered = sorted(per_model, key=lambda item: (item[1], item[0]))
    data = np.array([(rank, value) for rank, (_, _, value) in enumerate(ordered)], dtype=float)
    result = _bootstrapped(f'capability_trend_{statistic}', StatisticKind.SLOPE,
                           lambda rows: linear_slope(rows[:, 0], rows[:, 1]), data, settings, dataset=dataset,
                           details={'order': [model for model, _, _ in ordered]})
    return result


def decision_auc(frame: pd.DataFrame, score: str) -> float:
    """점수가 답변(양성)과 회피(음성)를 구분하는 AUC"""
    return auc_from_labels(frame[score].to_numpy(dtype=float), frame['decision'].to_numpy() == 1.0)


@dataclass
class ParadigmComparison:
    """위임/패스 패러다임 비교 결과"""
    results: List[AnalysisResult] = field(default_factory=list)
    wilcoxon: List[Dict[str, Any]] = field(default_factory=list)


def _across_models(score: str, deltas: Sequence[float]) -> Dict[str, Any]:
    row: Dict[str, Any] = {'score': score, 'models': len(deltas), 'p_two_sided': None, 'diagnostic': ''}
    if deltas and all(d == 0.0 for d in deltas):
        row['p_two_sided'] = 1.0
        return row
    try:
        row['p_two_sided'] = wilcoxon_signed_rank(list(deltas)).p_two_sided
    except UndefinedStatisticError as e:
        row['diagnostic'] = str(e)
    return row


def match_questions(delegate_tables: Dict[str, pd.DataFrame],
                    pass_tables: Dict[str, pd.DataFrame]) -> Tuple[Dict[str, pd.DataFrame], Dict[str, pd.DataFrame]]:
    """두 패러다임 모두에 있는 모델과 문항만 남깁니다 (위임 게임 1단계 문항은 패스 표에서 빠짐)."""
    delegate_out, pass_out = {}, {}
    for model_id in sorted(set(delegate_tables) & set(pass_tables)):
        delegate, passed = delegate_tables[model_id], pass_tables[model_id]
        common = set(delegate['question_id']) & set(passed['question_id'])
        delegate_out[model_id] = delegate[delegate['question_id'].isin(common)].reset_index(drop=True)
        pass_out[model_id] = passed[passed['question_id'].isin(common)].reset_index(drop=True)
    return delegate_out, pass_out


def paradigm_comparison(delegate_tables: Dict[str, pd.DataFrame], pass_tables: Dict[str, pd.DataFrame],
                        settings: AnalysisSettings, dataset: str = "") -> ParadigmComparison:
    """
    모델별 위임/패스 결정 AUC 와 차이, 모델 간 윌콕슨 검정, 자기 보고 비교

    Raises:
        ValueError: 두 패러다임의 모델 또는 문항 집합이 다른 경우
    """
    if set(delegate_tables) != set(pass_tables):
        raise ValueError(f"패러다임 간 모델이 다릅니다: {sorted(delegate_tables)} vs {sorted(pass_tables)}")

    comparison = ParadigmComparison()
    deltas: Dict[str, List[float]] = {}
    for model_id in sorted(delegate_tables):
        delegate, passed = delegate_tables[model_id], pass_tables[model_id]
        if set(delegate['question_id']) != set(passed['question_id']):
            raise ValueError(f"{model_id}: 위임/패스 게임의 문항 집합이 다릅니다.")
        scores = ['neg_entropy']
        if delegate['objective_percent'].notna().all() and passed['objective_percent'].notna().all():
            scores.insert(0, 'objective_percent')

        merged = delegate.merge(passed[['question_id', 'decision']], on='question_id', suffixes=('', '_pass'))
        for score in scores:
            frame = complete_rows(merged, [score])
            data = np.column_stack([frame[score], frame['decision'], frame['decision_pass']]).astype(float)

            def delta(rows: np.ndarray) -> float:
                return (auc_from_labels(rows[:, 0], rows[:, 1] == 1.0)
                        - auc_from_labels(rows[:, 0], rows[:, 2] == 1.0))

            for paradigm, column in (('delegate', 1), ('pass', 2)):
                stat = lambda rows, c=column: auc_from_labels(rows[:, 0], rows[:, c] == 1.0)
                comparison.results.append(_bootstrapped(
                    f'{paradigm}_auc_{score}', StatisticKind.AUC, stat, data, settings,
                    model_id=model_id, dataset=dataset, details={'null': AUC_NULL}))
            result = _bootstrapped(f'paradigm_auc_delta_{score}', StatisticKind.DIFFERENCE, delta, data, settings,
                                   model_id=model_id, dataset=dataset)
            comparison.results.append(result)
            deltas.setdefault(score, []).append(result.value)

        comparison.results.extend(self_report_analysis(delegate, settings, model_id, dataset))

    comparison.wilcoxon = [_across_models(score, values) for score, values in sorted(deltas.items())]
    return comparison


def self_report_analysis(table: pd.DataFrame, settings: AnalysisSettings, model_id: str = "",
                         dataset: str = "") -> List[AnalysisResult]:
    """
    유도된 자기 확신에 대한 단서 영향(−엔트로피 통제)과 −엔트로피 편상관(단서 통제)

    자기 확신이 없는 표는 빈 목록을 돌려줍니다.
    """
    if SELF_REPORT_COLUMN not in table or not table[SELF_REPORT_COLUMN].notna().any():
        return []
    cues = cue_columns(table)
    frame = complete_rows(table, [SELF_REPORT_COLUMN, 'neg_entropy'] + cues)
    y = frame[SELF_REPORT_COLUMN]
    entropy_controls = DesignMatrix.from_columns({'neg_entropy': frame['neg_entropy'].tolist()}, y.tolist())
    cue_controls = DesignMatrix.from_columns({c: frame[c].tolist() for c in cues}, y.tolist())
    results = []
    try:
        results.append(multi_partial_correlation(
            [frame[c] for c in cues], y, entropy_controls, B=settings.resamples, alpha=settings.alpha,
            seed=settings.seed, name='self_report_cue_impact', model_id=model_id, dataset=dataset))
        results.append(partial_correlation(
            frame['neg_entropy'], y, cue_controls, B=settings.resamples, alpha=settings.alpha,
            seed=settings.seed, name='self_report_entropy', model_id=model_id, dataset=dataset))
    except UndefinedStatisticError as e:
        logger.warning(f"{model_id}: 자기 보고 분석을 건너뜁니다 - {e}")
    return results
