"""
파이프라인 명령
ingest, derive, baseline, elicit, delegate, pass, second_chance, analyze, report 를
실행 저장소 위에서 수행하고 명령마다 매니페스트를 남깁니다.
"""

import copy
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

# 프로젝트 루트를 Python 경로에 추가
import sys
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from config.settings import config_hash
from src.analysis.analyses import (
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
    strategy_matrix,
    strategy_row,
    team_gain_analysis,
)
from src.analysis.report import emit_report, report_from_records, report_to_records
from src.analysis.tables import AnalysisSettings, build_decision_table
from src.baseline.elicitation import run_elicitation
from src.baseline.runner import BaselineSettings, accuracy, run_baseline
from src.baseline.scoring import JudgePanel
from src.dataset.derivation import derive_multiple_choice, derive_short_answer
from src.dataset.loader import load_question_set, quality_filter
from src.games.delegate import GameSettings, run_delegate_game, run_pass_game
from src.games.second_chance import (
    SecondChanceSettings,
    StrategyTestSettings,
    run_second_chance,
    strategy_tests,
    summarize,
)
from src.models.analysis import AnalysisResult, Report
from src.models.question import Question, QuestionFormat, QuestionSet, QuestionSource
from src.models.records import (
    BaselineRecord,
    DelegateTrial,
    ElicitedKind,
    ElicitedPercent,
    Regime,
    SecondChanceTrial,
    SecondChanceVariant,
    TeammateProfile,
)
from src.provider.base import Provider
from src.provider.cache import CompletionCache
from src.provider.factory import ProviderRegistry
from src.services.run_store import RunStore, default_run_id, slug
from src.synthetic.subject import SyntheticSubject
from src.db.connection import DatabaseManager
from src.utils.errors import ConfigError, DatasetError, UndefinedStatisticError
from src.utils.logger import StructuredReport, get_logger, get_logger_manager, log_with_context

CODE_VERSION = "0.1.0"
COMMANDS = ('ingest', 'derive', 'baseline', 'elicit', 'delegate', 'pass', 'second_chance', 'analyze', 'report')


@dataclass
class PipelineOptions:
    """CLI 플래그 (None 이면 설정 파일 값을 씁니다)"""
    run_id: Optional[str] = None
    seed: Optional[int] = None
    cache_dir: Optional[str] = None
    offline: Optional[bool] = None
    results_dir: Optional[str] = None
    variants: Optional[List[str]] = None
    alpha: Optional[float] = None
    teammate_accuracy: Optional[float] = None
    phase1_size: Optional[int] = None
    strict_format: Optional[bool] = None


def apply_options(config: Dict[str, Any], options: PipelineOptions) -> Dict[str, Any]:
    """플래그를 설정 사본에 덮어씁니다."""
    config = copy.deepcopy(config)
    run = config.setdefault('run', {})
    if options.seed is not None:
        run['seed'] = int(options.seed)
    if options.offline is not None:
        run['offline'] = bool(options.offline)
    if options.results_dir is not None:
        run['results_dir'] = options.results_dir
    if options.cache_dir is not None:
        config.setdefault('cache', {})['directory'] = options.cache_dir
    if options.alpha is not None:
        config.setdefault('second_chance', {})['alpha'] = float(options.alpha)
    if options.variants:
        config.setdefault('second_chance', {})['variants'] = [variant_from_flag(v).value for v in options.variants]
    delegate = config.setdefault('delegate_game', {})
    if options.teammate_accuracy is not None:
        delegate['teammate_accuracy'] = float(options.teammate_accuracy)
    if options.phase1_size is not None:
        delegate['phase1_size'] = int(options.phase1_size)
    if options.strict_format is not None:
        delegate['strict_format'] = bool(options.strict_format)
    return config


def variant_from_flag(value: str) -> SecondChanceVariant:
    for variant in SecondChanceVariant:
        if variant.value.lower() == str(value).lower():
            return variant
    raise ConfigError(f"알 수 없는 두 번째 기회 변형: {value}", hint="incorrect 또는 neutral")


class Pipeline:
    """
    실행 하나의 명령 모음

    모든 무작위성은 run.seed 에서 나옵니다. 산출물은 results/<run-id> 아래에만 쓰며
    같은 설정과 시드로 다시 실행하면 같은 바이트를 씁니다.
    """

    def __init__(self, config: Dict[str, Any], options: Optional[PipelineOptions] = None,
                 registry: Optional[ProviderRegistry] = None, db_manager: Optional[DatabaseManager] = None):
        self.options = options or PipelineOptions()
        self.config = apply_options(config, self.options)
        self.seed = int(self.config.get('run', {}).get('seed', 0))
        self.config_digest = config_hash(self.config)
        self.run_id = self.options.run_id or default_run_id(self.config_digest, self.seed)
        results_dir = self.config.get('run', {}).get('results_dir', 'results')
        self.store = RunStore(results_dir, self.run_id, db_manager)
        if registry is None:
            cache_config = self.config.get('cache', {})
            cache = CompletionCache(cache_config.get('directory', '.cache/completions'),
                                    enabled=bool(cache_config.get('enabled', True)))
            registry = ProviderRegistry(self.config, cache=cache)
        self.registry = registry
        self.logger = get_logger(__name__)
        self._inputs: Dict[str, str] = {}
        self._dataset_hashes: Dict[str, str] = {}
        self._model_ids: set = set()

    # 실행

    def run(self, command: str) -> Dict[str, Any]:
        """
        명령 하나를 실행하고 매니페스트를 돌려줍니다.

        Raises:
            ValueError: 알 수 없는 명령
            HarnessError: 각 명령의 오류 (레지스트리에는 failed 로 기록)
        """
        if command not in COMMANDS:
            raise ValueError(f"알 수 없는 명령: {command} (사용 가능: {', '.join(COMMANDS)})")
        handler: Callable[[], None] = getattr(self, f'cmd_{command}')

        self.store.written = {}
        self._inputs, self._dataset_hashes, self._model_ids = {}, {}, set()
        manager = get_logger_manager()
        manager.attach_run_directory(self.store.root / 'logs')
        manifest_id = self.store.start_command(command, self.config_digest, self.seed, CODE_VERSION)
        log_with_context("INFO", f"명령 시작: {command}", run_id=self.run_id, command=command,
                         config_hash=self.config_digest[:12], seed=self.seed)
        try:
            handler()
            outputs = {path: digest for path, digest in sorted(self.store.written.items())}
            manifest = {
                'run_id': self.run_id,
                'command': command,
                'config_hash': self.config_digest,
                'seed': self.seed,
                'code_version': CODE_VERSION,
                'dataset_hashes': dict(sorted(self._dataset_hashes.items())),
                'model_ids': sorted(self._model_ids),
                'inputs': dict(sorted(self._inputs.items())),
                'outputs': outputs,
            }
            self.store.write_manifest(command, manifest)
            self.store.finish_command(manifest_id, manifest['dataset_hashes'], manifest['model_ids'])
            log_with_context("INFO", f"✅ 명령 완료: {command}", run_id=self.run_id, command=command,
                             outputs=len(outputs))
            return manifest
        except Exception as e:
            self.store.finish_command(manifest_id, self._dataset_hashes, sorted(self._model_ids), error=str(e))
            self.logger.error(f"❌ 명령 실패: {command} - {e}")
            raise
        finally:
            manager.detach_run_handlers()

    # 공통 입력

    def _section(self, name: str) -> Dict[str, Any]:
        return self.config.get(name, {}) or {}

    def _source_of(self, dataset: str) -> QuestionSource:
        entry = self._section('datasets').get(dataset) or self._section('derivations').get(dataset)
        if entry is None or 'source' not in entry:
            raise ConfigError(f"데이터셋 '{dataset}'의 source 를 알 수 없습니다.",
                              hint="datasets 또는 derivations 섹션에 추가하세요.")
        return QuestionSource(entry['source'])

    def _track_input(self, kind: str, name: str) -> str:
        digest = self.store.digest(kind, name)
        self._inputs[f'{kind}/{name}'] = digest
        return digest

    def load_dataset(self, dataset: str) -> QuestionSet:
        """
        Raises:
            MissingArtifactError: 수집(또는 파생) 전인 경우
        """
        command = 'derive' if dataset in self._section('derivations') else 'ingest'
        records = self.store.read_records('datasets', f'{dataset}.jsonl', command)
        self._dataset_hashes[dataset] = self._track_input('datasets', f'{dataset}.jsonl')
        questions = [Question.from_record(r, line) for line, r in enumerate(records, start=1)]
        return QuestionSet(name=dataset, source=self._source_of(dataset), questions=questions)

    def _records(self, prefix: str, model: str, dataset: str, command: str,
                 parse: Callable[[Dict[str, Any]], Any], required: bool = True) -> List[Any]:
        name = f'{prefix}__{slug(model, dataset)}.jsonl'
        if not required and not self.store.exists('records', name):
            return []
        records = [parse(r) for r in self.store.read_records('records', name, command)]
        self._track_input('records', name)
        return records

    def load_baseline(self, model: str, dataset: str) -> List[BaselineRecord]:
        return self._records('baseline', model, dataset, 'baseline', BaselineRecord.from_record)

    def _provider(self, name: str, question_set: Optional[QuestionSet] = None) -> Provider:
        provider = self.registry.get(name)
        if question_set is not None and isinstance(provider, SyntheticSubject):
            provider.bind_questions(question_set.questions)
        self._model_ids.add(provider.model_id)
        return provider

    def _panel(self, provider: Provider, question_set: QuestionSet) -> Optional[JudgePanel]:
        if question_set.format != QuestionFormat.SHORT_ANSWER:
            return None
        judges = self.registry.judges_for(list(self._section('baseline').get('judges', [])), provider.family)
        for judge in judges:
            self._model_ids.add(judge.model_id)
        return JudgePanel(judges, provider.family)

    def _models(self) -> List[str]:
        return list(self._section('baseline').get('models', []))

    def _datasets(self) -> List[str]:
        datasets = self._section('baseline').get('datasets')
        return list(datasets) if datasets else list(self._section('datasets'))

    def _write(self, prefix: str, model: str, dataset: str, records: Sequence[Any]) -> None:
        name = f'{prefix}__{slug(model, dataset)}.jsonl'
        digest, count = self.store.write_records('records', name, [r.to_record() for r in records])
        self.logger.info(f"레코드 저장: records/{name} ({count}개, {digest[:12]})")

    # 데이터셋

    def cmd_ingest(self) -> None:
        """설정의 datasets 를 읽어 품질 필터 후 저장합니다."""
        datasets = self._section('datasets')
        if not datasets:
            raise ConfigError("datasets 섹션이 비어있습니다.")
        for name, entry in sorted(datasets.items()):
            question_set = load_question_set(entry['path'], QuestionSource(entry['source']), name)
            report_name = f'{name}.ingest_report.jsonl'
            report = StructuredReport(self.store.path('datasets', report_name), 'ingest')
            try:
                question_set, dropped = quality_filter(question_set, report)
            finally:
                report.close()
            self.store.register_existing('datasets', report_name, report.count)
            data_name = f'{name}.jsonl'
            self._dataset_hashes[name] = self.store.write_records(
                'datasets', data_name, [q.to_record() for q in question_set])[0]
            self.logger.info(f"수집 완료: {name} ({len(question_set)}문항, 제외 {len(dropped)})")

    def cmd_derive(self) -> None:
        """derivations 항목마다 단답형 또는 객관식 집합을 파생합니다."""
        derivations = self._section('derivations')
        if not derivations:
            raise ConfigError("derivations 섹션이 비어있습니다.")
        for name, entry in sorted(derivations.items()):
            source_set = self.load_dataset(entry['from'])
            kind = entry.get('kind')
            if kind == 'short_answer':
                derived = derive_short_answer(source_set, name)
            elif kind == 'multiple_choice':
                generator = self._provider(entry['generator'])
                report_name = f'{name}.derivation_report.jsonl'
                derived = derive_multiple_choice(
                    source_set, generator, self.seed,
                    report_path=self.store.path('datasets', report_name),
                    max_retries=int(entry.get('max_retries', 2)),
                    max_workers=int(self._section('run').get('max_concurrent', 4)),
                    name=name,
                )
                self.store.register_existing('datasets', report_name)
            else:
                raise ConfigError(f"derivations.{name}: 알 수 없는 kind '{kind}'",
                                  hint="short_answer 또는 multiple_choice")
            expected = QuestionSource(entry.get('source', derived.source.value))
            derived = QuestionSet(name=name, source=expected, questions=derived.questions)
            if derived.format != expected.expected_format:
                raise DatasetError(f"derivations.{name}: {expected.value} 형식과 맞지 않습니다.")
            self._dataset_hashes[name] = self.store.write_records(
                'datasets', f'{name}.jsonl', [q.to_record() for q in derived])[0]

    # 모델 실행

    def _regime(self, name: str, provider: Provider) -> Regime:
        configured = self._section('baseline').get('regimes', {}).get(name)
        if configured:
            return Regime(configured)
        return Regime.LOGPROB_TEMP1 if provider.supports_logprobs else Regime.TEMP0

    def cmd_baseline(self) -> None:
        for dataset in self._datasets():
            question_set = self.load_dataset(dataset)
            settings = BaselineSettings.from_config(self.config, dataset, self.run_id)
            for name in self._models():
                provider = self._provider(name, question_set)
                records = run_baseline(provider, question_set, self._regime(name, provider),
                                       self._panel(provider, question_set), settings)
                self._write('baseline', name, dataset, records)

    def cmd_elicit(self) -> None:
        """유도 프로브 (log-probability 를 지원하는 모델만)"""
        section = self._section('elicitation')
        kinds = [ElicitedKind(k) for k in section.get('kinds', [k.value for k in ElicitedKind])]
        models = list(section.get('models', self._models()))
        max_workers = int(self._section('run').get('max_concurrent', 8))
        for dataset in self._datasets():
            question_set = self.load_dataset(dataset)
            for name in models:
                provider = self._provider(name, question_set)
                if not provider.supports_logprobs:
                    self.logger.warning(f"{name}: log-probability 미지원으로 유도 프로브를 건너뜁니다.")
                    continue
                for kind in kinds:
                    results = run_elicitation(provider, question_set, kind, self.run_id, max_workers)
                    self._write(f'elicit__{kind.value}', name, dataset, results)

    def cmd_delegate(self) -> None:
        section = self._section('delegate_game')
        profile = TeammateProfile(float(section.get('teammate_accuracy', 0.5)), self.seed)
        for dataset in self._datasets():
            question_set = self.load_dataset(dataset)
            settings = GameSettings.from_config(self.config, 'delegate_game', dataset, self.run_id)
            for name in self._models():
                baseline = self.load_baseline(name, dataset)
                provider = self._provider(name, question_set)
                trials = run_delegate_game(provider, question_set, baseline, profile, self.seed, settings,
                                           self._panel(provider, question_set))
                self._write('delegate', name, dataset, trials)

    def cmd_pass(self) -> None:
        for dataset in self._datasets():
            question_set = self.load_dataset(dataset)
            settings = GameSettings.from_config(self.config, 'pass_game', dataset, self.run_id)
            for name in self._models():
                baseline = self.load_baseline(name, dataset)
                provider = self._provider(name, question_set)
                trials = run_pass_game(provider, question_set, baseline, self.seed, settings,
                                       self._panel(provider, question_set))
                self._write('pass', name, dataset, trials)

    def _second_chance_trials(self, variant: SecondChanceVariant, name: str, dataset: str) -> List[SecondChanceTrial]:
        return self._records(f'second_chance__{variant.value}', name, dataset, 'second_chance',
                             SecondChanceTrial.from_record, required=False)

    def cmd_second_chance(self) -> None:
        """
        설정된 변형을 실행하고, 두 변형이 모두 있으면 요약과 전략 분류를 함께 저장합니다.
        """
        section = self._section('second_chance')
        variants = [variant_from_flag(v) for v in section.get('variants', [v.value for v in SecondChanceVariant])]
        settings = SecondChanceSettings.from_config(self.config, self.run_id)
        test_settings = StrategyTestSettings.from_config(self.config)
        for dataset in self._datasets():
            question_set = self.load_dataset(dataset)
            for name in self._models():
                baseline = self.load_baseline(name, dataset)
                provider = self._provider(name, question_set)
                panel = self._panel(provider, question_set)
                for variant in variants:
                    trials = run_second_chance(provider, question_set, baseline, variant, settings, panel)
                    self._write(f'second_chance__{variant.value}', name, dataset, trials)

                game = self._second_chance_trials(SecondChanceVariant.INCORRECT, name, dataset)
                neutral = self._second_chance_trials(SecondChanceVariant.NEUTRAL, name, dataset)
                if not game or not neutral:
                    self.logger.info(f"{name}/{dataset}: 두 변형이 모두 있어야 전략 분류를 계산합니다.")
                    continue
                try:
                    summary = summarize(game, neutral, baseline)
                    classification = strategy_tests(summary, game, neutral, baseline, test_settings)
                except UndefinedStatisticError as e:
                    self.logger.warning(f"{name}/{dataset}: 전략 분류를 계산할 수 없습니다 - {e} {e.diagnostic}")
                    continue
                strategy_name = f'strategy__{slug(name, dataset)}.jsonl'
                self.store.write_records('records', strategy_name, [
                    {'kind': 'summary', 'model_id': provider.model_id, 'dataset': dataset, **summary.to_record()},
                    {'kind': 'classification', 'model_id': provider.model_id, 'dataset': dataset,
                     **classification.to_record()},
                ])

    # 분석

    def _attempt(self, report: Report, table: str, compute: Callable[[], Any], hashes: Dict[str, str]) -> List[AnalysisResult]:
        """정의되지 않는 통계량은 진단과 함께 기록하고 건너뜁니다."""
        try:
            produced = compute()
        except UndefinedStatisticError as e:
            self.logger.warning(f"분석 건너뜀 [{table}]: {e} {e.diagnostic}")
            return []
        results = list(produced) if isinstance(produced, (list, tuple)) else [produced]
        for result in results:
            result.input_hashes = dict(hashes)
        report.extend(table, results)
        return results

    def _inputs_since(self, before: Dict[str, str]) -> Dict[str, str]:
        return {path: digest for path, digest in self._inputs.items() if path not in before}

    def cmd_analyze(self) -> None:
        """
        저장된 레코드로 모든 분석을 계산해 records/analysis.jsonl 에 씁니다.

        Raises:
            MissingArtifactError: 기준 테스트 레코드가 없는 경우 ("run baseline first")
        """
        settings = AnalysisSettings.from_config(self.config)
        test_settings = StrategyTestSettings.from_config(self.config)
        teammate = float(self._section('delegate_game').get('teammate_accuracy', 0.5))
        report = Report()
        strategy_rows: List[Dict[str, Any]] = []
        wilcoxon_rows: List[Dict[str, Any]] = []

        for dataset in self._datasets():
            question_set = self.load_dataset(dataset)
            dataset_inputs = dict(self._inputs)
            trend: List[tuple] = []
            delegate_tables, pass_tables = {}, {}
            for name in self._models():
                before = dict(self._inputs)
                baseline = self.load_baseline(name, dataset)
                model_id = baseline[0].model_id if baseline else name
                self._model_ids.add(model_id)
                elicited: List[ElicitedPercent] = []
                for kind in ElicitedKind:
                    elicited += self._records(f'elicit__{kind.value}', name, dataset, 'elicit',
                                              ElicitedPercent.from_record, required=False)
                delegate: List[DelegateTrial] = self._records('delegate', name, dataset, 'delegate',
                                                              DelegateTrial.from_record, required=False)
                passed: List[DelegateTrial] = self._records('pass', name, dataset, 'pass',
                                                            DelegateTrial.from_record, required=False)
                game = self._second_chance_trials(SecondChanceVariant.INCORRECT, name, dataset)
                neutral = self._second_chance_trials(SecondChanceVariant.NEUTRAL, name, dataset)
                hashes = self._inputs_since(before)
                hashes[f'datasets/{dataset}.jsonl'] = self._dataset_hashes[dataset]
                ids = dict(model_id=model_id, dataset=dataset)

                self._attempt(report, 'baseline', lambda: baseline_accuracy_summary(baseline, settings, **ids), hashes)
                if question_set.format == QuestionFormat.MULTIPLE_CHOICE:
                    self._attempt(report, 'calibration', lambda: calibration_auc_analysis(baseline, settings, **ids),
                                  hashes)

                if delegate:
                    table = build_decision_table(delegate, baseline, question_set.questions, elicited,
                                                 settings.exclude_changed)
                    delegate_tables[model_id] = table
                    produced = self._attempt(report, 'delegate_game',
                                             lambda: introspection_analysis(table, settings, **ids), hashes)
                    for variant in ('A', 'B'):
                        self._attempt(report, 'delegate_game',
                                      lambda: control_impact_analysis(table, settings, variant, **ids), hashes)
                    self._attempt(report, 'delegate_game', lambda: cue_audit(table, settings, **ids), hashes)
                    self._attempt(report, 'delegate_game', lambda: bias_analysis(table, settings, **ids), hashes)
                    self._attempt(report, 'delegate_game', lambda: change_rate_analysis(table, settings, **ids), hashes)
                    try:
                        self_accuracy = accuracy(baseline)
                    except ValueError:
                        self_accuracy = None
                    if self_accuracy is not None:
                        self._attempt(report, 'delegate_game',
                                      lambda: team_gain_analysis(table, self_accuracy, settings, **ids), hashes)
                        if produced:
                            trend.append((model_id, self_accuracy, produced[0].value))
                    if not settings.exclude_changed:
                        unchanged = build_decision_table(delegate, baseline, question_set.questions, elicited, True)
                        self._attempt(report, 'delegate_game_unchanged',
                                      lambda: introspection_analysis(unchanged, settings, **ids), hashes)

                if passed:
                    pass_table = build_decision_table(passed, baseline, question_set.questions, elicited,
                                                      settings.exclude_changed)
                    pass_tables[model_id] = pass_table
                    self._attempt(report, 'pass_game', lambda: introspection_analysis(pass_table, settings, **ids),
                                  hashes)

                if game and neutral:
                    self._attempt(report, 'second_chance', lambda: lift_analysis(game, neutral, settings, **ids),
                                  hashes)
                    try:
                        summary = summarize(game, neutral, baseline)
                        classification = strategy_tests(summary, game, neutral, baseline, test_settings)
                        strategy_rows.append(strategy_row(model_id, dataset, classification, summary))
                    except UndefinedStatisticError as e:
                        self.logger.warning(f"{model_id}/{dataset}: 전략 분류 건너뜀 - {e} {e.diagnostic}")

            if len(trend) >= 3:
                trend_hashes = self._inputs_since(dataset_inputs)
                self._attempt(report, 'capability_trend',
                              lambda: capability_trend(trend, settings, dataset=dataset), trend_hashes)
            if delegate_tables and set(delegate_tables) == set(pass_tables):
                try:
                    matched = match_questions(delegate_tables, pass_tables)
                    comparison = paradigm_comparison(*matched, settings, dataset)
                except (ValueError, UndefinedStatisticError) as e:
                    self.logger.warning(f"{dataset}: 패러다임 비교 건너뜀 - {e}")
                else:
                    comparison_hashes = self._inputs_since(dataset_inputs)
                    for result in comparison.results:
                        result.input_hashes = dict(comparison_hashes)
                    report.extend('paradigm_comparison', comparison.results)
                    wilcoxon_rows += [dict(row, dataset=dataset) for row in comparison.wilcoxon]

        if strategy_rows:
            report.matrices['strategy_matrix'] = strategy_matrix(strategy_rows)
        if wilcoxon_rows:
            report.matrices['paradigm_wilcoxon'] = sorted(wilcoxon_rows, key=lambda r: (r['dataset'], r['score']))
        report.manifests = [{'artifact': path, 'sha256': digest} for path, digest in sorted(self._inputs.items())]

        digest, count = self.store.write_records('records', 'analysis.jsonl', report_to_records(report))
        self.logger.info(f"분석 완료: {sum(len(v) for v in report.tables.values())}개 결과 ({digest[:12]})")

    def cmd_report(self) -> None:
        """
        Raises:
            MissingArtifactError: 분석 결과가 없는 경우
            ValueError: 분석 결과가 비어있는 경우
        """
        records = self.store.read_records('records', 'analysis.jsonl', 'analyze')
        self._track_input('records', 'analysis.jsonl')
        report = report_from_records(records)
        formats = self._section('analysis').get('report_formats', ['csv', 'text'])
        emit_report(report, self.store.root / 'tables', formats, writer=self.store.write_path)
