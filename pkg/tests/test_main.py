"""
CLI 테스트: 종료 코드, 구조화 오류 출력, 레지스트리 기록
"""

import json
from pathlib import Path

import pytest
import yaml

from src.db.connection import DatabaseManager
from src.main import FULL_PIPELINE, build_parser, main, options_from_args
from src.models.run_manifest import RunManifest
from src.services.pipeline import Pipeline

from tests.test_pipeline import offline_config

RUN_ID = 'run-cli'
ENV_OVERRIDES = ('METACOG_SEED', 'METACOG_RESULTS_DIR', 'METACOG_OFFLINE', 'METACOG_CACHE_DIR',
                 'DB_TYPE', 'DB_SQLITE_PATH', 'LOG_LEVEL', 'LOG_FILE', 'APP_ENV')


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ENV_OVERRIDES:
        monkeypatch.delenv(name, raising=False)


def write_config(tmp_path: Path, n: int = 12, **sections) -> str:
    config = offline_config(tmp_path, n=n)
    config.update(sections)
    path = tmp_path / 'settings.yaml'
    path.write_text(yaml.safe_dump(config, allow_unicode=True), encoding='utf-8')
    return str(path)


def structured_error(err: str) -> dict:
    for line in reversed(err.strip().splitlines()):
        try:
            payload = json.loads(line)
        except ValueError:
            continue
        if isinstance(payload, dict) and 'error' in payload:
            return payload
    raise AssertionError(f"구조화 오류가 없습니다: {err!r}")


class TestParser:

    def test_second_chance_alias_and_flags(self):
        args = build_parser().parse_args(['--seed', '4', 'second-chance', '--variant', 'incorrect',
                                          '--variant', 'neutral', '--alpha', '0.01'])
        options = options_from_args(args)
        assert args.command == 'second-chance'
        assert options.seed == 4
        assert options.variants == ['incorrect', 'neutral']
        assert options.alpha == 0.01
        assert options.offline is None

    def test_delegate_flags(self):
        args = build_parser().parse_args(['--offline', 'delegate', '--teammate-accuracy', '0.7',
                                          '--phase1-size', '20', '--no-strict-format'])
        options = options_from_args(args)
        assert options.offline is True
        assert options.teammate_accuracy == 0.7
        assert options.phase1_size == 20
        assert options.strict_format is False

    def test_all_skips_derive(self):
        assert 'derive' not in FULL_PIPELINE
        assert FULL_PIPELINE[0] == 'ingest'
        assert FULL_PIPELINE[-2:] == ('analyze', 'report')


class TestExitCodes:

    def test_success(self, tmp_path, capsys):
        config = write_config(tmp_path)
        assert main(['--config', config, '--no-registry', '--run-id', RUN_ID, 'ingest']) == 0
        assert f'ingest: {RUN_ID}' in capsys.readouterr().out
        assert (tmp_path / 'results' / RUN_ID / 'manifest' / 'ingest.json').is_file()

    def test_missing_prerequisite(self, tmp_path, capsys):
        config = write_config(tmp_path)
        assert main(['--config', config, '--no-registry', '--run-id', RUN_ID, 'ingest']) == 0
        capsys.readouterr()

        assert main(['--config', config, '--no-registry', '--run-id', RUN_ID, 'analyze']) == 2
        error = structured_error(capsys.readouterr().err)
        assert error['error'] == 'MissingArtifactError'
        assert error['hint'] == 'run baseline first'

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(['--config', str(tmp_path / 'absent.yaml'), '--no-registry', 'ingest']) == 2
        assert structured_error(capsys.readouterr().err)['error'] == 'ConfigError'

    def test_invalid_config(self, tmp_path, capsys):
        config = write_config(tmp_path, baseline={'models': ['subject-a'], 'regimes': {'subject-a': 'Greedy'}})
        assert main(['--config', config, '--no-registry', 'ingest']) == 2
        error = structured_error(capsys.readouterr().err)
        assert error['error'] == 'ConfigError'
        assert 'baseline.regimes.subject-a' in error['message']

    def test_offline_flag(self, tmp_path, capsys):
        providers = offline_config(tmp_path)['providers']
        providers['live'] = {'kind': 'openai_compatible', 'model_id': 'openai/gpt-4o', 'family': 'openai',
                             'endpoint': 'https://example.invalid/v1', 'credential_env': 'UNUSED_KEY'}
        config = write_config(tmp_path, providers=providers,
                              baseline={'models': ['live'], 'datasets': ['gpqa']},
                              run={'seed': 11, 'results_dir': str(tmp_path / 'results'), 'offline': False})
        assert main(['--config', config, '--no-registry', '--run-id', RUN_ID, 'ingest']) == 0
        assert main(['--config', config, '--no-registry', '--run-id', RUN_ID, '--offline', 'baseline']) == 2
        assert structured_error(capsys.readouterr().err)['error'] == 'OfflineViolationError'

    def test_unexpected_error(self, tmp_path, capsys, mocker):
        config = write_config(tmp_path)
        mocker.patch.object(Pipeline, 'run', side_effect=RuntimeError('boom'))
        assert main(['--config', config, '--no-registry', 'ingest']) == 1
        error = structured_error(capsys.readouterr().err)
        assert error == {'error': 'RuntimeError', 'message': 'boom', 'hint': None}


class TestRegistry:

    def test_commands_are_recorded(self, tmp_path):
        registry_path = tmp_path / 'registry.db'
        config = write_config(tmp_path, database={'type': 'sqlite', 'sqlite_path': str(registry_path)})
        assert main(['--config', config, '--run-id', RUN_ID, 'ingest']) == 0
        assert main(['--config', config, '--run-id', RUN_ID, 'report']) == 2

        db_manager = DatabaseManager({'type': 'sqlite', 'sqlite_path': str(registry_path)})
        try:
            with db_manager.get_session() as session:
                history = RunManifest.history(session, RUN_ID)
                statuses = [(m.command, m.status) for m in history]
        finally:
            db_manager.close()
        assert statuses == [('ingest', 'succeeded'), ('report', 'failed')]


@pytest.mark.slow
def test_all_offline(tmp_path, capsys):
    config = write_config(tmp_path, n=40, delegate_game={'teammate_accuracy': 0.5, 'phase1_size': 8})
    assert main(['--config', config, '--no-registry', '--run-id', RUN_ID, 'all']) == 0
    out = capsys.readouterr().out
    for command in FULL_PIPELINE:
        assert f'{command}: {RUN_ID}' in out
    root = tmp_path / 'results' / RUN_ID
    assert (root / 'tables' / 'report.txt').is_file()
    assert sorted(p.stem for p in (root / 'manifest').iterdir()) == sorted(FULL_PIPELINE)
