"""
설정 관리 모듈
YAML 설정 파일을 로드하고 환경 변수로 오버라이드하는 기능을 제공합니다.
"""

import copy
import hashlib
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

VALID_REGIMES = ['Temp0', 'Resampled', 'LogprobTemp1']
VALID_PROVIDER_KINDS = ['openai_compatible', 'scripted', 'synthetic']
VALID_SOURCES = ['GPQA', 'GPSA', 'SimpleQA', 'SimpleMC']


def load_env_file(env_path: Optional[str] = None) -> None:
    """
    환경 변수 파일을 로드합니다.

    Args:
        env_path: 환경 변수 파일 경로 (None인 경우 기본 경로 사용)
    """
    project_root = Path(__file__).parent.parent
    if env_path is None:
        env_path = project_root / "config" / "app.env"

    if os.path.exists(env_path):
        load_dotenv(env_path)
    else:
        # 기본 .env 파일도 시도
        default_env = project_root / ".env"
        if os.path.exists(default_env):
            load_dotenv(default_env)


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    YAML 설정 파일을 로드하고 Python 딕셔너리로 반환합니다.

    Args:
        config_path: 설정 파일 경로 (None인 경우 기본 경로 사용)

    Returns:
        로드된 설정 딕셔너리

    Raises:
        FileNotFoundError: 설정 파일을 찾을 수 없는 경우
        yaml.YAMLError: YAML 파싱 오류가 발생한 경우
    """
    if config_path is None:
        project_root = Path(__file__).parent.parent
        config_path = project_root / "config" / "settings.yaml"

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            config = yaml.safe_load(f)

        if config is None:
            raise yaml.YAMLError("설정 파일이 비어있습니다.")

        return config

    except FileNotFoundError:
        raise FileNotFoundError(f"설정 파일을 찾을 수 없습니다: {config_path}")
    except yaml.YAMLError as e:
        raise yaml.YAMLError(f"YAML 파싱 오류: {e}")


def _env_bool(value: str) -> bool:
    return value.strip().lower() in ('1', 'true', 'yes', 'on')


def apply_environment_overrides(config: Dict[str, Any]) -> Dict[str, Any]:
    """
    환경 변수를 사용하여 설정을 오버라이드합니다.

    Args:
        config: 기본 설정 딕셔너리

    Returns:
        환경 변수가 적용된 설정 딕셔너리
    """
    # 실행 설정 오버라이드
    run_config = config.setdefault('run', {})
    if os.getenv('METACOG_SEED'):
        run_config['seed'] = int(os.environ['METACOG_SEED'])
    run_config['results_dir'] = os.getenv('METACOG_RESULTS_DIR', run_config.get('results_dir', 'results'))
    if os.getenv('METACOG_OFFLINE'):
        run_config['offline'] = _env_bool(os.environ['METACOG_OFFLINE'])

    # 캐시 설정 오버라이드
    cache_config = config.setdefault('cache', {})
    cache_config['directory'] = os.getenv('METACOG_CACHE_DIR', cache_config.get('directory', '.cache/completions'))

    # 데이터베이스 설정 오버라이드
    if 'database' in config:
        db_config = config['database']
        db_config['type'] = os.getenv('DB_TYPE', db_config.get('type', 'sqlite'))
        db_config['host'] = os.getenv('DB_HOST', db_config.get('host', 'localhost'))
        db_config['port'] = int(os.getenv('DB_PORT', db_config.get('port', 5432)))
        db_config['user'] = os.getenv('DB_USER', db_config.get('user', 'postgres'))
        db_config['password'] = os.getenv('DB_PASSWORD', db_config.get('password', ''))
        db_config['dbname'] = os.getenv('DB_NAME', db_config.get('dbname', 'metacog_registry'))
        db_config['sqlite_path'] = os.getenv('DB_SQLITE_PATH', db_config.get('sqlite_path', 'results/registry.db'))

    # 로깅 설정 오버라이드
    if 'logging' in config:
        logging_config = config['logging']
        logging_config['level'] = os.getenv('LOG_LEVEL', logging_config.get('level', 'INFO'))
        logging_config['file'] = os.getenv('LOG_FILE', logging_config.get('file', 'logs/harness.log'))

    return config


def _check_fraction(errors: list, key: str, value: Any) -> None:
    try:
        number = float(value)
    except (ValueError, TypeError):
        errors.append(f"{key}는 실수여야 합니다.")
        return
    if not 0.0 <= number <= 1.0:
        errors.append(f"{key}는 0과 1 사이여야 합니다.")


def validate_config(config: Dict[str, Any]) -> None:
    """
    설정 값의 유효성을 검사합니다.

    Args:
        config: 검사할 설정 딕셔너리

    Raises:
        ValueError: 유효하지 않은 설정이 발견된 경우
    """
    errors = []

    # 실행 설정 검증
    run = config.get('run', {})
    if 'seed' in run:
        try:
            int(run['seed'])
        except (ValueError, TypeError):
            errors.append("run.seed는 정수여야 합니다.")
    if 'max_concurrent' in run:
        try:
            if int(run['max_concurrent']) <= 0:
                errors.append("run.max_concurrent는 양의 정수여야 합니다.")
        except (ValueError, TypeError):
            errors.append("run.max_concurrent는 정수여야 합니다.")

    # 프로바이더 설정 검증
    providers = config.get('providers', {})
    if not isinstance(providers, dict):
        errors.append("providers는 이름 → 설정 매핑이어야 합니다.")
        providers = {}
    for name, provider in providers.items():
        kind = provider.get('kind')
        if kind not in VALID_PROVIDER_KINDS:
            errors.append(f"providers.{name}.kind는 다음 중 하나여야 합니다: {', '.join(VALID_PROVIDER_KINDS)}")
        if not provider.get('model_id'):
            errors.append(f"providers.{name}.model_id는 필수 설정입니다.")
        if kind == 'openai_compatible':
            if not provider.get('endpoint'):
                errors.append(f"providers.{name}.endpoint는 필수 설정입니다.")
            if not provider.get('credential_env'):
                errors.append(f"providers.{name}.credential_env는 필수 설정입니다.")
            if 'api_key' in provider or 'password' in provider:
                errors.append(f"providers.{name}: 자격 증명은 환경 변수로만 지정해야 합니다.")
        if kind == 'synthetic' and 'params' not in provider:
            subject = provider.get('subject')
            if subject not in config.get('synthetic_subjects', {}):
                errors.append(f"providers.{name}.subject '{subject}'가 synthetic_subjects에 없습니다.")
        retry = provider.get('retry', {})
        if 'attempts' in retry and int(retry['attempts']) < 0:
            errors.append(f"providers.{name}.retry.attempts는 0 이상이어야 합니다.")
        if 'rate_limit_rpm' in provider and float(provider['rate_limit_rpm']) <= 0:
            errors.append(f"providers.{name}.rate_limit_rpm는 양수여야 합니다.")

    # 합성 피험자 검증
    for name, params in config.get('synthetic_subjects', {}).items():
        for key in ('introspection_fidelity', 'self_model_fidelity', 'context_noise', 'game_entropy_boost'):
            if key in params:
                _check_fraction(errors, f"synthetic_subjects.{name}.{key}", params[key])

    # 데이터셋 검증
    for name, dataset in config.get('datasets', {}).items():
        if dataset.get('source') not in VALID_SOURCES:
            errors.append(f"datasets.{name}.source는 다음 중 하나여야 합니다: {', '.join(VALID_SOURCES)}")
        if not dataset.get('path'):
            errors.append(f"datasets.{name}.path는 필수 설정입니다.")

    # 기준 테스트 검증
    baseline = config.get('baseline', {})
    for model_name, regime in baseline.get('regimes', {}).items():
        if regime not in VALID_REGIMES:
            errors.append(f"baseline.regimes.{model_name}는 다음 중 하나여야 합니다: {', '.join(VALID_REGIMES)}")
    for model_name in baseline.get('models', []):
        if model_name not in providers:
            errors.append(f"baseline.models의 '{model_name}'가 providers에 없습니다.")
    if 'resample_n' in baseline and int(baseline['resample_n']) < 1:
        errors.append("baseline.resample_n는 1 이상이어야 합니다.")

    # 게임 설정 검증
    delegate = config.get('delegate_game', {})
    if 'teammate_accuracy' in delegate:
        _check_fraction(errors, "delegate_game.teammate_accuracy", delegate['teammate_accuracy'])
    if 'phase1_size' in delegate and int(delegate['phase1_size']) < 0:
        errors.append("delegate_game.phase1_size는 0 이상이어야 합니다.")

    second_chance = config.get('second_chance', {})
    if 'alpha' in second_chance:
        _check_fraction(errors, "second_chance.alpha", second_chance['alpha'])
    if 'chance_level' in second_chance:
        _check_fraction(errors, "second_chance.chance_level", second_chance['chance_level'])

    # 통계 설정 검증
    stats = config.get('stats', {})
    if 'bootstrap_resamples' in stats and int(stats['bootstrap_resamples']) < 100:
        errors.append("stats.bootstrap_resamples는 100 이상이어야 합니다.")
    if 'alpha' in stats:
        _check_fraction(errors, "stats.alpha", stats['alpha'])

    # 데이터베이스 설정 검증
    if 'database' in config:
        db = config['database']
        if db.get('type') not in ['sqlite', 'postgresql']:
            errors.append("database.type는 'sqlite' 또는 'postgresql'이어야 합니다.")
        if db.get('type') == 'sqlite' and 'sqlite_path' not in db:
            errors.append("database.sqlite_path는 SQLite 사용 시 필수입니다.")

    # 로깅 설정 검증
    if 'logging' in config:
        logging = config['logging']
        valid_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if 'level' in logging and str(logging['level']).upper() not in valid_levels:
            errors.append(f"logging.level는 다음 중 하나여야 합니다: {', '.join(valid_levels)}")

    # 오류가 있으면 예외 발생
    if errors:
        error_msg = "설정 검증 오류:\n" + "\n".join(f"- {error}" for error in errors)
        raise ValueError(error_msg)


def get_config(config_path: Optional[str] = None, env: Optional[str] = None) -> Dict[str, Any]:
    """
    환경 변수를 고려하여 최종 설정을 반환합니다.

    Args:
        config_path: 설정 파일 경로 (None인 경우 기본 경로 사용)
        env: 환경 이름 (None인 경우 APP_ENV 환경 변수 사용)

    Returns:
        환경 변수가 적용된 최종 설정 딕셔너리
    """
    load_env_file()

    if env is None:
        env = os.getenv('APP_ENV', 'development')

    config = load_config(config_path)

    # 환경별 설정 적용
    env_config = config.get('environment', {}).get(env)
    if isinstance(env_config, dict):
        config.update(env_config)

    config = apply_environment_overrides(config)
    validate_config(config)

    return config


def config_hash(config: Dict[str, Any]) -> str:
    """설정 내용의 SHA-256 해시를 반환합니다 (키 정렬 JSON 기준)."""
    blob = json.dumps(config, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(blob.encode('utf-8')).hexdigest()


DEFAULT_CONFIG: Dict[str, Any] = {
    'run': {'seed': 0, 'results_dir': 'results', 'max_concurrent': 4, 'offline': True},
    'cache': {'enabled': True, 'directory': '.cache/completions'},
    'providers': {},
    'synthetic_subjects': {},
    'datasets': {},
    'baseline': {'resample_n': 10, 'max_output': 16},
    'delegate_game': {'teammate_accuracy': 0.5, 'phase1_size': 50, 'strict_format': True},
    'second_chance': {'alpha': 0.05, 'chance_level': 1.0 / 3.0},
    'stats': {'bootstrap_resamples': 2000, 'alpha': 0.05, 'min_cell_trials': 20},
    'analysis': {'exclude_changed': False},
    'logging': {'level': 'INFO', 'file': 'logs/harness.log'},
    'database': {'type': 'sqlite', 'sqlite_path': 'results/registry.db'},
}

# 전역 설정 객체 (DB, 로거 기본값용)
try:
    CONFIG = get_config()
except Exception as e:
    print(f"⚠️  설정 로딩 오류: {e}")
    print("기본 설정을 사용합니다.")
    CONFIG = copy.deepcopy(DEFAULT_CONFIG)


# 설정 접근을 위한 편의 함수들
def get_database_config() -> Dict[str, Any]:
    """데이터베이스 설정을 반환합니다."""
    return CONFIG.get('database', {})

def get_logging_config() -> Dict[str, Any]:
    """로깅 설정을 반환합니다."""
    return CONFIG.get('logging', {})


if __name__ == "__main__":
    # 설정 테스트
    print("로드된 설정:")
    print(yaml.dump(CONFIG, default_flow_style=False, allow_unicode=True))

    print("\n설정 유효성 검사:")
    try:
        validate_config(CONFIG)
        print("✅ 모든 설정이 유효합니다.")
    except ValueError as e:
        print(f"❌ 설정 검증 오류: {e}")
