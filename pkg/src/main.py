"""
메타인지 게임 평가 하네스 CLI
하위 명령으로 파이프라인 단계를 실행합니다.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import yaml

# 프로젝트 루트를 Python 경로에 추가
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from config.settings import get_config
from src.db.connection import DatabaseManager
from src.db.init_db import init_database
from src.services.pipeline import Pipeline, PipelineOptions
from src.utils.errors import ConfigError, HarnessError
from src.utils.logger import get_logger, set_log_level

FULL_PIPELINE = ('ingest', 'baseline', 'elicit', 'delegate', 'pass', 'second_chance', 'analyze', 'report')

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_HARNESS_ERROR = 2


class HarnessApp:
    """설정 로드, 레지스트리 연결, 파이프라인 실행을 묶는 애플리케이션"""

    def __init__(self, config_path: Optional[str] = None, options: Optional[PipelineOptions] = None,
                 use_registry: bool = True):
        self.logger = get_logger(__name__)
        try:
            config = get_config(config_path)
        except ValueError as e:
            raise ConfigError(str(e), hint="설정 파일과 환경 변수를 확인하세요.")
        except (FileNotFoundError, yaml.YAMLError) as e:
            raise ConfigError(str(e), hint="--config 로 설정 파일 경로를 지정하세요.")

        self.db_manager: Optional[DatabaseManager] = None
        if use_registry:
            self.db_manager = self._connect_registry(config.get('database', {}))
        self.pipeline = Pipeline(config, options, db_manager=self.db_manager)

    def _connect_registry(self, database_config: Dict) -> Optional[DatabaseManager]:
        try:
            manager = DatabaseManager(database_config)
        except Exception as e:
            self.logger.warning(f"실행 레지스트리 연결 실패, 파일 매니페스트만 기록합니다: {e}")
            return None
        if not init_database(manager):
            self.logger.warning("실행 레지스트리 초기화 실패, 파일 매니페스트만 기록합니다.")
            manager.close()
            return None
        return manager

    def run(self, commands: Sequence[str]) -> List[Dict]:
        manifests = []
        for command in commands:
            manifest = self.pipeline.run(command)
            manifests.append(manifest)
            print(f"✅ {command}: {manifest['run_id']} (산출물 {len(manifest['outputs'])}개)")
        return manifests

    def cleanup(self):
        self.pipeline.registry.close()
        if self.db_manager:
            self.db_manager.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='metacog',
        description='언어 모델 메타인지 게임 평가 하네스',
    )
    parser.add_argument('--config', help='설정 파일 경로 (기본: config/settings.yaml)')
    parser.add_argument('--run-id', help='실행 ID (기본: 설정 해시와 시드로 계산)')
    parser.add_argument('--seed', type=int, help='실행 시드')
    parser.add_argument('--cache-dir', help='응답 캐시 디렉토리')
    parser.add_argument('--results-dir', help='결과 디렉토리')
    parser.add_argument('--offline', action='store_true', default=None, help='라이브 프로바이더 사용 금지')
    parser.add_argument('--log-level', help='콘솔 로그 레벨 (DEBUG, INFO, ...)')
    parser.add_argument('--no-registry', action='store_true', help='실행 레지스트리 DB를 쓰지 않음')

    commands = parser.add_subparsers(dest='command', required=True, metavar='command')
    commands.add_parser('ingest', help='데이터셋 수집과 품질 필터')
    commands.add_parser('derive', help='파생 데이터셋 생성 (GPSA, SimpleMC)')
    commands.add_parser('baseline', help='기준 능력 테스트')
    commands.add_parser('elicit', help='객관적 난이도 / 자기 확신 유도 프로브')

    delegate = commands.add_parser('delegate', help='위임 게임')
    delegate.add_argument('--teammate-accuracy', type=float, help='가상 팀원 정확도')
    delegate.add_argument('--phase1-size', type=int, help='1단계 기록 문항 수')
    delegate.add_argument('--strict-format', action=argparse.BooleanOptionalAction, default=None,
                          help='엄격한 응답 형식 지시')

    commands.add_parser('pass', help='패스 게임')

    second_chance = commands.add_parser('second_chance', aliases=['second-chance'], help='두 번째 기회 게임')
    second_chance.add_argument('--variant', action='append', choices=['incorrect', 'neutral'],
                               help='실행할 변형 (여러 번 지정 가능)')
    second_chance.add_argument('--alpha', type=float, help='전략 검정 유의수준')

    commands.add_parser('analyze', help='분석 계산')
    commands.add_parser('report', help='리포트 출력')
    commands.add_parser('all', help='derive 를 뺀 전체 파이프라인')
    return parser


def options_from_args(args: argparse.Namespace) -> PipelineOptions:
    return PipelineOptions(
        run_id=args.run_id,
        seed=args.seed,
        cache_dir=args.cache_dir,
        offline=args.offline,
        results_dir=args.results_dir,
        variants=getattr(args, 'variant', None),
        alpha=getattr(args, 'alpha', None),
        teammate_accuracy=getattr(args, 'teammate_accuracy', None),
        phase1_size=getattr(args, 'phase1_size', None),
        strict_format=getattr(args, 'strict_format', None),
    )


def _emit_error(error: dict) -> None:
    print(json.dumps(error, ensure_ascii=False), file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Returns:
        종료 코드 (0 성공, 2 하네스 오류, 1 예상하지 못한 오류)
    """
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_log_level(args.log_level)

    command = 'second_chance' if args.command == 'second-chance' else args.command
    commands = FULL_PIPELINE if command == 'all' else (command,)

    app: Optional[HarnessApp] = None
    try:
        app = HarnessApp(args.config, options_from_args(args), use_registry=not args.no_registry)
        app.run(commands)
        return EXIT_OK
    except HarnessError as e:
        _emit_error(e.to_dict())
        return EXIT_HARNESS_ERROR
    except Exception as e:
        get_logger(__name__).exception("예상하지 못한 오류")
        _emit_error({'error': type(e).__name__, 'message': str(e), 'hint': None})
        return EXIT_UNEXPECTED
    finally:
        if app is not None:
            app.cleanup()


if __name__ == "__main__":
    sys.exit(main())
