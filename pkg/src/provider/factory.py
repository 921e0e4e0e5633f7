"""
프로바이더 생성 및 레지스트리
"""

from typing import Any, Dict, List, Optional

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.provider.base import CachedProvider, Provider
from src.provider.cache import CompletionCache
from src.provider.scripted import ScriptedProvider
from src.utils.errors import ConfigError, OfflineViolationError
from src.utils.logger import get_logger

NETWORK_KINDS = {'openai_compatible'}


class ProviderRegistry:
    """설정의 providers 섹션으로 프로바이더를 만들고 재사용합니다."""

    def __init__(self, config: Dict[str, Any], offline: Optional[bool] = None,
                 cache: Optional[CompletionCache] = None):
        self.config = config
        self.logger = get_logger(__name__)
        self.provider_configs: Dict[str, Dict[str, Any]] = config.get('providers', {}) or {}
        run_config = config.get('run', {})
        self.offline = bool(run_config.get('offline', False)) if offline is None else offline
        self.seed = int(run_config.get('seed', 0))
        if cache is None:
            cache_config = config.get('cache', {})
            cache = CompletionCache(cache_config.get('directory', '.cache/completions'),
                                    enabled=bool(cache_config.get('enabled', True)))
        self.cache = cache
        self._providers: Dict[str, Provider] = {}

    def register(self, name: str, provider: Provider) -> Provider:
        """직접 만든 프로바이더를 등록합니다 (테스트, 스크립트 실행)."""
        self._providers[name] = provider
        return provider

    def config_for(self, name: str) -> Dict[str, Any]:
        if name not in self.provider_configs:
            raise ConfigError(
                f"알 수 없는 프로바이더: {name}",
                hint=f"providers.{name} 를 설정 파일에 추가하세요.",
            )
        return self.provider_configs[name]

    def family_of(self, name: str) -> str:
        if name in self._providers:
            return self._providers[name].family
        provider_config = self.config_for(name)
        return provider_config.get('family') or provider_config.get('model_id', name)

    def get(self, name: str) -> Provider:
        """
        이름으로 프로바이더를 돌려줍니다.

        Raises:
            OfflineViolationError: offline 모드에서 네트워크 프로바이더를 요청한 경우
        """
        if name in self._providers:
            return self._providers[name]
        provider = self.build(name, self.config_for(name))
        self._providers[name] = provider
        return provider

    def build(self, name: str, provider_config: Dict[str, Any]) -> Provider:
        kind = provider_config.get('kind')
        if kind in NETWORK_KINDS:
            if self.offline:
                raise OfflineViolationError(
                    f"--offline 모드에서는 라이브 프로바이더 {name}를 사용할 수 없습니다.",
                    hint="use a synthetic or scripted provider, or drop --offline",
                )
            from src.provider.api_client import APIClientProvider
            provider: Provider = APIClientProvider(name, provider_config)
            self.logger.info(f"라이브 프로바이더 생성: {name} ({provider.model_id})")
            return CachedProvider(provider, self.cache)
        if kind == 'scripted':
            return ScriptedProvider.from_config(name, provider_config)
        if kind == 'synthetic':
            from src.synthetic.subject import SyntheticSubject
            return SyntheticSubject.from_config(name, provider_config, self.config)
        raise ConfigError(f"프로바이더 {name}: 지원하지 않는 kind '{kind}'")

    def judges_for(self, judge_names: List[str], evaluated_family: str, panel_size: int = 3) -> List[Provider]:
        """
        평가 대상과 다른 계열의 판정 모델 panel_size 개를 고릅니다.

        Raises:
            ConfigError: 조건을 만족하는 판정 모델이 부족한 경우
        """
        chosen = [n for n in judge_names if self.family_of(n) != evaluated_family][:panel_size]
        if len(chosen) < panel_size:
            raise ConfigError(
                f"{evaluated_family} 계열이 아닌 판정 모델이 {panel_size}개 필요합니다 (현재 {chosen}).",
                hint="baseline.judges 목록에 다른 계열 모델을 추가하세요.",
            )
        return [self.get(n) for n in chosen]

    def close(self) -> None:
        for provider in self._providers.values():
            provider.close()
