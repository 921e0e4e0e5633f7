"""
유도 프로브
객관적 난이도(대졸자 정답률)와 자기 확신을 백분율 구간으로 묻고, 구간 확률로 가중한 백분율을 계산합니다.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Mapping

# 프로젝트 루트를 Python 경로에 추가
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.baseline.parsing import parse_option_label
from src.baseline.prompts import BinScale, build_elicitation_prompt, scale_for
from src.models.completion import DistributionSource, OptionDistribution
from src.models.question import Question, QuestionSet
from src.models.records import ElicitedKind, ElicitedPercent
from src.provider.base import Provider
from src.provider.distributions import RESAMPLE_TEMPERATURE, option_distribution_from_logprobs
from src.utils.errors import DegenerateDistributionError, ProviderError
from src.utils.logger import get_logger

logger = get_logger(__name__)


def weighted_percent(dist: OptionDistribution, scale: BinScale) -> float:
    """구간 확률 × 구간 중앙값의 합"""
    midpoints = scale.midpoint_map()
    return math.fsum(p * midpoints[label] for label, p in dist.probs.items())


def percent_from_bins(probabilities: Mapping[str, float], kind: ElicitedKind) -> float:
    """라벨 → 확률 매핑에서 백분율을 계산합니다 (누락 라벨은 0)."""
    scale = scale_for(kind)
    dist = OptionDistribution.from_masses(dict(probabilities), DistributionSource.LOGPROBS, scale.labels)
    return weighted_percent(dist, scale)


def elicit_percent(model: Provider, question: Question, kind: ElicitedKind, run_id: str = "") -> ElicitedPercent:
    """
    유도 프롬프트를 보내 구간 분포와 가중 백분율을 얻습니다.

    log-probability 분포를 만들 수 없으면 응답 텍스트의 구간으로 원핫 분포를 씁니다.

    Raises:
        ValueError: 모델이 log-probability 를 지원하지 않는 경우
        DegenerateDistributionError: 분포도 구간 라벨도 얻을 수 없는 경우
    """
    if not model.supports_logprobs:
        raise ValueError(f"{model.name}은 log-probability를 지원하지 않아 유도 프로브를 실행할 수 없습니다.")

    scale = scale_for(kind)
    system, user = build_elicitation_prompt(question, kind)
    request = model.request(system, user, temperature=RESAMPLE_TEMPERATURE, max_output=4,
                            want_top_logprobs=max(model.top_logprobs, len(scale.labels)))
    completion = model.complete(request)

    degenerate = False
    try:
        dist = option_distribution_from_logprobs(completion, scale.labels)
    except DegenerateDistributionError:
        label = parse_option_label(completion.text, scale.labels)
        if label is None:
            raise DegenerateDistributionError(f"{question.id}: 유도 응답에서 구간을 찾을 수 없습니다: {completion.text!r}")
        dist = OptionDistribution.one_hot(label, scale.labels)
        degenerate = True

    return ElicitedPercent(
        question_id=question.id,
        model_id=model.model_id,
        kind=kind,
        percent=weighted_percent(dist, scale),
        dist_over_bins=dist,
        degenerate=degenerate,
        run_id=run_id,
    )


def run_elicitation(model: Provider, question_set: QuestionSet, kind: ElicitedKind,
                    run_id: str = "", max_workers: int = 8) -> List[ElicitedPercent]:
    """집합 전체에 유도 프로브를 실행합니다 (실패 문항은 건너뛰고 기록)."""

    def one(question: Question):
        try:
            return elicit_percent(model, question, kind, run_id)
        except (ProviderError, DegenerateDistributionError) as e:
            logger.warning(f"유도 프로브 제외: {model.name}/{question.id} ({kind.value}) - {e}")
            return None

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        results = [r for r in pool.map(one, question_set.questions) if r is not None]
    results.sort(key=lambda r: r.question_id)
    logger.info(f"유도 프로브 완료: {model.name} / {question_set.name} ({kind.value}) {len(results)}/{len(question_set)}")
    return results
