"""
리포트 출력
분석 결과 표를 구분자 파일(csv)과 서식 텍스트로 씁니다. 같은 입력이면 같은 바이트가 나옵니다.
"""

import json
from collections import OrderedDict
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Sequence

import pandas as pd

# 프로젝트 루트를 Python 경로에 추가
import sys
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.models.analysis import AnalysisResult, Report
from src.utils.logger import get_logger
from src.utils.records import atomic_write_bytes

logger = get_logger(__name__)

REPORT_SCHEMA_VERSION = "report-v1"
RESULT_COLUMNS = ['statistic_name', 'model_id', 'dataset', 'value', 'ci_low', 'ci_high', 'n', 'significant',
                  'controls', 'details', 'input_hashes']
SUPPORTED_FORMATS = ('csv', 'text')


def _canonical(value: Any) -> str:
    return json.dumps(value, sort_keys=True, ensure_ascii=False, separators=(',', ':'))


def results_frame(results: Sequence[AnalysisResult]) -> pd.DataFrame:
    """결과 목록 → 고정 열 순서의 DataFrame"""
    rows = []
    for result in results:
        record = result.to_record()
        record['controls'] = ';'.join(record['controls'])
        record['details'] = _canonical(record['details'])
        record['input_hashes'] = _canonical(record['input_hashes'])
        rows.append(record)
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def _csv_bytes(frame: pd.DataFrame) -> bytes:
    return frame.to_csv(index=False, float_format='%.6f', lineterminator='\n').encode('utf-8')


def _text_block(title: str, frame: pd.DataFrame) -> str:
    shown = frame.drop(columns=[c for c in ('details', 'input_hashes') if c in frame.columns])
    body = shown.to_string(index=False, float_format=lambda v: f"{v:.4f}")
    return f"== {title} ==\n{body}\n"


def emit_report(report: Report, out_dir: Path, formats: Iterable[str] = SUPPORTED_FORMATS,
                writer: Callable[[Path, bytes], Any] = atomic_write_bytes) -> List[Path]:
    """
    리포트를 파일로 씁니다.

    out_dir/<표>.csv, out_dir/<행렬>.csv, out_dir/inputs.csv, out_dir/report.txt

    Args:
        writer: (경로, 바이트)를 받아 쓰는 함수 (실행 저장소의 충돌 검사용)

    Returns:
        쓴 파일 경로 목록 (정렬됨)

    Raises:
        ValueError: 결과가 비어있거나 지원하지 않는 형식
    """
    formats = list(formats)
    unknown = [f for f in formats if f not in SUPPORTED_FORMATS]
    if unknown:
        raise ValueError(f"지원하지 않는 리포트 형식: {unknown} (지원: {list(SUPPORTED_FORMATS)})")
    if report.is_empty():
        raise ValueError("분석 결과가 비어있어 리포트를 만들 수 없습니다.")

    out_dir = Path(out_dir)
    written: List[Path] = []
    blocks = [f"report schema: {REPORT_SCHEMA_VERSION}\n"]

    frames: "OrderedDict[str, pd.DataFrame]" = OrderedDict()
    for name in sorted(report.tables):
        frames[name] = results_frame(report.tables[name])
    for name in sorted(report.matrices):
        frames[name] = pd.DataFrame(report.matrices[name])
    if report.manifests:
        frames['inputs'] = pd.DataFrame(sorted(report.manifests, key=_canonical))

    for name, frame in frames.items():
        if 'csv' in formats:
            path = out_dir / f'{name}.csv'
            writer(path, _csv_bytes(frame))
            written.append(path)
        blocks.append(_text_block(name, frame))

    if 'text' in formats:
        path = out_dir / 'report.txt'
        writer(path, "\n".join(blocks).encode('utf-8'))
        written.append(path)

    logger.info(f"리포트 출력: {out_dir} ({len(written)}개 파일)")
    return sorted(written)


def report_to_records(report: Report) -> List[Dict[str, Any]]:
    """리포트를 줄 단위 레코드로 (분석 단계 산출물)"""
    records: List[Dict[str, Any]] = []
    for name in report.tables:
        records.extend({'section': 'table', 'name': name, 'row': r.to_record()} for r in report.tables[name])
    for name in report.matrices:
        records.extend({'section': 'matrix', 'name': name, 'row': row} for row in report.matrices[name])
    records.extend({'section': 'manifest', 'name': 'inputs', 'row': m} for m in report.manifests)
    return records


def report_from_records(records: Iterable[Dict[str, Any]]) -> Report:
    report = Report()
    for record in records:
        section, name, row = record['section'], record['name'], record['row']
        if section == 'table':
            report.add(name, AnalysisResult.from_record(row))
        elif section == 'matrix':
            report.matrices.setdefault(name, []).append(row)
        elif section == 'manifest':
            report.manifests.append(row)
        else:
            raise ValueError(f"알 수 없는 리포트 섹션: {section}")
    return report
