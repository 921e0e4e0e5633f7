"""
공통 테스트 픽스처
"""

import json
from pathlib import Path
from typing import Dict, List

import pytest

from src.models.question import Question, QuestionFormat, QuestionSet, QuestionSource

FIXTURES_DIR = Path(__file__).parent / 'fixtures'


def mc_question(index: int, answer: str = 'A', **descriptors) -> Question:
    return Question(
        id=f"mc-{index:03d}",
        text=f"Which option is correct for question number {index}?",
        format=QuestionFormat.MULTIPLE_CHOICE,
        reference_answer=answer,
        options=(f"alpha {index}", f"beta {index}", f"gamma {index}", f"delta {index}"),
        descriptors=dict(descriptors),
    )


def sa_question(index: int, answer: str = None) -> Question:
    return Question(
        id=f"sa-{index:03d}",
        text=f"Who wrote the book number {index}?",
        format=QuestionFormat.SHORT_ANSWER,
        reference_answer=answer or f"Author {index}",
    )


def write_jsonl_lines(path: Path, records: List[Dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(record) + '\n')
    return path


@pytest.fixture
def mc_set() -> QuestionSet:
    """정답 라벨이 A-D 를 돌아가며 쓰는 객관식 12문항"""
    labels = 'ABCD'
    questions = [mc_question(i, labels[i % 4], domain=('physics' if i % 2 else 'biology'))
                 for i in range(12)]
    return QuestionSet(name='gpqa', source=QuestionSource.GPQA, questions=questions)


@pytest.fixture
def sa_set() -> QuestionSet:
    return QuestionSet(name='simpleqa', source=QuestionSource.SIMPLEQA,
                       questions=[sa_question(i) for i in range(6)])


@pytest.fixture
def gpqa_fixture_path() -> Path:
    return FIXTURES_DIR / 'gpqa_small.jsonl'


@pytest.fixture
def simpleqa_fixture_path() -> Path:
    return FIXTURES_DIR / 'simpleqa_small.jsonl'
