from __future__ import annotations

from typing import Callable, List

import numpy as np
import pytest

from cli.simulate import SyntheticSpec, draw_records, simulate
from model.lattice import AttributeSpace
from model.summary import TaskSummary
from prior.structure import PriorStructure, build_structure


@pytest.fixture
def space23() -> AttributeSpace:
    return AttributeSpace.from_levels([("sex", ["f", "m"]), ("age", ["young", "mid", "old"])])


@pytest.fixture
def structure23(space23: AttributeSpace) -> PriorStructure:
    return build_structure(space23)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def make_summaries(space23: AttributeSpace) -> Callable[..., List[TaskSummary]]:
    """Random task summaries on the 2x3 space with counts in [lo, hi]."""

    def make(rng: np.random.Generator, tasks: int = 1, lo: int = 1, hi: int = 20, sigma2: float = 1.0) -> List[TaskSummary]:
        out = []
        for t in range(tasks):
            n = rng.integers(lo, hi + 1, size=space23.d)
            y = rng.normal(0.5, 1.0, size=space23.d)
            out.append(TaskSummary(y, n, sigma2, space23, str(t)))
        return out

    return make


@pytest.fixture
def write_csv(tmp_path):
    def write(name: str, text: str):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write


@pytest.fixture
def synthetic_records():
    """Two-task record batch on a 2x3 space with 30-60 rows per group."""
    spec = SyntheticSpec(
        AttributeSpace.from_counts([2, 3]),
        np.array([0.5, 0.3, 0.3, 0.1]),
        tasks=2,
        count_range=(30, 60),
        upsilon2=np.array([0.2, 0.1, 0.1, 0.05]),
        seed=5,
    )
    draw = simulate(spec)
    return draw_records(spec, draw), spec.space
