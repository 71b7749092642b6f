"""
Synthetic hierarchical data from the additive intersectional-effects prior.

For every subset A an effect table z_A with one N(0, 1) entry per class
combination of A is drawn, and a group receives sum_A tau_A z_A[g_A], so the
group means have covariance Lambda(tau2) exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from cli.benchmark import stream
from errors import DomainError
from model.lattice import AttributeSpace
from model.summary import GroundTruth, RecordBatch, TaskSummary
from prior.structure import PriorStructure, build_structure

logger = logging.getLogger(__name__)

# stream keys, one namespace per random quantity
_THETA, _MEANS, _COUNTS, _NOISE, _ROWS = range(5)


@dataclass(frozen=True)
class SyntheticSpec:
    space: AttributeSpace
    tau2: np.ndarray
    tasks: int = 1
    count_range: Tuple[int, int] = (1, 5)
    upsilon2: Optional[np.ndarray] = None  # None: theta* = 0
    sigma2: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        size = 1 << self.space.k
        tau2 = np.asarray(self.tau2, dtype=float)
        if tau2.shape != (size,) or np.any(tau2 < 0) or not np.all(np.isfinite(tau2)):
            raise DomainError(f"tau2 must be {size} finite nonnegative values")
        object.__setattr__(self, "tau2", tau2)
        if self.upsilon2 is not None:
            ups = np.asarray(self.upsilon2, dtype=float)
            if ups.shape != (size,) or np.any(ups < 0) or not np.all(np.isfinite(ups)):
                raise DomainError(f"upsilon2 must be {size} finite nonnegative values")
            object.__setattr__(self, "upsilon2", ups)
        lo, hi = self.count_range
        if not 0 <= lo <= hi:
            raise DomainError("count_range must satisfy 0 <= low <= high")
        if self.tasks < 1:
            raise DomainError("tasks must be positive")
        if not self.sigma2 > 0:
            raise DomainError("sigma2 must be positive")

    @classmethod
    def from_document(cls, doc: Dict[str, Any]) -> "SyntheticSpec":
        space = AttributeSpace.from_counts(doc["level_counts"], doc.get("names"))
        return cls(
            space=space,
            tau2=np.array(doc["tau2"], dtype=float),
            tasks=int(doc.get("tasks", 1)),
            count_range=tuple(doc.get("count_range", (1, 5))),
            upsilon2=np.array(doc["upsilon2"], dtype=float) if "upsilon2" in doc else None,
            sigma2=float(doc.get("sigma2", 1.0)),
            seed=int(doc.get("seed", 0)),
        )


@dataclass(frozen=True)
class SyntheticDraw:
    space: AttributeSpace
    theta: np.ndarray
    mu: np.ndarray  # (T, d) true group means
    summaries: List[TaskSummary]

    def truths(self) -> List[GroundTruth]:
        d = self.space.d
        return [GroundTruth(m, np.ones(d, dtype=bool)) for m in self.mu]


def draw_effects(structure: PriorStructure, variances: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One draw of sum_A sqrt(variance_A) U_A z_A."""
    mu = np.zeros(structure.d)
    for mask, u in enumerate(structure.indicators):
        if variances[mask] > 0:
            mu += np.sqrt(variances[mask]) * (u @ rng.standard_normal(u.shape[1]))
    return mu


def simulate(spec: SyntheticSpec, structure: Optional[PriorStructure] = None, stream_key: Sequence[int] = ()) -> SyntheticDraw:
    structure = structure or build_structure(spec.space)
    key = tuple(stream_key)
    d = structure.d
    if spec.upsilon2 is None:
        theta = np.zeros(d)
    else:
        theta = draw_effects(structure, spec.upsilon2, stream(spec.seed, *key, _THETA))
    lo, hi = spec.count_range
    mus, summaries = [], []
    for t in range(spec.tasks):
        mu = theta + draw_effects(structure, spec.tau2, stream(spec.seed, *key, _MEANS, t))
        n = stream(spec.seed, *key, _COUNTS, t).integers(lo, hi + 1, size=d)
        noise = stream(spec.seed, *key, _NOISE, t).standard_normal(d)
        y = np.where(n > 0, mu + np.sqrt(spec.sigma2 / np.maximum(n, 1)) * noise, 0.0)
        mus.append(mu)
        summaries.append(TaskSummary(y, n, spec.sigma2, spec.space, str(t)))
    return SyntheticDraw(spec.space, theta, np.stack(mus), summaries)


def draw_records(spec: SyntheticSpec, draw: SyntheticDraw, stream_key: Sequence[int] = ()) -> RecordBatch:
    """Per-row values N(mu_tg, sigma2) with n_tg rows for every group of every task."""
    table = draw.space.class_table() + 1
    classes, values, tasks = [], [], []
    for t, s in enumerate(draw.summaries):
        g = np.repeat(np.arange(draw.space.d), s.n)
        rng = stream(spec.seed, *tuple(stream_key), _ROWS, t)
        classes.append(table[g])
        values.append(draw.mu[t][g] + np.sqrt(spec.sigma2) * rng.standard_normal(g.size))
        tasks.append(np.full(g.size, str(t)))
    return RecordBatch(np.concatenate(classes), np.concatenate(values), np.concatenate(tasks))


def draw_document(draw: SyntheticDraw) -> Dict[str, Any]:
    """Summary-compatible document that also records the truth."""
    return {
        **draw.space.to_dict(),
        "sigma2": draw.summaries[0].sigma2,
        "tasks": [{"id": s.task_id, "y": s.y.tolist(), "n": s.n.tolist()} for s in draw.summaries],
        "theta": draw.theta.tolist(),
        "truth": [{"id": s.task_id, "mu": m.tolist()} for s, m in zip(draw.summaries, draw.mu)],
    }
