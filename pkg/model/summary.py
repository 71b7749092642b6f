"""
Per-record batches and the Gaussian-model sufficient statistics (y, n, sigma2)
consumed by every estimator.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from errors import DegenerateVarianceError, DomainError
from model.lattice import AttributeSpace, group_indices
from settings import DEFAULT_SETTINGS, Settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecordBatch:
    """Rows of (1-based class tuple, value) with an optional task id per row."""

    classes: np.ndarray  # (N, k) int
    values: np.ndarray  # (N,) float
    tasks: Optional[np.ndarray] = None  # (N,) str

    def __post_init__(self) -> None:
        classes = np.asarray(self.classes, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        if classes.ndim != 2:
            raise DomainError("classes must be a 2-D array")
        if values.shape != (classes.shape[0],):
            raise DomainError("values must have one entry per row")
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "values", values)
        if self.tasks is not None:
            tasks = np.asarray(self.tasks).astype(str)
            if tasks.shape != values.shape:
                raise DomainError("tasks must have one entry per row")
            object.__setattr__(self, "tasks", tasks)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def take(self, rows: np.ndarray) -> "RecordBatch":
        rows = np.asarray(rows, dtype=np.int64)
        tasks = None if self.tasks is None else self.tasks[rows]
        return RecordBatch(self.classes[rows], self.values[rows], tasks)

    def task_ids(self) -> List[str]:
        """Task ids in order of first appearance."""
        if self.tasks is None:
            return []
        _, first = np.unique(self.tasks, return_index=True)
        return [str(self.tasks[i]) for i in sorted(first)]

    def split_by_task(self) -> List[Tuple[str, "RecordBatch"]]:
        if self.tasks is None:
            return [("0", self)]
        out = []
        for tid in self.task_ids():
            out.append((tid, self.take(np.flatnonzero(self.tasks == tid))))
        return out


@dataclass(frozen=True)
class TaskSummary:
    y: np.ndarray
    n: np.ndarray
    sigma2: float
    space: AttributeSpace
    task_id: str = "0"
    group_var: Optional[np.ndarray] = None  # overrides sigma2 / n_g when given

    def __post_init__(self) -> None:
        d = self.space.d
        y = np.asarray(self.y, dtype=float)
        n = np.asarray(self.n, dtype=np.int64)
        if y.shape != (d,) or n.shape != (d,):
            raise DomainError(f"y and n must have length d={d}")
        if np.any(n < 0):
            raise DomainError("group counts must be nonnegative")
        if not np.isfinite(self.sigma2) or self.sigma2 <= 0:
            raise DomainError("sigma2 must be positive and finite")
        y = np.where(n > 0, y, 0.0)
        if not np.all(np.isfinite(y)):
            raise DomainError("group means must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "sigma2", float(self.sigma2))
        if self.group_var is not None:
            gv = np.asarray(self.group_var, dtype=float)
            if gv.shape != (d,):
                raise DomainError(f"group_var must have length d={d}")
            if np.any(gv[n > 0] <= 0) or not np.all(np.isfinite(gv[n > 0])):
                raise DomainError("group variances of populated groups must be positive")
            object.__setattr__(self, "group_var", gv)

    @property
    def d(self) -> int:
        return self.space.d

    @property
    def missing(self) -> np.ndarray:
        return self.n == 0

    @property
    def precision(self) -> np.ndarray:
        """Diagonal of Sigma^{-1}; zero for groups without data."""
        if self.group_var is not None:
            out = np.zeros(self.d)
            populated = self.n > 0
            out[populated] = 1.0 / self.group_var[populated]
            return out
        return self.n / self.sigma2

    @property
    def total(self) -> int:
        return int(self.n.sum())

    def with_values(self, y: np.ndarray) -> "TaskSummary":
        return TaskSummary(np.asarray(y, dtype=float), self.n, self.sigma2, self.space, self.task_id, self.group_var)


@dataclass(frozen=True)
class GroundTruth:
    mu: np.ndarray
    included: np.ndarray
    counts: Optional[np.ndarray] = field(default=None)

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        inc = np.asarray(self.included, dtype=bool)
        if mu.shape != inc.shape:
            raise DomainError("mu and included must have the same length")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "included", inc)


def _group_moments(batch: RecordBatch, space: AttributeSpace) -> Tuple[np.ndarray, np.ndarray, float]:
    g = group_indices(space, batch.classes)
    n = np.bincount(g, minlength=space.d)
    sums = np.bincount(g, weights=batch.values, minlength=space.d)
    y = np.zeros(space.d)
    populated = n > 0
    y[populated] = sums[populated] / n[populated]
    resid = batch.values - y[g]
    # sorted accumulation keeps the sum independent of row order
    rss = float(np.sum(np.sort(resid * resid)))
    return y, n, rss


def _pooled_sigma2(rss: float, dof: int, settings: Settings) -> float:
    if dof <= 0:
        if settings.fallback_sigma2 is not None:
            logger.warning("No residual degrees of freedom; using fallback sigma2=%g", settings.fallback_sigma2)
            return float(settings.fallback_sigma2)
        raise DegenerateVarianceError(
            "Cannot estimate sigma2: every nonempty group has a single row (N - d+ <= 0)"
        )
    sigma2 = rss / dof
    floor = settings.sigma2_floor
    if sigma2 <= 0 or (floor and sigma2 < floor):
        if floor:
            logger.warning("Residual variance %g below floor; using sigma2=%g", sigma2, floor)
            return float(floor)
        if settings.fallback_sigma2 is not None:
            return float(settings.fallback_sigma2)
        raise DegenerateVarianceError("Within-group residual variance is zero")
    return float(sigma2)


def summarize(
    batch: RecordBatch,
    space: AttributeSpace,
    settings: Settings = DEFAULT_SETTINGS,
    task_id: str = "0",
) -> TaskSummary:
    if len(batch) == 0:
        raise DomainError("Cannot summarize an empty batch")
    y, n, rss = _group_moments(batch, space)
    dof = len(batch) - int(np.count_nonzero(n))
    sigma2 = _pooled_sigma2(rss, dof, settings)
    return TaskSummary(y, n, sigma2, space, task_id)


def summarize_multi(
    batches: Sequence[RecordBatch],
    space: AttributeSpace,
    settings: Settings = DEFAULT_SETTINGS,
    task_ids: Optional[Sequence[str]] = None,
) -> List[TaskSummary]:
    """Per-task means and counts with one sigma2 pooled over all tasks."""
    if not batches:
        raise DomainError("At least one task is required")
    ids = list(task_ids) if task_ids is not None else [str(t) for t in range(len(batches))]
    if len(ids) != len(batches):
        raise DomainError("task_ids and batches differ in length")
    moments = []
    rss_total = 0.0
    dof = 0
    for b in batches:
        if len(b) == 0:
            raise DomainError("Cannot summarize an empty task batch")
        y, n, rss = _group_moments(b, space)
        moments.append((y, n))
        rss_total += rss
        dof += len(b) - int(np.count_nonzero(n))
    sigma2 = _pooled_sigma2(rss_total, dof, settings)
    return [TaskSummary(y, n, sigma2, space, tid) for (y, n), tid in zip(moments, ids)]


def summarize_batch(batch: RecordBatch, space: AttributeSpace, settings: Settings = DEFAULT_SETTINGS) -> List[TaskSummary]:
    """Split by the task column (if any) and summarize with a shared sigma2."""
    parts = batch.split_by_task()
    if batch.tasks is None:
        return [summarize(batch, space, settings)]
    return summarize_multi([b for _, b in parts], space, settings, [t for t, _ in parts])


def ground_truth(batch: RecordBatch, space: AttributeSpace, threshold: int = DEFAULT_SETTINGS.truth_threshold) -> GroundTruth:
    """Full-data group means; groups with fewer than `threshold` rows are excluded."""
    if threshold < 1:
        raise DomainError("threshold must be positive")
    y, n, _ = _group_moments(batch, space)
    return GroundTruth(y, n >= threshold, n)
