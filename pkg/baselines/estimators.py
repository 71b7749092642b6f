"""
Closed-form reference estimators: naive, pooled, Bock variants and the
multi-task global / offset / Bock baselines.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from errors import DomainError
from model.summary import TaskSummary

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimatorOutput:
    mu_hat: np.ndarray
    method: str
    fallback: np.ndarray  # True where the value is not a direct estimate from the group's own data
    task_id: str = "0"

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu_hat, dtype=float)
        if not np.all(np.isfinite(mu)):
            raise DomainError(f"{self.method} produced non-finite estimates")
        object.__setattr__(self, "mu_hat", mu)
        object.__setattr__(self, "fallback", np.asarray(self.fallback, dtype=bool))


def _pooled_value(y: np.ndarray, weights: np.ndarray) -> float:
    total = float(weights.sum())
    if total <= 0:
        raise DomainError("pooled mean needs at least one populated group")
    return float(weights @ y) / total


def naive(summary: TaskSummary) -> EstimatorOutput:
    missing = summary.missing
    if missing.all():
        raise DomainError("naive estimator needs at least one populated group")
    mu = summary.y.copy()
    if missing.any():
        mu[missing] = _pooled_value(summary.y, summary.precision)
    return EstimatorOutput(mu, "naive", missing, summary.task_id)


def pooled(summary: TaskSummary, center: Optional[np.ndarray] = None) -> EstimatorOutput:
    """Precision-weighted overall mean; with a center, theta + pooled(y - theta)."""
    w = summary.precision
    if center is None:
        mu = np.full(summary.d, _pooled_value(summary.y, w))
    else:
        center = _check_center(center, summary.d)
        mu = center + _pooled_value(summary.y - center, w)
    return EstimatorOutput(mu, "pooled", summary.missing, summary.task_id)


def _check_center(center: np.ndarray, d: int) -> np.ndarray:
    center = np.asarray(center, dtype=float)
    if center.shape != (d,):
        raise DomainError(f"center must have length d={d}")
    return center


def _positive_part_shrink(summary: TaskSummary, center: np.ndarray, constant: float, method: str) -> EstimatorOutput:
    p = summary.precision
    resid = np.where(summary.missing, 0.0, summary.y - center)
    q = float(p @ (resid * resid))
    factor = 0.0 if q <= 0 else min(1.0, max(0.0, 1.0 - constant / q))
    return EstimatorOutput(center + factor * resid, method, summary.missing, summary.task_id)


def bock(summary: TaskSummary, center: np.ndarray) -> EstimatorOutput:
    """theta + (1 - (d-2)/q)_+ (y - theta), q the precision-weighted residual norm."""
    if summary.d < 3:
        raise DomainError("Bock estimator needs d >= 3")
    center = _check_center(center, summary.d)
    return _positive_part_shrink(summary, center, summary.d - 2, "bock")


def bock_pooled(summary: TaskSummary) -> EstimatorOutput:
    """Bock shrinkage toward the data-dependent pooled mean, constant d-3."""
    if summary.d < 4:
        raise DomainError("pooled Bock estimator needs d >= 4")
    center = pooled(summary).mu_hat
    return _positive_part_shrink(summary, center, summary.d - 3, "bock-pooled")


def _stack(summaries: Sequence[TaskSummary]) -> tuple[np.ndarray, np.ndarray]:
    if not summaries:
        raise DomainError("at least one task is required")
    d = summaries[0].d
    if any(s.d != d for s in summaries):
        raise DomainError("all tasks must share the same attribute space")
    ys = np.stack([s.y for s in summaries])
    ps = np.stack([s.precision for s in summaries])
    return ys, ps


def _precision_weighted(ys: np.ndarray, ps: np.ndarray, fallback_pooled: bool, what: str) -> tuple[np.ndarray, np.ndarray]:
    total = ps.sum(axis=0)
    empty = total <= 0
    mu = np.zeros(ys.shape[1])
    mu[~empty] = (ps * ys).sum(axis=0)[~empty] / total[~empty]
    if empty.any():
        if not fallback_pooled:
            groups = ", ".join(str(g + 1) for g in np.flatnonzero(empty))
            raise DomainError(f"{what}: groups {groups} have no data in any task")
        mu[empty] = _pooled_value(ys.ravel(), ps.ravel())
        logger.info("%s: %d groups without data use the pooled mean", what, int(empty.sum()))
    return mu, empty


def mt_global(summaries: Sequence[TaskSummary], fallback_pooled: bool = False) -> EstimatorOutput:
    ys, ps = _stack(summaries)
    mu, empty = _precision_weighted(ys, ps, fallback_pooled, "mt-global")
    return EstimatorOutput(mu, "mt-global", empty, "*")


def mt_offset(summaries: Sequence[TaskSummary], fallback_pooled: bool = False) -> List[EstimatorOutput]:
    theta = mt_global(summaries, fallback_pooled)
    out = []
    for s in summaries:
        shifted = pooled(s, theta.mu_hat).mu_hat
        out.append(EstimatorOutput(shifted, "mt-offset", s.missing, s.task_id))
    return out


def leave_one_out_centers(summaries: Sequence[TaskSummary]) -> List[np.ndarray]:
    """Per task, precision-weighted group means over all other tasks."""
    ys, ps = _stack(summaries)
    T = ys.shape[0]
    if T < 2:
        raise DomainError("leave-one-task-out centers need at least two tasks")
    centers = []
    for t in range(T):
        others = np.arange(T) != t
        if ps[others].sum() <= 0:
            raise DomainError(f"task {summaries[t].task_id}: no data in any other task")
        mu, _ = _precision_weighted(ys[others], ps[others], True, "mt-bock")
        centers.append(mu)
    return centers


def mt_bock(summaries: Sequence[TaskSummary]) -> List[EstimatorOutput]:
    out = []
    for s, center in zip(summaries, leave_one_out_centers(summaries)):
        est = bock(s, center)
        out.append(EstimatorOutput(est.mu_hat, "mt-bock", s.missing, s.task_id))
    return out
