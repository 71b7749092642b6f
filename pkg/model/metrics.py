"""
Evaluation metrics against a ground truth, and the AUC group-variance path.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from errors import DomainError
from model.lattice import AttributeSpace
from model.summary import GroundTruth, TaskSummary


def _included(mu_hat: np.ndarray, truth: GroundTruth) -> tuple[np.ndarray, np.ndarray]:
    mu_hat = np.asarray(mu_hat, dtype=float)
    if mu_hat.shape != truth.mu.shape:
        raise DomainError("estimate and ground truth differ in length")
    if not truth.included.any():
        raise DomainError("ground-truth inclusion mask is empty")
    return mu_hat, truth.included


def mae(mu_hat: np.ndarray, truth: GroundTruth) -> float:
    mu_hat, inc = _included(mu_hat, truth)
    return float(np.mean(np.abs(mu_hat[inc] - truth.mu[inc])))


def rmse(mu_hat: np.ndarray, truth: GroundTruth) -> float:
    mu_hat, inc = _included(mu_hat, truth)
    return float(np.sqrt(np.mean((mu_hat[inc] - truth.mu[inc]) ** 2)))


def weighted_mse(mu_hat: np.ndarray, truth: GroundTruth, n: np.ndarray) -> float:
    """Count-weighted squared error averaged over included groups."""
    mu_hat, inc = _included(mu_hat, truth)
    n = np.asarray(n, dtype=float)
    if n.shape != mu_hat.shape:
        raise DomainError("counts and estimate differ in length")
    return float(np.mean(n[inc] * (mu_hat[inc] - truth.mu[inc]) ** 2))


METRICS = {
    "mae": lambda mu_hat, truth, n: mae(mu_hat, truth),
    "rmse": lambda mu_hat, truth, n: rmse(mu_hat, truth),
    "weighted-mse": weighted_mse,
}


def auc_group_variance(n_g: int, n0: int, n1: int) -> float:
    """Mann-Whitney based variance of a group AUC: (n+1) / (12 n n0 n1)."""
    if n0 < 1 or n1 < 1:
        raise DomainError(f"AUC variance needs both classes present (n0={n0}, n1={n1})")
    if n_g != n0 + n1:
        raise DomainError(f"n_g={n_g} must equal n0 + n1 = {n0 + n1}")
    return (n_g + 1) / (12.0 * n_g * n0 * n1)


def auc_summary(
    auc: Sequence[float],
    n0: Sequence[int],
    n1: Sequence[int],
    space: AttributeSpace,
    task_id: str = "0",
) -> TaskSummary:
    """Summary whose precision is 1/var_g; single-class groups are treated as missing."""
    auc = np.asarray(auc, dtype=float)
    n0 = np.asarray(n0, dtype=np.int64)
    n1 = np.asarray(n1, dtype=np.int64)
    d = space.d
    if auc.shape != (d,) or n0.shape != (d,) or n1.shape != (d,):
        raise DomainError(f"AUC inputs must have length d={d}")
    usable = (n0 > 0) & (n1 > 0)
    n = np.where(usable, n0 + n1, 0)
    var = np.ones(d)
    for g in np.flatnonzero(usable):
        var[g] = auc_group_variance(int(n[g]), int(n0[g]), int(n1[g]))
    return TaskSummary(np.where(usable, auc, 0.0), n, 1.0, space, task_id, group_var=var)
