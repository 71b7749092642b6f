"""
Weighted ridge regression on the intersectional feature design.

An independent route to the SureMap estimators: the MAP estimate under the
additive prior equals the ridge fit Phi (Phi^T P Phi + K^{-1})^{-1} Phi^T P y,
with Phi the stacked indicator blocks and K the per-column prior variances.
Blocks with zero prior variance are dropped (their coefficients are pinned
at zero), so K^{-1} only involves positive entries.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from baselines.estimators import EstimatorOutput
from errors import DomainError, NumericalError
from model.summary import TaskSummary
from prior.structure import PriorStructure, feature_matrix


@dataclass(frozen=True)
class FeatureDesign:
    phi: np.ndarray
    k_diag: np.ndarray  # prior variance of every column
    masks: List[int]  # subsets whose blocks are kept


def design(structure: PriorStructure, variances: np.ndarray) -> FeatureDesign:
    variances = structure.check(variances)
    masks = [m for m in range(structure.size) if variances[m] > 0]
    if not masks:
        return FeatureDesign(np.zeros((structure.d, 0)), np.zeros(0), [])
    phi = feature_matrix(structure, masks)
    k_diag = np.concatenate([np.full(structure.indicators[m].shape[1], variances[m]) for m in masks])
    return FeatureDesign(phi, k_diag, masks)


def _ridge_solve(phi: np.ndarray, precision: np.ndarray, k_diag: np.ndarray, y: np.ndarray) -> np.ndarray:
    if phi.shape[1] == 0:
        return np.zeros(phi.shape[0])
    normal = phi.T @ (precision[:, None] * phi) + np.diag(1.0 / k_diag)
    try:
        beta = np.linalg.solve(normal, phi.T @ (precision * y))
    except np.linalg.LinAlgError as e:
        raise NumericalError("ridge normal equations are singular") from e
    return phi @ beta


def ridge_single(summary: TaskSummary, structure: PriorStructure, tau2: np.ndarray) -> EstimatorOutput:
    fd = design(structure, tau2)
    mu = _ridge_solve(fd.phi, summary.precision, fd.k_diag, summary.y)
    return EstimatorOutput(mu, "ridge", summary.missing, summary.task_id)


def ridge_multi(
    summaries: Sequence[TaskSummary],
    structure: PriorStructure,
    tau2: np.ndarray,
    upsilon2: np.ndarray,
) -> List[EstimatorOutput]:
    """Block design: every task has its own coefficients plus one shared global block."""
    if not summaries:
        raise DomainError("at least one task is required")
    local = design(structure, tau2)
    shared = design(structure, upsilon2)
    T, d = len(summaries), structure.d
    cl, cs = local.phi.shape[1], shared.phi.shape[1]
    phi = np.zeros((T * d, T * cl + cs))
    for t in range(T):
        rows = slice(t * d, (t + 1) * d)
        phi[rows, t * cl:(t + 1) * cl] = local.phi
        phi[rows, T * cl:] = shared.phi
    k_diag = np.concatenate([np.tile(local.k_diag, T), shared.k_diag])
    precision = np.concatenate([s.precision for s in summaries])
    y = np.concatenate([s.y for s in summaries])
    mu = _ridge_solve(phi, precision, k_diag, y)
    return [
        EstimatorOutput(mu[t * d:(t + 1) * d], "ridge-mt", s.missing, s.task_id)
        for t, s in enumerate(summaries)
    ]


def smw_inverse(a: np.ndarray, x: np.ndarray, r: np.ndarray) -> np.ndarray:
    """(A + X R X^T)^{-1} through the symmetric Sherman-Morrison-Woodbury expansion."""
    a_inv = np.linalg.inv(a)
    inner = np.linalg.inv(r) + x.T @ a_inv @ x
    return a_inv - a_inv @ x @ np.linalg.solve(inner, x.T @ a_inv)


def pair_inverse_identity(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of (A^{-1} + B^{-1})^{-1} A^{-1} = B (A + B)^{-1}."""
    lhs = np.linalg.inv(np.linalg.inv(a) + np.linalg.inv(b)) @ np.linalg.inv(a)
    rhs = b @ np.linalg.inv(a + b)
    return lhs, rhs


def max_discrepancy(left: Sequence[EstimatorOutput], right: Sequence[EstimatorOutput]) -> float:
    return max(float(np.max(np.abs(l.mu_hat - r.mu_hat))) for l, r in zip(left, right))
