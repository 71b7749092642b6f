"""
Single-task SureMap objective ||A y||^2_{Sigma^-1} - 2 Tr(A) and its gradient in tau2.

With W = Sigma^{-1} A (symmetric) the derivative of A in tau2_i is
-A C_i W, so every gradient entry is an inner product <C_i, K> with one
assembled d x d matrix K.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from model.summary import TaskSummary
from prior.structure import PriorStructure, build_covariance, shrinkage_matrix
from settings import DEFAULT_SETTINGS


@dataclass(frozen=True)
class ObjectiveEval:
    value: float
    gradient: np.ndarray


def gram_contract(structure: PriorStructure, k: np.ndarray) -> np.ndarray:
    """<C_i, K> for every subset i."""
    return np.einsum("ijk,jk->i", structure.grams, k)


def st_objective(
    summary: TaskSummary,
    structure: PriorStructure,
    tau2: np.ndarray,
    threshold: float = DEFAULT_SETTINGS.condition_threshold,
) -> ObjectiveEval:
    tau2 = structure.check(tau2)
    p = summary.precision
    a = shrinkage_matrix(build_covariance(structure, tau2), p, threshold)
    w = p[:, None] * a
    r = a @ summary.y
    value = float(p @ (r * r)) - 2.0 * float(np.trace(a))
    k = -2.0 * np.outer(w @ r, w @ summary.y) + 2.0 * (w @ a)
    return ObjectiveEval(value, gram_contract(structure, k))
