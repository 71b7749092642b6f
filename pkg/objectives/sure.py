"""
MAP estimation under a Gaussian prior N(theta, Lambda) and Stein's unbiased
risk estimate for the precision-weighted MSE.
"""
from __future__ import annotations

import numpy as np

from baselines.estimators import EstimatorOutput
from errors import DomainError
from model.summary import TaskSummary
from prior.structure import shrinkage_matrix
from settings import DEFAULT_SETTINGS


def map_estimate(
    summary: TaskSummary,
    theta: np.ndarray,
    cov: np.ndarray,
    threshold: float = DEFAULT_SETTINGS.condition_threshold,
) -> EstimatorOutput:
    """mu = y - A (y - theta) with A = (I + Lambda Sigma^{-1})^{-1}; valid for singular Lambda."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (summary.d,) or np.shape(cov) != (summary.d, summary.d):
        raise DomainError("theta / Lambda dimensions do not match the summary")
    a = shrinkage_matrix(cov, summary.precision, threshold)
    mu = summary.y - a @ (summary.y - theta)
    return EstimatorOutput(mu, "map", np.zeros(summary.d, dtype=bool), summary.task_id)


def map_divergence(a: np.ndarray) -> float:
    """Divergence of y -> y - A(y - theta), i.e. d - Tr(A)."""
    return float(a.shape[0] - np.trace(a))


def sure_value(summary: TaskSummary, mu_hat: np.ndarray, divergence: float) -> float:
    """(sigma2/d) (||mu - y||^2_{Sigma^-1} - d + 2 div)."""
    mu_hat = np.asarray(mu_hat, dtype=float)
    if mu_hat.shape != (summary.d,):
        raise DomainError("estimate length does not match the summary")
    resid = mu_hat - summary.y
    fit = float(summary.precision @ (resid * resid))
    return summary.sigma2 / summary.d * (fit - summary.d + 2.0 * divergence)


def sure_value_general(
    y: np.ndarray,
    sigma: np.ndarray,
    weight: np.ndarray,
    mu_hat: np.ndarray,
    jacobian: np.ndarray,
) -> float:
    """||mu - y||^2_W + Tr(W Sigma) + 2 sum(Sigma * (W J - W)) for full Sigma and W."""
    y = np.asarray(y, dtype=float)
    mu_hat = np.asarray(mu_hat, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    weight = np.asarray(weight, dtype=float)
    jacobian = np.asarray(jacobian, dtype=float)
    d = y.shape[0]
    for name, m in (("Sigma", sigma), ("W", weight), ("Jacobian", jacobian)):
        if m.shape != (d, d):
            raise DomainError(f"{name} must be {d}x{d}")
    if mu_hat.shape != (d,):
        raise DomainError(f"estimate must have length {d}")
    resid = mu_hat - y
    return float(resid @ weight @ resid + np.trace(weight @ sigma) + 2.0 * np.sum(sigma * (weight @ jacobian - weight)))


def weighted_risk(mu_hat: np.ndarray, mu: np.ndarray, summary: TaskSummary) -> float:
    """(1/d) sum_g n_g (mu_hat_g - mu_g)^2, the loss that sure_value estimates."""
    diff = np.asarray(mu_hat, dtype=float) - np.asarray(mu, dtype=float)
    return float(summary.precision @ (diff * diff)) * summary.sigma2 / summary.d
