"""
End-to-end SureMap fits: tune the prior variances by minimizing SURE, then
return the MAP estimates at the tuned parameters.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from baselines.estimators import EstimatorOutput
from errors import DomainError
from model.summary import TaskSummary
from objectives.multi_task import mt_estimate, mt_objective
from objectives.single_task import st_objective
from optimizer.bounded import BoundedResult, FitConfig, Objective, minimize_bounded
from prior.structure import PriorStructure, build_covariance, order_mask, shrinkage_matrix, unit_full

logger = logging.getLogger(__name__)

RESTART_SCALES = (0.01, 0.1, 10.0, 100.0)

__all__ = ["FitConfig", "FitResult", "fit_single", "fit_multi"]


@dataclass(frozen=True)
class FitResult:
    tau2: np.ndarray
    upsilon2: Optional[np.ndarray]
    theta: np.ndarray
    estimates: List[EstimatorOutput]
    objective: float
    initial_objective: float
    iterations: int
    status: str
    trace: Tuple[float, ...] = field(default_factory=tuple)

    @property
    def mu_hat(self) -> List[np.ndarray]:
        return [e.mu_hat for e in self.estimates]


def _free_entries(structure: PriorStructure, config: FitConfig) -> np.ndarray:
    k = structure.space.k
    return order_mask(k, k if config.max_order is None else config.max_order)


def _run(fun: Objective, x0: np.ndarray, free: np.ndarray, config: FitConfig) -> BoundedResult:
    best = minimize_bounded(fun, x0, config, free)
    if not config.multistart:
        return best
    for scale in RESTART_SCALES:
        res = minimize_bounded(fun, x0 * scale, config, free)
        logger.debug("restart x%g: objective %.6g (%s)", scale, res.value, res.status)
        if res.value < best.value:
            best = BoundedResult(res.x, res.value, res.status, res.iterations, best.initial_value, res.trace)
    return best


def fit_single(summary: TaskSummary, structure: PriorStructure, config: FitConfig = FitConfig()) -> FitResult:
    if summary.d != structure.d:
        raise DomainError("summary does not match the prior structure")
    free = _free_entries(structure, config)
    threshold = config.condition_threshold

    def fun(x: np.ndarray):
        ev = st_objective(summary, structure, x, threshold)
        return ev.value, ev.gradient

    res = _run(fun, unit_full(structure.space.k), free, config)
    tau2 = np.where(free, res.x, 0.0)
    a = shrinkage_matrix(build_covariance(structure, tau2), summary.precision, threshold)
    est = EstimatorOutput(summary.y - a @ summary.y, "suremap", np.zeros(summary.d, dtype=bool), summary.task_id)
    logger.info("suremap fit %s in %d iterations, SURE objective %.6g", res.status, res.iterations, res.value)
    return FitResult(
        tau2=tau2,
        upsilon2=None,
        theta=np.zeros(summary.d),
        estimates=[est],
        objective=res.value,
        initial_objective=res.initial_value,
        iterations=res.iterations,
        status=res.status,
        trace=res.trace,
    )


def fit_multi(
    summaries: Sequence[TaskSummary],
    structure: PriorStructure,
    config: FitConfig = FitConfig(),
) -> FitResult:
    """Joint fit over (tau2, upsilon2) for MetaMap, tau2 alone for SureSolve."""
    if not summaries:
        raise DomainError("at least one task is required")
    size = structure.size
    order_free = _free_entries(structure, config)
    threshold = config.condition_threshold
    variant = config.variant

    if variant == "metamap":
        free = np.concatenate([order_free, order_free])
        x0 = np.concatenate([unit_full(structure.space.k), unit_full(structure.space.k)])

        def fun(x: np.ndarray):
            ev = mt_objective(summaries, structure, x[:size], x[size:], "metamap", threshold)
            return ev.value, ev.gradient

    else:
        free = order_free
        x0 = unit_full(structure.space.k)

        def fun(x: np.ndarray):
            ev = mt_objective(summaries, structure, x, None, "suresolve", threshold)
            return ev.value, ev.gradient

    res = _run(fun, x0, free, config)
    x = np.where(free, res.x, 0.0)
    tau2 = x[:size]
    upsilon2 = x[size:] if variant == "metamap" else None
    estimates, center = mt_estimate(summaries, structure, tau2, upsilon2, variant, config.nonneg_center, threshold)
    logger.info(
        "mt-suremap (%s) fit over %d tasks %s in %d iterations, SURE objective %.6g",
        variant, len(summaries), res.status, res.iterations, res.value,
    )
    return FitResult(
        tau2=tau2,
        upsilon2=upsilon2,
        theta=center.theta,
        estimates=estimates,
        objective=res.value,
        initial_objective=res.initial_value,
        iterations=res.iterations,
        status=res.status,
        trace=res.trace,
    )
