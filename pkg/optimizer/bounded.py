"""
Bound-constrained minimization over the nonnegative orthant with L-BFGS-B.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from errors import DomainError, NumericalError
from settings import DEFAULT_SETTINGS

logger = logging.getLogger(__name__)

STATUSES = ("converged", "max-iter", "line-search-failure")

Objective = Callable[[np.ndarray], Tuple[float, np.ndarray]]


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 200
    gradient_tolerance: float = 1e-8  # sup-norm of the projected gradient
    memory_pairs: int = 10
    max_order: Optional[int] = None  # None means k (no restriction)
    variant: str = "metamap"
    nonneg_center: bool = True
    multistart: bool = False
    function_tolerance: float = 1e-12
    condition_threshold: float = DEFAULT_SETTINGS.condition_threshold

    def __post_init__(self) -> None:
        if self.max_iterations < 1 or self.memory_pairs < 1:
            raise DomainError("max_iterations and memory_pairs must be positive")
        if not self.gradient_tolerance > 0 or not self.function_tolerance > 0:
            raise DomainError("tolerances must be positive")
        if self.variant not in ("metamap", "suresolve"):
            raise DomainError(f"unknown variant '{self.variant}'")


@dataclass(frozen=True)
class BoundedResult:
    x: np.ndarray
    value: float
    status: str
    iterations: int
    initial_value: float
    trace: Tuple[float, ...] = field(default_factory=tuple)


class _Abort(Exception):
    pass


class _CachedObjective:
    """Evaluates value and gradient together, remembering the best feasible point seen."""

    def __init__(self, fun: Objective, free: np.ndarray) -> None:
        self._fun = fun
        self._free = free
        self._last: Optional[Tuple[bytes, float, np.ndarray]] = None
        self.best_x: Optional[np.ndarray] = None
        self.best_value = np.inf

    def __call__(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        key = x.tobytes()
        if self._last is not None and self._last[0] == key:
            return self._last[1], self._last[2]
        point = np.where(self._free, np.maximum(x, 0.0), 0.0)
        try:
            value, grad = self._fun(point)
        except NumericalError as e:
            logger.debug("objective evaluation failed: %s", e)
            raise _Abort() from e
        grad = np.where(self._free, np.asarray(grad, dtype=float), 0.0)
        if not np.isfinite(value) or not np.all(np.isfinite(grad)):
            raise _Abort()
        value = float(value)
        if value < self.best_value:
            self.best_value = value
            self.best_x = point.copy()
        self._last = (key, value, grad)
        return value, grad


def minimize_bounded(
    fun: Objective,
    x0: np.ndarray,
    config: FitConfig = FitConfig(),
    free: Optional[np.ndarray] = None,
) -> BoundedResult:
    """Minimize fun over x >= 0; entries with free=False are pinned at zero.

    Never returns a point worse than x0: on an evaluation failure the best
    point seen so far is returned with status line-search-failure.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or np.any(x0 < 0) or not np.all(np.isfinite(x0)):
        raise DomainError("x0 must be a finite nonnegative vector")
    free = np.ones(x0.shape, dtype=bool) if free is None else np.asarray(free, dtype=bool)
    if free.shape != x0.shape:
        raise DomainError("free mask does not match x0")
    start = np.where(free, x0, 0.0)
    cached = _CachedObjective(fun, free)
    try:
        initial, _ = cached(start)
    except _Abort as e:
        raise NumericalError("objective is not finite at the initial point") from e.__cause__

    trace: List[float] = [initial]

    def record(xk: np.ndarray) -> None:
        value, _ = cached(xk)
        trace.append(min(value, trace[-1]))

    bounds = [(0.0, None) if f else (0.0, 0.0) for f in free]
    iterations = 0
    try:
        res = minimize(
            cached,
            start,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            callback=record,
            options={
                "maxiter": config.max_iterations,
                "maxfun": 20 * config.max_iterations,
                "gtol": config.gradient_tolerance,
                "ftol": config.function_tolerance,
                "maxcor": config.memory_pairs,
            },
        )
        iterations = int(res.nit)
        if res.success:
            status = "converged"
        elif res.status == 1:
            status = "max-iter"
        else:
            status = "line-search-failure"
        candidate = np.where(free, np.clip(res.x, 0.0, None), 0.0)
        value, _ = cached(candidate)
    except _Abort:
        status = "line-search-failure"
        iterations = len(trace) - 1
        candidate, value = cached.best_x, cached.best_value

    if cached.best_value < value:
        candidate, value = cached.best_x, cached.best_value
    if status == "line-search-failure":
        logger.warning("L-BFGS-B stopped early; returning best point (objective %.6g)", value)
    else:
        logger.debug("L-BFGS-B %s after %d iterations (objective %.6g)", status, iterations, value)
    return BoundedResult(candidate, float(value), status, iterations, float(initial), tuple(trace))
