"""
Multi-task SureMap: center estimators (MetaMap, SureSolve), the summed SURE
objective over tasks with analytic gradients, and the per-task estimates.

Per task t, with precision P_t = Sigma_t^{-1}:
  A_t = (I + Lambda P_t)^{-1},  W_t = P_t A_t = (Lambda + Sigma_t)^{-1},
  Q_t = A_t^T P_t A_t = W_t A_t,  S = sum_t W_t.
MetaMap uses N = (I + Gamma S)^{-1} Gamma and M_t = N W_t; SureSolve uses
H = sum_t Q_t and M_t = H^{-1} Q_t. In both cases theta = sum_t M_t y_t.
No inverse of Lambda, Gamma or Sigma_t is ever formed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from baselines.estimators import EstimatorOutput
from errors import DomainError
from model.summary import TaskSummary
from objectives.single_task import ObjectiveEval, gram_contract
from prior.linalg import factorize
from prior.structure import PriorStructure, build_covariance, shrinkage_matrix
from settings import DEFAULT_SETTINGS

VARIANTS = ("metamap", "suresolve")


@dataclass(frozen=True)
class MapCenter:
    theta: np.ndarray
    mixing: List[np.ndarray]  # M_t per task
    meta_precision: np.ndarray  # Sigma_Lambda^{-1} = sum_t W_t
    raw_theta: Optional[np.ndarray] = None  # before the nonnegativity clamp


@dataclass(frozen=True)
class _TaskTerms:
    y: np.ndarray
    a: np.ndarray
    w: np.ndarray
    q: np.ndarray


def _check_tasks(summaries: Sequence[TaskSummary], structure: PriorStructure) -> None:
    if not summaries:
        raise DomainError("at least one task is required")
    for s in summaries:
        if s.d != structure.d:
            raise DomainError("task summaries do not match the prior structure")


def _task_terms(
    summaries: Sequence[TaskSummary], structure: PriorStructure, tau2: np.ndarray, threshold: float
) -> List[_TaskTerms]:
    _check_tasks(summaries, structure)
    cov = build_covariance(structure, tau2)
    terms = []
    for s in summaries:
        p = s.precision
        a = shrinkage_matrix(cov, p, threshold)
        w = p[:, None] * a
        terms.append(_TaskTerms(s.y, a, w, w @ a))
    return terms


def _clamp(theta: np.ndarray, nonneg: bool) -> np.ndarray:
    return np.maximum(theta, 0.0) if nonneg else theta


@dataclass(frozen=True)
class _MetaSystem:
    n: np.ndarray  # (I + Gamma S)^{-1} Gamma
    g: np.ndarray  # (I + Gamma S)^{-1}
    s: np.ndarray


def _meta_system(terms: List[_TaskTerms], gamma: np.ndarray, threshold: float) -> _MetaSystem:
    d = gamma.shape[0]
    s = sum(t.w for t in terms)
    fact = factorize(np.eye(d) + gamma @ s, threshold, "I + Gamma Sigma_Lambda^-1")
    g = fact.solve(np.eye(d))
    return _MetaSystem(g @ gamma, g, s)


def _metamap(terms: List[_TaskTerms], structure: PriorStructure, upsilon2: np.ndarray, threshold: float):
    gamma = build_covariance(structure, structure.check(upsilon2, "upsilon2"))
    meta = _meta_system(terms, gamma, threshold)
    mixing = [meta.n @ t.w for t in terms]
    theta = sum(m @ t.y for m, t in zip(mixing, terms))
    return theta, mixing, meta


def _suresolve(terms: List[_TaskTerms], threshold: float):
    h = sum(t.q for t in terms)
    fact = factorize(h, threshold, "SureSolve normal matrix")
    mixing = [fact.solve(t.q) for t in terms]
    theta = fact.solve(sum(t.q @ t.y for t in terms))
    return theta, mixing, fact


def theta_metamap(
    summaries: Sequence[TaskSummary],
    structure: PriorStructure,
    tau2: np.ndarray,
    upsilon2: np.ndarray,
    nonneg: bool = True,
    threshold: float = DEFAULT_SETTINGS.condition_threshold,
) -> MapCenter:
    terms = _task_terms(summaries, structure, structure.check(tau2), threshold)
    theta, mixing, meta = _metamap(terms, structure, upsilon2, threshold)
    return MapCenter(_clamp(theta, nonneg), mixing, meta.s, theta)


def theta_suresolve(
    summaries: Sequence[TaskSummary],
    structure: PriorStructure,
    tau2: np.ndarray,
    nonneg: bool = True,
    threshold: float = DEFAULT_SETTINGS.condition_threshold,
) -> MapCenter:
    terms = _task_terms(summaries, structure, structure.check(tau2), threshold)
    theta, mixing, _ = _suresolve(terms, threshold)
    return MapCenter(_clamp(theta, nonneg), mixing, sum(t.w for t in terms), theta)


def _value(terms: List[_TaskTerms], theta: np.ndarray, mixing: List[np.ndarray]) -> float:
    total = 0.0
    for t, m in zip(terms, mixing):
        e = theta - t.y
        total += float(e @ t.q @ e) + 2.0 * float(np.trace(t.a @ m) - np.trace(t.a))
    return total


def _metamap_gradient(terms, theta, mixing, meta, structure) -> np.ndarray:
    n = meta.n
    errors = [theta - t.y for t in terms]
    g = sum(t.q @ e for t, e in zip(terms, errors))
    r = sum(t.q for t in terms)
    nrn = n @ r @ n
    ng = n @ g
    k_tau = np.zeros_like(n)
    for t, m, e in zip(terms, mixing, errors):
        we = t.w @ e
        k_tau += -2.0 * np.outer(t.q @ e, we) + 2.0 * np.outer(t.w @ ng, we)
        k_tau += 2.0 * (-(t.w @ m @ t.a) + t.w @ nrn @ t.w - t.w @ t.a @ n @ t.w + t.w @ t.a)
    gt = meta.g.T
    b = sum(t.w @ t.y for t in terms)
    k_ups = 2.0 * np.outer(gt @ g, gt @ b) + 2.0 * (gt @ r @ meta.g)
    return np.concatenate([gram_contract(structure, k_tau), gram_contract(structure, k_ups)])


def _suresolve_gradient(terms, theta, mixing, fact, structure) -> np.ndarray:
    errors = [theta - t.y for t in terms]
    g = sum(t.q @ e for t, e in zip(terms, errors))  # zero up to rounding at the SureSolve center
    h_g = fact.solve(g)
    z = sum(m @ t.a for m, t in zip(mixing, terms))
    z = fact.solve_transposed(z.T).T  # sum_t M_t A_t H^{-1}
    k_tau = np.zeros_like(terms[0].a)
    for t, m, e in zip(terms, mixing, errors):
        we = t.w @ e
        qe = t.q @ e
        a_hinv = fact.solve_transposed(t.a.T).T  # A_t H^{-1}
        k_tau += -2.0 * np.outer(qe, we) + 2.0 * np.outer(t.q @ h_g, we) + 2.0 * np.outer(t.w @ h_g, qe)
        k_tau += 2.0 * (
            -(t.w @ m @ t.a)
            - t.w @ a_hinv @ t.q
            - t.q @ a_hinv @ t.w
            + t.w @ z @ t.q
            + t.q @ z @ t.w
            + t.w @ t.a
        )
    return gram_contract(structure, k_tau)


def mt_objective(
    summaries: Sequence[TaskSummary],
    structure: PriorStructure,
    tau2: np.ndarray,
    upsilon2: Optional[np.ndarray] = None,
    variant: str = "metamap",
    threshold: float = DEFAULT_SETTINGS.condition_threshold,
) -> ObjectiveEval:
    """Summed SURE over tasks (constants dropped) and its gradient.

    The gradient covers tau2 followed by upsilon2 for MetaMap, tau2 only for SureSolve.
    The unclamped center is used throughout.
    """
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant '{variant}' (expected one of {', '.join(VARIANTS)})")
    terms = _task_terms(summaries, structure, structure.check(tau2), threshold)
    if variant == "metamap":
        if upsilon2 is None:
            raise DomainError("MetaMap needs upsilon2")
        theta, mixing, meta = _metamap(terms, structure, upsilon2, threshold)
        grad = _metamap_gradient(terms, theta, mixing, meta, structure)
    else:
        theta, mixing, fact = _suresolve(terms, threshold)
        grad = _suresolve_gradient(terms, theta, mixing, fact, structure)
    return ObjectiveEval(_value(terms, theta, mixing), grad)


def mt_estimate(
    summaries: Sequence[TaskSummary],
    structure: PriorStructure,
    tau2: np.ndarray,
    upsilon2: Optional[np.ndarray] = None,
    variant: str = "metamap",
    nonneg: bool = True,
    threshold: float = DEFAULT_SETTINGS.condition_threshold,
) -> tuple[List[EstimatorOutput], MapCenter]:
    """mu_t = y_t + A_t (theta - y_t) for every task."""
    if variant == "metamap":
        if upsilon2 is None:
            raise DomainError("MetaMap needs upsilon2")
        center = theta_metamap(summaries, structure, tau2, upsilon2, nonneg, threshold)
    elif variant == "suresolve":
        center = theta_suresolve(summaries, structure, tau2, nonneg, threshold)
    else:
        raise DomainError(f"unknown variant '{variant}'")
    cov = build_covariance(structure, tau2)
    out = []
    for s in summaries:
        a = shrinkage_matrix(cov, s.precision, threshold)
        mu = s.y + a @ (center.theta - s.y)
        out.append(EstimatorOutput(mu, f"mt-suremap-{variant}", s.missing, s.task_id))
    return out, center
