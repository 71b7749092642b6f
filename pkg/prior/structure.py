"""
Additive intersectional-effects prior.

Subsets A of the attributes are encoded as bitmasks (bit a set when attribute a,
in declaration order, belongs to A) and enumerated in ascending mask order; this
is also the serialization order of tau2/upsilon2 vectors. For every subset the
indicator matrix U_A maps groups to the class combinations of A, and
C_A = U_A U_A^T marks pairs of groups that agree on A.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from errors import DomainError
from model.lattice import AttributeSpace
from prior.linalg import factorize_spd, psd_factor
from settings import DEFAULT_SETTINGS


def subset_count(k: int) -> int:
    return 1 << k


def full_mask(k: int) -> int:
    return (1 << k) - 1


def subset_members(mask: int, k: int) -> List[int]:
    return [a for a in range(k) if mask >> a & 1]


def subset_size(mask: int) -> int:
    return bin(mask).count("1")


def subset_label(space: AttributeSpace, mask: int) -> str:
    return "{" + ",".join(space.names[a] for a in subset_members(mask, space.k)) + "}"


def subset_labels(space: AttributeSpace) -> List[str]:
    return [subset_label(space, m) for m in range(subset_count(space.k))]


def unit_full(k: int) -> np.ndarray:
    """tau2 with only the full-set entry at one: Lambda = I (fit initialization)."""
    out = np.zeros(subset_count(k))
    out[full_mask(k)] = 1.0
    return out


@dataclass(frozen=True)
class PriorParams:
    tau2: np.ndarray
    upsilon2: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        tau2 = _check_variances(self.tau2, "tau2")
        object.__setattr__(self, "tau2", tau2)
        if self.upsilon2 is not None:
            ups = _check_variances(self.upsilon2, "upsilon2")
            if ups.shape != tau2.shape:
                raise DomainError("tau2 and upsilon2 differ in length")
            object.__setattr__(self, "upsilon2", ups)


def _check_variances(values: np.ndarray, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0 or values.size & (values.size - 1):
        raise DomainError(f"{name} must be a vector of length 2^k")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise DomainError(f"{name} entries must be finite and nonnegative")
    return values


@dataclass(frozen=True)
class PriorStructure:
    space: AttributeSpace
    indicators: Tuple[np.ndarray, ...]  # U_A per mask, (d, prod_{a in A} d_a)
    grams: np.ndarray  # (2^k, d, d) stack of C_A

    @property
    def d(self) -> int:
        return self.space.d

    @property
    def size(self) -> int:
        return self.grams.shape[0]

    def check(self, tau2: np.ndarray, name: str = "tau2") -> np.ndarray:
        tau2 = _check_variances(tau2, name)
        if tau2.shape[0] != self.size:
            raise DomainError(f"{name} must have length 2^k = {self.size}")
        return tau2


def build_structure(space: AttributeSpace, max_groups: int = DEFAULT_SETTINGS.max_groups) -> PriorStructure:
    d = space.d
    if d > max_groups:
        raise DomainError(f"d={d} groups exceeds the configured limit of {max_groups}")
    counts = np.asarray(space.level_counts)
    table = space.class_table()
    indicators = []
    grams = np.empty((subset_count(space.k), d, d))
    for mask in range(subset_count(space.k)):
        members = subset_members(mask, space.k)
        if members:
            cols = np.ravel_multi_index(tuple(table[:, members].T), tuple(counts[members]))
            width = int(np.prod(counts[members]))
        else:
            cols = np.zeros(d, dtype=np.int64)
            width = 1
        u = np.zeros((d, width))
        u[np.arange(d), cols] = 1.0
        u.setflags(write=False)
        indicators.append(u)
        grams[mask] = u @ u.T
    grams.setflags(write=False)
    return PriorStructure(space, tuple(indicators), grams)


def feature_matrix(structure: PriorStructure, masks: Optional[List[int]] = None) -> np.ndarray:
    """Phi: the U_A blocks side by side in ascending mask order."""
    masks = list(range(structure.size)) if masks is None else masks
    return np.hstack([structure.indicators[m] for m in masks])


def build_covariance(structure: PriorStructure, tau2: np.ndarray) -> np.ndarray:
    tau2 = structure.check(tau2)
    return np.tensordot(tau2, structure.grams, axes=1)


def shrinkage_matrix(
    cov: np.ndarray,
    precision: np.ndarray,
    threshold: float = DEFAULT_SETTINGS.condition_threshold,
) -> np.ndarray:
    """
    A = (I + Lambda Sigma^{-1})^{-1}.

    Computed as I - L (I + L^T Sigma^{-1} L)^{-1} L^T Sigma^{-1} with Lambda = L L^T,
    so the inner system is symmetric with eigenvalues >= 1 and zero-precision
    groups need no special case.
    """
    precision = np.asarray(precision, dtype=float)
    if np.any(precision < 0):
        raise DomainError("precision entries must be nonnegative")
    d = precision.shape[0]
    factor = psd_factor(cov, "Lambda")
    if factor.shape[1] == 0:
        return np.eye(d)
    lp = factor.T * precision[None, :]
    inner = np.eye(factor.shape[1]) + lp @ factor
    solved = factorize_spd(inner, threshold, "I + L^T Sigma^-1 L").solve(lp)
    return np.eye(d) - factor @ solved


def order_mask(k: int, max_order: int) -> np.ndarray:
    """True for tau2 entries left free under interaction order `max_order`."""
    if not -1 <= max_order <= k:
        raise DomainError(f"max_order must lie in [-1, {k}]")
    sizes = np.array([subset_size(m) for m in range(subset_count(k))])
    return (sizes <= max_order) | (sizes == k)


def restrict_order(tau2: np.ndarray, max_order: int) -> np.ndarray:
    """Zero the entries with max_order < |A| < k; the full-set entry is kept."""
    tau2 = np.asarray(tau2, dtype=float)
    k = int(np.log2(tau2.shape[0]))
    return np.where(order_mask(k, max_order), tau2, 0.0)
