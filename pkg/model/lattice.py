"""
Group lattice: attributes, level labels and row-major group indexing.

Groups are numbered 1..d in row-major order over the attributes in
declaration order, so the last attribute varies fastest.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from errors import DomainError


@dataclass(frozen=True)
class Attribute:
    name: str
    levels: Tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.levels:
            raise DomainError(f"Attribute '{self.name}' needs at least one level")
        if len(set(self.levels)) != len(self.levels):
            raise DomainError(f"Attribute '{self.name}' has duplicate level labels")

    @property
    def level_count(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class AttributeSpace:
    attributes: Tuple[Attribute, ...]

    def __post_init__(self) -> None:
        if not self.attributes:
            raise DomainError("An attribute space needs at least one attribute")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise DomainError("Attribute names must be unique")

    @classmethod
    def from_counts(cls, counts: Sequence[int], names: Sequence[str] | None = None) -> "AttributeSpace":
        """Space with generated labels '1'..'d_a'; handy for synthetic work."""
        names = list(names) if names is not None else [f"a{i + 1}" for i in range(len(counts))]
        if len(names) != len(counts):
            raise DomainError("names and counts differ in length")
        attrs = []
        for name, c in zip(names, counts):
            if int(c) < 1:
                raise DomainError(f"Attribute '{name}' needs a positive level count")
            attrs.append(Attribute(str(name), tuple(str(i + 1) for i in range(int(c)))))
        return cls(tuple(attrs))

    @classmethod
    def from_levels(cls, spec: Sequence[Tuple[str, Sequence[str]]]) -> "AttributeSpace":
        return cls(tuple(Attribute(str(name), tuple(str(v) for v in levels)) for name, levels in spec))

    @property
    def k(self) -> int:
        return len(self.attributes)

    @property
    def names(self) -> List[str]:
        return [a.name for a in self.attributes]

    @property
    def level_counts(self) -> Tuple[int, ...]:
        return tuple(a.level_count for a in self.attributes)

    @property
    def d(self) -> int:
        return int(np.prod(self.level_counts))

    def level_index(self) -> List[Dict[str, int]]:
        """Per attribute, label -> 1-based class index."""
        return [{lab: i + 1 for i, lab in enumerate(a.levels)} for a in self.attributes]

    def class_table(self) -> np.ndarray:
        """(d, k) array of 0-based class indices of every group in row-major order."""
        grid = np.unravel_index(np.arange(self.d), self.level_counts)
        return np.stack(grid, axis=1)

    def to_dict(self) -> Dict[str, list]:
        return {"attributes": [{"name": a.name, "levels": list(a.levels)} for a in self.attributes]}


def _check_classes(space: AttributeSpace, classes: Sequence[int]) -> None:
    if len(classes) != space.k:
        raise DomainError(f"Expected {space.k} class indices, got {len(classes)}")
    for attr, c in zip(space.attributes, classes):
        if not 1 <= int(c) <= attr.level_count:
            raise DomainError(
                f"Class {c} out of range for attribute '{attr.name}' (1..{attr.level_count})"
            )


def group_index(space: AttributeSpace, classes: Sequence[int]) -> int:
    """1-based group id of a 1-based class tuple."""
    _check_classes(space, classes)
    zero_based = tuple(int(c) - 1 for c in classes)
    return int(np.ravel_multi_index(zero_based, space.level_counts)) + 1


def group_classes(space: AttributeSpace, g: int) -> Tuple[int, ...]:
    """Inverse of group_index."""
    if not 1 <= int(g) <= space.d:
        raise DomainError(f"Group id {g} out of range 1..{space.d}")
    zero_based = np.unravel_index(int(g) - 1, space.level_counts)
    return tuple(int(c) + 1 for c in zero_based)


def group_indices(space: AttributeSpace, classes: np.ndarray) -> np.ndarray:
    """Vectorized 0-based group positions for an (N, k) array of 1-based classes."""
    classes = np.asarray(classes, dtype=np.int64)
    if classes.ndim != 2 or classes.shape[1] != space.k:
        raise DomainError(f"classes must have shape (N, {space.k})")
    for a, attr in enumerate(space.attributes):
        col = classes[:, a]
        bad = np.flatnonzero((col < 1) | (col > attr.level_count))
        if bad.size:
            raise DomainError(
                f"Class {col[bad[0]]} out of range for attribute '{attr.name}' (1..{attr.level_count}) at row {bad[0] + 1}"
            )
    return np.ravel_multi_index(tuple((classes - 1).T), space.level_counts)
