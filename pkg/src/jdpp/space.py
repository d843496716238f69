"""Finite ground sets split into two parts, configurations and the
particle-hole involution.

Configurations are sorted tuples of indices into a fixed ground-set
ordering. Points of part 1 and part 2 may be interleaved in that ordering;
block views elsewhere are always taken through the part labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Configuration = tuple[int, ...]
IndexWindow = tuple[int, ...]


@dataclass(frozen=True)
class PartitionedSpace:
    """A finite set ``X = X1 ⊔ X2`` with positive point weights.

    ``part[i]`` is 1 or 2. ``weights`` defaults to the counting measure.
    ``labels`` are optional display strings or coordinates, one per point.
    """

    part: tuple[int, ...]
    weights: tuple[float, ...] | None = None
    labels: tuple | None = None

    def __post_init__(self):
        part = tuple(int(p) for p in self.part)
        if len(part) == 0:
            raise ValueError("a partitioned space needs at least one point")
        if any(p not in (1, 2) for p in part):
            raise ValueError(f"part labels must be 1 or 2, got {sorted(set(part))}")
        object.__setattr__(self, "part", part)

        if self.weights is None:
            weights = (1.0,) * len(part)
        else:
            weights = tuple(float(w) for w in self.weights)
        if len(weights) != len(part):
            raise ValueError(f"expected {len(part)} weights, got {len(weights)}")
        if not all(np.isfinite(w) and w > 0 for w in weights):
            raise ValueError("weights must be finite and strictly positive")
        object.__setattr__(self, "weights", weights)

        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(part):
                raise ValueError(f"expected {len(part)} labels, got {len(labels)}")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def split(cls, n1: int, n2: int, weights=None) -> "PartitionedSpace":
        """Space with ``n1`` points of part 1 followed by ``n2`` of part 2."""
        return cls((1,) * n1 + (2,) * n2, weights)

    @property
    def n(self) -> int:
        return len(self.part)

    @cached_property
    def mask1(self) -> np.ndarray:
        return np.array([p == 1 for p in self.part], dtype=bool)

    @cached_property
    def mask2(self) -> np.ndarray:
        return ~self.mask1

    @cached_property
    def idx1(self) -> np.ndarray:
        return np.flatnonzero(self.mask1)

    @cached_property
    def idx2(self) -> np.ndarray:
        return np.flatnonzero(self.mask2)

    @property
    def n1(self) -> int:
        return len(self.idx1)

    @property
    def n2(self) -> int:
        return len(self.idx2)

    @cached_property
    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @property
    def unit_weights(self) -> bool:
        return all(w == 1.0 for w in self.weights)

    @cached_property
    def bits2(self) -> int:
        """Bitmask of the part-2 points (bit ``i`` is point ``i``)."""
        return sum(1 << int(i) for i in self.idx2)

    def indices(self, which: int) -> np.ndarray:
        if which == 1:
            return self.idx1
        if which == 2:
            return self.idx2
        raise ValueError(f"part must be 1 or 2, got {which!r}")

    def subspace(self, indices: Iterable[int]) -> "PartitionedSpace | None":
        """Induced space on a window; ``None`` for the empty window."""
        idx = check_indices(self, indices)
        if not idx:
            return None
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return PartitionedSpace(
            tuple(self.part[i] for i in idx),
            tuple(self.weights[i] for i in idx),
            labels,
        )

    def swapped(self) -> "PartitionedSpace":
        """Same points and weights with the roles of X1 and X2 exchanged."""
        return PartitionedSpace(tuple(3 - p for p in self.part), self.weights, self.labels)

    def to_dict(self) -> dict:
        out = {"n": self.n, "part": list(self.part)}
        if not self.unit_weights:
            out["weights"] = list(self.weights)
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PartitionedSpace":
        if "part" not in data:
            raise ValueError("ground-set JSON needs a 'part' array")
        space = cls(tuple(data["part"]), data.get("weights"), data.get("labels"))
        if "n" in data and int(data["n"]) != space.n:
            raise ValueError(f"'n'={data['n']} does not match len(part)={space.n}")
        return space


def check_indices(space: PartitionedSpace, indices: Iterable[int]) -> tuple[int, ...]:
    """Sorted, duplicate-free tuple of indices; raises on out-of-range."""
    out = sorted({int(i) for i in indices})
    if out and (out[0] < 0 or out[-1] >= space.n):
        raise IndexError(f"indices {out} out of bounds for a space of {space.n} points")
    return tuple(out)


def projector(space: PartitionedSpace, which: int) -> np.ndarray:
    """0/1 diagonal matrix of the orthogonal projection onto ``L2(X_which)``."""
    mask = space.mask1 if which == 1 else space.mask2 if which == 2 else None
    if mask is None:
        raise ValueError(f"part must be 1 or 2, got {which!r}")
    return np.diag(mask.astype(float))


def j_operator(space: PartitionedSpace) -> np.ndarray:
    """``J = P1 - P2``."""
    return projector(space, 1) - projector(space, 2)


def complement(space: PartitionedSpace, gamma: Iterable[int]) -> Configuration:
    """Particle-hole involution: keep ``gamma`` on X1, take holes on X2."""
    g = set(check_indices(space, gamma))
    return tuple(
        i for i in range(space.n) if (i in g) == (space.part[i] == 1)
    )


def complement_mask(space: PartitionedSpace, mask):
    """The involution on bitmask-encoded configurations (works on arrays too)."""
    return mask ^ space.bits2


def window_split(space: PartitionedSpace, delta: Iterable[int]) -> tuple[IndexWindow, IndexWindow]:
    d = check_indices(space, delta)
    return (
        tuple(i for i in d if space.part[i] == 1),
        tuple(i for i in d if space.part[i] == 2),
    )


def to_mask(gamma: Sequence[int]) -> int:
    m = 0
    for i in gamma:
        m |= 1 << int(i)
    return m


def from_mask(mask: int, n: int) -> Configuration:
    return tuple(i for i in range(n) if (int(mask) >> i) & 1)
