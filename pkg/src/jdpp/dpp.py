"""Correlation functions, exact distributions, local densities, Bogoliubov
functionals and void probabilities of determinantal point processes on a
finite partitioned space.

Configurations inside a :class:`DistributionTable` are bitmasks: bit ``i``
set means point ``i`` is present.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    EnumerationCapError,
    InvalidKernelError,
    NegativeMassError,
    NormOneError,
    PreconditionError,
)
from .fredholm import det_multiplier
from .jop import DEFAULT_TOL, JKernel, check_validity, hat, l_transform, op_norm, restrict
from .space import PartitionedSpace, check_indices, complement_mask, from_mask, to_mask

log = logging.getLogger(__name__)

ENUMERATION_CAP = 14
CLAMP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DistributionTable:
    """Probability mass over all ``2**n`` configurations of ``space``."""

    space: PartitionedSpace
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (1 << self.space.n,):
            raise ValueError(f"expected {1 << self.space.n} masses, got {p.shape}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __getitem__(self, gamma: Iterable[int]) -> float:
        return float(self.probs[to_mask(check_indices(self.space, gamma))])

    def items(self) -> Iterator[tuple[tuple[int, ...], float]]:
        for mask, p in enumerate(self.probs):
            yield from_mask(mask, self.space.n), float(p)

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return dict(self.items())

    def complement_image(self) -> "DistributionTable":
        """Push-forward under the particle-hole involution."""
        masks = np.arange(len(self.probs))
        out = np.empty_like(self.probs)
        out[complement_mask(self.space, masks)] = self.probs
        return DistributionTable(self.space, out)

    def marginal(self, delta: Iterable[int]) -> "DistributionTable":
        """Law of ``gamma ∩ delta`` as a table over the induced subspace."""
        idx = check_indices(self.space, delta)
        sub = self.space.subspace(idx)
        if sub is None:
            raise PreconditionError("marginal over the empty window is trivial")
        masks = np.arange(len(self.probs))
        sub_masks = np.zeros_like(masks)
        for j, i in enumerate(idx):
            sub_masks |= ((masks >> i) & 1) << j
        out = np.bincount(sub_masks, weights=self.probs, minlength=1 << len(idx))
        return DistributionTable(sub, out)

    def total_variation(self, other: "DistributionTable") -> float:
        if other.space.n != self.space.n:
            raise ValueError("tables live on different ground sets")
        return 0.5 * float(np.abs(self.probs - other.probs).sum())

    def expectation(self, f) -> float:
        """``sum_S P(S) f(S)`` for a function of the bool membership vector."""
        n = self.space.n
        masks = np.arange(len(self.probs))
        members = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)
        return float(np.dot(self.probs, f(members)))


def _subset_index_arrays(n: int):
    """Bitmasks grouped by popcount, with their member indices."""
    masks = np.arange(1 << n)
    bits = (masks[:, None] >> np.arange(n)[None, :]) & 1
    sizes = bits.sum(axis=1)
    for k in range(1, n + 1):
        sel = masks[sizes == k]
        idx = np.nonzero(bits[sel])[1].reshape(len(sel), k)
        yield k, sel, idx


def principal_minors(matrix: np.ndarray) -> np.ndarray:
    """``det M[T, T]`` for every subset ``T`` (bitmask order); ``det M[∅, ∅] = 1``."""
    n = matrix.shape[0]
    out = np.empty(1 << n, dtype=complex)
    out[0] = 1.0
    for k, sel, idx in _subset_index_arrays(n):
        subs = matrix[idx[:, :, None], idx[:, None, :]]
        out[sel] = np.linalg.det(subs)
    return out


def mobius_superset(f: np.ndarray) -> np.ndarray:
    """``g(S) = sum_{T ⊇ S} (-1)^{|T \\ S|} f(T)`` by the fast subset transform."""
    g = np.array(f, copy=True)
    n = int(np.log2(len(g)))
    for i in range(n):
        view = g.reshape(-1, 2, 1 << i)
        view[:, 0, :] -= view[:, 1, :]
    return g


def _imag_check(values: np.ndarray, what: str, tol: float = 1e-9):
    worst = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if worst > tol * max(1.0, float(np.max(np.abs(values.real)))):
        raise InvalidKernelError(f"{what} has imaginary part {worst:.3g}; kernel is not J-Hermitian")


def _require_valid(K: JKernel, tol: float | None = None):
    v = check_validity(K, tol)
    if not v.valid:
        why = "not J-Hermitian" if not v.j_hermitian else (
            f"hat spectrum [{v.hat_spectrum[0]:.6g}, {v.hat_spectrum[-1]:.6g}] leaves [0, 1]"
        )
        raise InvalidKernelError(f"kernel is not a correlation kernel: {why}")
    return v


def correlation(K: JKernel, points: Sequence[int], validate: bool = True) -> float:
    """``det[K(x_i, x_j)] * w(x_1)...w(x_k)`` for distinct points."""
    pts = [int(i) for i in points]
    if len(set(pts)) != len(pts):
        raise PreconditionError(f"correlation points must be distinct, got {pts}")
    check_indices(K.space, pts)
    if validate:
        _require_valid(K)
    if not pts:
        return 1.0
    sub = K.operator[np.ix_(pts, pts)]
    d = complex(np.linalg.det(sub))
    _imag_check(np.array([d]), "correlation determinant")
    val = d.real
    if -CLAMP_TOL < val < 0:
        val = 0.0
    return val


def signed_masses(K: JKernel, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Raw Mobius inversion of the correlation functions, without any checks.

    ``P(gamma = S) = sum_{T ⊇ S} (-1)^{|T \\ S|} det K[T, T]``. For a kernel
    that is not a correlation kernel some of these are negative.
    """
    if K.n > cap:
        raise EnumerationCapError(f"n = {K.n} exceeds the enumeration cap {cap}")
    return mobius_superset(principal_minors(K.operator))


def _table_from_masses(space, masses: np.ndarray, what: str) -> DistributionTable:
    _imag_check(masses, what)
    p = masses.real.copy()
    low = float(p.min())
    if low < -CLAMP_TOL:
        raise NegativeMassError(
            f"{what}: mass {low:.3g} below -{CLAMP_TOL:g}"
            + ("; the kernel is not a correlation kernel" if low < -1e-6 else
               "; beyond roundoff, check conditioning"),
            low,
            p,
        )
    if low < 0:
        log.warning("%s: clamping masses down to %.3g to zero", what, low)
        p[p < 0] = 0.0
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise NegativeMassError(f"{what}: masses sum to {total!r}", low, p)
    return DistributionTable(space, p)


def exact_distribution(K: JKernel, cap: int = ENUMERATION_CAP) -> DistributionTable:
    """Exact law of the process over all subsets, by Mobius inversion.

    This is the ground-truth oracle for validity: it does not consult
    :func:`check_validity`, it raises :class:`NegativeMassError` when the
    inversion produces negative masses.
    """
    return _table_from_masses(K.space, signed_masses(K, cap), "exact distribution")


def densities_via_L(
    K: JKernel, delta: Iterable[int], cap: int = ENUMERATION_CAP, tol: float = DEFAULT_TOL
) -> DistributionTable:
    """Law of ``gamma ∩ delta`` from ``Det(1 - K^Δ) det L[Δ][S, S]``."""
    idx = check_indices(K.space, delta)
    _require_valid(K)
    if len(idx) > cap:
        raise EnumerationCapError(f"|Δ| = {len(idx)} exceeds the enumeration cap {cap}")
    kd = restrict(K, idx)
    if kd is None:
        raise PreconditionError("densities over the empty window are trivial")
    norm = op_norm(kd.operator)
    if norm >= 1 - tol:
        raise NormOneError(
            f"||K^Δ|| = {norm:.12g} is 1; no L-operator exists on this window. "
            "Use exact_distribution, or thin the kernel (eps < 1) first."
        )
    L = l_transform(kd)
    void = complex(np.linalg.det(np.eye(len(idx)) - kd.operator))
    masses = void * principal_minors(L.operator)
    return _table_from_masses(kd.space, masses, "local densities")


def bogoliubov(K: JKernel, phi, validate: bool = True) -> float:
    """``E prod_{x in gamma} (1 + phi(x))`` as a Fredholm determinant."""
    if validate:
        _require_valid(K)
    val = det_multiplier(K, phi)
    _imag_check(np.array([val]), "Bogoliubov functional")
    return val.real


@dataclass(frozen=True)
class VoidReport:
    value: float
    norm: float
    norm_one: bool


def void_report(K: JKernel, delta: Iterable[int], tol: float = DEFAULT_TOL) -> VoidReport:
    idx = check_indices(K.space, delta)
    kd = restrict(K, idx)
    if kd is None:
        return VoidReport(1.0, 0.0, False)
    norm = op_norm(kd.operator)
    if abs(norm - 1.0) <= tol:
        # a window where K has norm one is almost surely occupied
        return VoidReport(0.0, norm, True)
    d = complex(np.linalg.det(np.eye(len(idx)) - kd.operator))
    _imag_check(np.array([d]), "void probability")
    val = d.real
    if -CLAMP_TOL < val < 0:
        val = 0.0
    return VoidReport(val, norm, False)


def void_probability(K: JKernel, delta: Iterable[int], tol: float = DEFAULT_TOL) -> float:
    """``Det(1 - K^Δ)``: probability of no points in the window."""
    _require_valid(K)
    return void_report(K, delta, tol).value


def pushforward_complement(K: JKernel) -> JKernel:
    """Kernel of the process pushed forward by the particle-hole involution."""
    return hat(K)


def thin(K: JKernel, eps: float) -> JKernel:
    """``eps * K``; keeps validity since ``hat(eps K) = eps hat(K) + (1 - eps) P2``."""
    if not 0 < eps <= 1:
        raise PreconditionError(f"eps must lie in (0, 1], got {eps}")
    out = K.with_operator(eps * K.operator)
    if __debug__:
        expected = eps * hat(K).operator
        i2 = K.space.idx2
        expected[i2, i2] += 1 - eps
        assert np.allclose(hat(out).operator, expected, atol=1e-12), "hat(eps K) identity broken"
    return out
