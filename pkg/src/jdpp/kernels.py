"""Kernel constructors: the G-operator family, random valid kernels and
Nystrom discretization of continuous block kernels."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import PreconditionError, SingularError
from .jop import JKernel, hat, is_j_hermitian, j_defect
from .space import PartitionedSpace

log = logging.getLogger(__name__)


def _g_shape_check(space: PartitionedSpace, G: np.ndarray) -> np.ndarray:
    G = np.asarray(G, dtype=complex)
    if G.ndim != 2 or G.shape != (space.n2, space.n1):
        raise PreconditionError(
            f"G must map L2(X1) into L2(X2): expected shape {(space.n2, space.n1)}, got {G.shape}"
        )
    return G


def from_G(space: PartitionedSpace, G) -> JKernel:
    """``K = L (1 + L)^{-1}`` with ``L`` holding ``G`` as its X1 -> X2 block and
    ``-G*`` as its X2 -> X1 block.

    The result is J-Hermitian with ``K11 = G*G (1 + G*G)^{-1}``,
    ``K22 = GG* (1 + GG*)^{-1}``, ``K21 = G (1 + G*G)^{-1}`` and
    ``K12 = -G* (1 + GG*)^{-1}``. Its hat transform is the orthogonal
    projection onto ``{G*y ⊕ y : y in L2(X2)}``, which is the orthogonal
    complement of the graph ``{h ⊕ (-G h)}``; see :func:`hat_range_vectors`.
    """
    G = _g_shape_check(space, G)
    n = space.n
    i1, i2 = space.idx1, space.idx2
    L = np.zeros((n, n), dtype=complex)
    L[np.ix_(i2, i1)] = G
    L[np.ix_(i1, i2)] = -G.conj().T
    one_plus = np.eye(n) + L
    # Hermitian part of 1 + L is the identity, so 1 + L is always invertible
    try:
        K = np.linalg.solve(one_plus.T, L.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularError(f"1 + L reported singular: {exc}") from None
    out = JKernel.from_operator(space, K)

    if __debug__:
        gg = G.conj().T @ G
        ggs = G @ G.conj().T
        inv1 = np.linalg.inv(np.eye(space.n1) + gg)
        inv2 = np.linalg.inv(np.eye(space.n2) + ggs)
        blocks = {
            (1, 1): gg @ inv1,
            (2, 2): ggs @ inv2,
            (2, 1): G @ inv1,
            (1, 2): -G.conj().T @ inv2,
        }
        scale = max(1.0, float(np.abs(G).max()) if G.size else 0.0)
        for (a, b), expected in blocks.items():
            if expected.size:
                assert np.allclose(out.block(a, b), expected, atol=1e-10 * scale), f"K{a}{b} mismatch"
        assert is_j_hermitian(out, 1e-10 * scale)
    return out


def graph_vectors(space: PartitionedSpace, G) -> np.ndarray:
    """Columns ``e_j ⊕ G e_j`` spanning the graph ``{h ⊕ Gh : h in L2(X1)}``."""
    G = _g_shape_check(space, G)
    v = np.zeros((space.n, space.n1), dtype=complex)
    v[space.idx1, np.arange(space.n1)] = 1.0
    v[space.idx2, :] = G
    return v


def hat_range_vectors(space: PartitionedSpace, G) -> np.ndarray:
    """Columns ``G* e_k ⊕ e_k`` spanning the range of ``hat(from_G(space, G))``."""
    G = _g_shape_check(space, G)
    v = np.zeros((space.n, space.n2), dtype=complex)
    v[space.idx2, np.arange(space.n2)] = 1.0
    v[space.idx1, :] = G.conj().T
    return v


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]


def random_hermitian(
    n: int,
    rng: np.random.Generator,
    rank: int | None = None,
    projection: bool = False,
    norm_cap: float = 1.0,
) -> np.ndarray:
    if not 0 < norm_cap <= 1:
        raise PreconditionError(f"norm_cap must lie in (0, 1], got {norm_cap}")
    if rank is not None and not 0 <= rank <= n:
        raise PreconditionError(f"rank must lie in [0, {n}], got {rank}")
    u = haar_unitary(n, rng)
    if projection:
        r = int(rng.integers(0, n + 1)) if rank is None else rank
        lam = np.zeros(n)
        lam[:r] = 1.0
    else:
        lam = rng.uniform(0.0, norm_cap, size=n)
        if rank is not None:
            lam[rank:] = 0.0
    h = (u * lam[None, :]) @ u.conj().T
    return (h + h.conj().T) / 2


def random_valid(
    space: PartitionedSpace,
    rank: int | None = None,
    projection: bool = False,
    norm_cap: float = 1.0,
    seed=None,
) -> JKernel:
    """Random correlation kernel ``hat(H)`` for a random ``0 <= H <= norm_cap``.

    With ``projection=True``, ``H`` is a random rank-``rank`` orthogonal
    projection (rank drawn uniformly when not given).
    """
    rng = np.random.default_rng(seed)
    h = random_hermitian(space.n, rng, rank, projection, norm_cap)
    return hat(JKernel.from_operator(space, h))


Block = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ContinuousKernelSpec:
    """Block kernel on two real intervals.

    ``blocks`` maps ``"k11"``, ``"k12"``, ``"k21"``, ``"k22"`` to vectorized
    callables ``k(x, y)``; ``k12`` has ``x`` in part 1 and ``y`` in part 2.
    Missing blocks are zero. ``part2=None`` gives a single-part space.
    Intervals may be given in either direction.
    """

    part1: tuple[float, float] | None
    part2: tuple[float, float] | None = None
    blocks: dict[str, Block] = field(default_factory=dict)
    quadrature: str = "midpoint"
    points_per_part: int = 64


def quadrature_rule(a: float, b: float, n: int, rule: str) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and positive weights on the interval from ``a`` to ``b``."""
    if n < 1:
        raise PreconditionError("points_per_part must be >= 1")
    length = abs(b - a)
    if rule == "midpoint":
        t = (np.arange(n) + 0.5) / n
        w = np.full(n, length / n)
    elif rule in ("gauss", "gauss_legendre"):
        x, wl = np.polynomial.legendre.leggauss(n)
        t = (x + 1) / 2
        w = wl * length / 2
    else:
        raise PreconditionError(f"unknown quadrature {rule!r}; use midpoint or gauss")
    return a + (b - a) * t, w


def discretize(spec: ContinuousKernelSpec, jtol: float = 1e-8) -> JKernel:
    """Nystrom matrix ``sqrt(w_i) k(x_i, x_j) sqrt(w_j)`` on the quadrature grid.

    The weights are absorbed into the entries, so the returned kernel lives
    on a unit-weight space whose labels are the node coordinates.
    """
    grids = []
    for p, interval in ((1, spec.part1), (2, spec.part2)):
        if interval is None:
            continue
        nodes, weights = quadrature_rule(interval[0], interval[1], spec.points_per_part, spec.quadrature)
        grids.append((p, nodes, weights))
    if not grids:
        raise PreconditionError("at least one part needs an interval")
    unknown = set(spec.blocks) - {"k11", "k12", "k21", "k22"}
    if unknown:
        raise PreconditionError(f"unknown block names {sorted(unknown)}")

    part = np.concatenate([np.full(len(x), p) for p, x, _ in grids])
    nodes = np.concatenate([x for _, x, _ in grids])
    weights = np.concatenate([w for _, _, w in grids])
    n = len(nodes)
    m = np.zeros((n, n), dtype=complex)
    for a in (1, 2):
        for b in (1, 2):
            fn = spec.blocks.get(f"k{a}{b}")
            ra, cb = np.flatnonzero(part == a), np.flatnonzero(part == b)
            if fn is None or not len(ra) or not len(cb):
                continue
            xx, yy = np.meshgrid(nodes[ra], nodes[cb], indexing="ij")
            vals = np.broadcast_to(np.asarray(fn(xx, yy), dtype=complex), xx.shape)
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"block k{a}{b} produced non-finite values on the grid")
            m[np.ix_(ra, cb)] = vals
    space = PartitionedSpace(tuple(int(p) for p in part), None, tuple(float(x) for x in nodes))
    defect = j_defect(JKernel(space, m))
    if defect > jtol:
        log.warning("kernel functions are not J-Hermitian on the grid (defect %.3g)", defect)
    root = np.sqrt(weights)
    return JKernel(space, root[:, None] * m * root[None, :])
