"""Exact sampling of J-Hermitian determinantal processes through
particle-hole duality, plus Monte Carlo checks against exact values.

Randomness: sample ``i`` of a batch with seed ``s`` reads a fixed block of
uniforms from the Philox4x64-10 counter-based generator keyed by ``s``,
starting at counter ``i * blocks_per_sample``. Any chunking of a batch over
worker threads therefore yields bit-identical output.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .dpp import ENUMERATION_CAP, correlation, exact_distribution
from .errors import EnumerationCapError, InvalidKernelError, PreconditionError
from .jop import JKernel, check_validity, hat

CLAMP = 1e-9
RESIDUAL_FLOOR = 1e-12
CHUNK = 4096


@dataclass(frozen=True, eq=False)
class SampleBatch:
    seed: int
    count: int
    members: np.ndarray = field(repr=False)  # (count, n) bool

    @property
    def configurations(self) -> list[tuple[int, ...]]:
        return [tuple(int(i) for i in np.flatnonzero(row)) for row in self.members]

    def masks(self) -> np.ndarray:
        n = self.members.shape[1]
        if n > 62:
            raise EnumerationCapError("bitmask encoding needs n <= 62")
        return self.members.astype(np.int64) @ (np.int64(1) << np.arange(n, dtype=np.int64))


def _uniforms(seed: int, start: int, count: int, n: int) -> np.ndarray:
    """Uniforms for samples ``start .. start+count-1``, ``2n`` per sample."""
    blocks = max(1, math.ceil(2 * n / 4))
    bg = np.random.Philox(key=int(seed) & ((1 << 128) - 1))
    bg.advance(start * blocks)
    u = np.random.Generator(bg).random((count, 4 * blocks))
    return u[:, : 2 * n]


def _hermitian_spectrum(H: np.ndarray, tol: float = 1e-9):
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise PreconditionError(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.abs(H).max()) if H.size else 0.0)
    if H.size and np.abs(H - H.conj().T).max() > tol * scale:
        raise InvalidKernelError("sampler needs a Hermitian kernel")
    lam, vecs = np.linalg.eigh((H + H.conj().T) / 2)
    if lam.size and (lam[0] < -CLAMP or lam[-1] > 1 + CLAMP):
        raise InvalidKernelError(
            f"spectrum [{lam[0]:.6g}, {lam[-1]:.6g}] leaves [0, 1]; not a correlation kernel"
        )
    return np.clip(lam, 0.0, 1.0), vecs


def _choose(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise inverse-CDF draw with probability proportional to ``weights``."""
    c = np.cumsum(weights, axis=1)
    target = u * c[:, -1]
    x = (c <= target[:, None]).sum(axis=1)
    return np.minimum(x, weights.shape[1] - 1)


def _projection_phase(vecs: np.ndarray, keep: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Sample from the projection DPPs spanned by the kept eigenvectors.

    ``keep`` is (B, n) with the same number ``k`` of kept vectors per row.
    Point selection draws with probability proportional to the diagonal of
    the residual projection (the squared norm of its columns), followed by
    the rank-one Gram downdate ``P -= P[:, x] P[x, :] / P[x, x]``.
    """
    B, n = keep.shape
    k = int(keep[0].sum())
    P = np.einsum("ij,bj,kj->bik", vecs, keep.astype(float), vecs.conj())
    out = np.zeros((B, n), dtype=bool)
    rows = np.arange(B)
    for t in range(k):
        d = np.clip(np.real(np.einsum("bii->bi", P)), 0.0, None)
        d[d < RESIDUAL_FLOOR] = 0.0
        d[out] = 0.0
        x = _choose(d, u[:, t])
        out[rows, x] = True
        if t + 1 < k:
            col = P[rows, :, x]
            row = P[rows, x, :]
            piv = np.real(P[rows, x, x])
            P = P - col[:, :, None] * row[:, None, :] / piv[:, None, None]
    return out


def _sample_chunk(lam, vecs, seed, start, count) -> np.ndarray:
    n = len(lam)
    u = _uniforms(seed, start, count, n)
    keep = u[:, :n] < lam[None, :]
    sizes = keep.sum(axis=1)
    members = np.zeros((count, n), dtype=bool)
    for k in np.unique(sizes):
        if k == 0:
            continue
        sel = np.flatnonzero(sizes == k)
        members[sel] = _projection_phase(vecs, keep[sel], u[sel, n:])
    return members


def sample_hermitian(H, count: int, seed: int, threads: int = 1) -> SampleBatch:
    """Exact samples of the determinantal process with Hermitian kernel ``0 <= H <= 1``.

    Each sample keeps eigenvector ``i`` with probability ``lambda_i``, then
    samples the projection process spanned by the kept eigenvectors.
    """
    if count < 0:
        raise PreconditionError("count must be non-negative")
    lam, vecs = _hermitian_spectrum(H)
    starts = list(range(0, count, CHUNK))
    sizes = [min(CHUNK, count - s) for s in starts]
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda a: _sample_chunk(lam, vecs, seed, *a), zip(starts, sizes)))
    else:
        parts = [_sample_chunk(lam, vecs, seed, s, c) for s, c in zip(starts, sizes)]
    members = np.concatenate(parts) if parts else np.zeros((0, len(lam)), dtype=bool)
    return SampleBatch(int(seed), int(count), members)


def sample_j(K: JKernel, count: int, seed: int, threads: int = 1) -> SampleBatch:
    """Samples of DPP(K): sample DPP(hat K), then apply the particle-hole involution."""
    v = check_validity(K)
    if not v.valid:
        raise InvalidKernelError("kernel fails the hat criterion; nothing to sample")
    batch = sample_hermitian(hat(K).operator, count, seed, threads)
    members = batch.members ^ K.space.mask2[None, :]
    return SampleBatch(batch.seed, batch.count, members)


@dataclass(frozen=True)
class QueryEstimate:
    points: tuple[int, ...]
    exact: float
    empirical: float
    stderr: float
    z: float

    @property
    def flagged(self) -> bool:
        return abs(self.z) > 4


@dataclass(frozen=True)
class EstimateReport:
    count: int
    seed: int
    rows: tuple[QueryEstimate, ...]

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "seed": self.seed,
            "queries": [
                {
                    "points": list(r.points),
                    "exact": r.exact,
                    "empirical": r.empirical,
                    "stderr": r.stderr,
                    "z": r.z,
                    "flagged": r.flagged,
                }
                for r in self.rows
            ],
        }


def _z(empirical: float, exact: float, stderr: float) -> float:
    if stderr > 0:
        return (empirical - exact) / stderr
    return 0.0 if abs(empirical - exact) <= 1e-12 else math.copysign(math.inf, empirical - exact)


def estimate(
    K: JKernel, queries: Sequence[Sequence[int]], count: int, seed: int, threads: int = 1
) -> EstimateReport:
    """Empirical ``P(q ⊆ gamma)`` against ``det K[q, q]`` for each query."""
    batch = sample_j(K, count, seed, threads)
    rows = []
    for q in queries:
        q = tuple(int(i) for i in q)
        exact = correlation(K, q, validate=False)
        hits = batch.members[:, list(q)].all(axis=1) if q else np.ones(count, dtype=bool)
        p = float(hits.mean()) if count else 0.0
        stderr = math.sqrt(p * (1 - p) / count) if count else 0.0
        rows.append(QueryEstimate(q, exact, p, stderr, _z(p, exact, stderr)))
    return EstimateReport(count, seed, tuple(rows))


@dataclass(frozen=True)
class GofReport:
    statistic: float
    dof: int
    p_value: float
    cells: int
    impossible_hits: int
    count: int
    seed: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def chi_square_test(observed: np.ndarray, probs: np.ndarray, min_expected: float = 5.0):
    """Pearson chi-square with cells of expected count below ``min_expected`` pooled.

    Returns ``(statistic, dof, p_value, cells, impossible_hits)``. Any hit on a
    configuration of (numerically) zero mass rejects outright.
    """
    observed = np.asarray(observed, dtype=float)
    total = observed.sum()
    expected = np.asarray(probs, dtype=float) * total
    impossible = probs <= 1e-14
    impossible_hits = int(observed[impossible].sum())
    if impossible_hits:
        return math.inf, 0, 0.0, 0, impossible_hits
    big = (expected >= min_expected) & ~impossible
    obs = list(observed[big])
    exp = list(expected[big])
    small = ~big & ~impossible
    pooled_exp, pooled_obs = expected[small].sum(), observed[small].sum()
    if pooled_exp >= min_expected:
        obs.append(pooled_obs)
        exp.append(pooled_exp)
    elif pooled_exp > 0 or pooled_obs > 0:
        if exp:
            j = int(np.argmin(exp))
            obs[j] += pooled_obs
            exp[j] += pooled_exp
        else:
            obs, exp = [pooled_obs], [pooled_exp]
    if len(obs) < 2:
        return 0.0, 0, 1.0, len(obs), 0
    obs, exp = np.array(obs), np.array(exp)
    exp *= obs.sum() / exp.sum()
    stat, p = stats.chisquare(obs, exp)
    return float(stat), len(obs) - 1, float(p), len(obs), 0


def goodness_of_fit(
    K: JKernel, count: int, seed: int, threads: int = 1, cap: int = ENUMERATION_CAP
) -> GofReport:
    """Chi-square test of sampled configurations against the exact distribution."""
    if K.n > cap:
        raise EnumerationCapError(f"n = {K.n} exceeds the enumeration cap {cap}")
    table = exact_distribution(K, cap)
    batch = sample_j(K, count, seed, threads)
    observed = np.bincount(batch.masks(), minlength=1 << K.n)
    stat, dof, p, cells, bad = chi_square_test(observed, table.probs)
    return GofReport(stat, dof, p, cells, bad, count, seed)
