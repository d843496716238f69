"""J-operator algebra on finite matrices.

Block layout: entry ``(i, j)`` holds ``K(x_i, x_j)`` and ``K_ab`` is the block
with rows in part ``a`` and columns in part ``b`` (it maps ``L2(X_b)`` into
``L2(X_a)``). With this layout J-Hermiticity reads

    K11* = K11,  K22* = K22,  K21* = -K12.

All operators act on ``L2(X, m)``. For non-unit weights the matrix of the
operator is ``sqrt(w) K sqrt(w)``; functions here work on that matrix and
convert back, so unit-weight spaces see plain entries.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .errors import InvalidKernelError, PreconditionError, SingularError
from .space import PartitionedSpace, check_indices

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class JKernel:
    """Complex kernel matrix bound to a partitioned space.

    J-Hermiticity is a checked property (:func:`is_j_hermitian`), not a
    construction invariant.
    """

    space: PartitionedSpace
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.shape != (self.space.n, self.space.n):
            raise ValueError(
                f"kernel shape {entries.shape} does not match space of {self.space.n} points"
            )
        if not np.all(np.isfinite(entries)):
            raise ValueError("kernel entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_operator(cls, space: PartitionedSpace, matrix) -> "JKernel":
        """Kernel whose operator matrix on ``L2(X, m)`` is ``matrix``."""
        matrix = np.asarray(matrix, dtype=complex)
        if space.unit_weights:
            return cls(space, matrix)
        s = 1.0 / np.sqrt(space.weight_array)
        return cls(space, s[:, None] * matrix * s[None, :])

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def operator(self) -> np.ndarray:
        if self.space.unit_weights:
            return self.entries
        s = np.sqrt(self.space.weight_array)
        return s[:, None] * self.entries * s[None, :]

    def block(self, a: int, b: int) -> np.ndarray:
        """Operator block with rows in part ``a`` and columns in part ``b``."""
        return self.operator[np.ix_(self.space.indices(a), self.space.indices(b))]

    @property
    def even(self) -> np.ndarray:
        m = self.operator
        same = self.space.mask1[:, None] == self.space.mask1[None, :]
        return np.where(same, m, 0)

    @property
    def odd(self) -> np.ndarray:
        return self.operator - self.even

    def with_operator(self, matrix) -> "JKernel":
        return JKernel.from_operator(self.space, matrix)

    def to_dict(self) -> dict:
        out = {"space": self.space.to_dict(), "re": self.entries.real.tolist()}
        if np.any(self.entries.imag != 0):
            out["im"] = self.entries.imag.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "JKernel":
        if "space" not in data or "re" not in data:
            raise ValueError("kernel JSON needs 'space' and 're'")
        space = PartitionedSpace.from_dict(data["space"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise ValueError(f"'re' {re.shape} and 'im' {im.shape} differ in shape")
        return cls(space, re + 1j * im)


class Norms(NamedTuple):
    op: float
    hs: float
    trace_even: float
    norm_1_2: float


class NormPair(NamedTuple):
    lhs: float
    rhs: float


@dataclass(frozen=True)
class Verdict:
    j_hermitian: bool
    hat_spectrum: tuple[float, ...]
    valid: bool
    margin: float
    op_norm_K: float
    op_norm_even: float
    tol: float
    j_defect: float
    schur_consistent: bool | None = None

    def to_dict(self) -> dict:
        return {
            "j_hermitian": self.j_hermitian,
            "valid": self.valid,
            "margin": self.margin,
            "hat_spectrum": list(self.hat_spectrum),
            "op_norm_K": self.op_norm_K,
            "op_norm_even": self.op_norm_even,
            "tol": self.tol,
            "j_defect": self.j_defect,
            "schur_consistent": self.schur_consistent,
        }


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def op_norm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def j_defect(K: JKernel) -> float:
    """Largest entry of ``K - J K* J`` (zero iff K is J-self-adjoint)."""
    m = K.operator
    sign = np.where(K.space.mask1, 1.0, -1.0)
    jmj = sign[:, None] * m.conj().T * sign[None, :]
    return float(np.max(np.abs(m - jmj))) if m.size else 0.0


def _default_tol(m: np.ndarray) -> float:
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    return DEFAULT_TOL * max(1.0, scale)


def is_j_hermitian(K: JKernel, tol: float | None = None) -> bool:
    if tol is None:
        tol = _default_tol(K.operator)
    if tol < 0:
        raise PreconditionError("tol must be non-negative")
    return j_defect(K) <= tol


def hat(K: JKernel) -> JKernel:
    """``K P1 + (1 - K) P2``: columns in X2 are replaced by those of ``1 - K``."""
    m = K.operator.copy()
    i2 = K.space.idx2
    m[:, i2] = -m[:, i2]
    m[i2, i2] += 1.0
    return K.with_operator(m)


def swap_parts(K: JKernel) -> JKernel:
    """The same operator viewed with X1 and X2 exchanged."""
    return JKernel(K.space.swapped(), K.entries)


def check_validity(K: JKernel, tol: float | None = None) -> Verdict:
    """Validity of K as a correlation kernel: J-Hermitian and ``0 <= hat(K) <= 1``."""
    h = hat(K).operator
    defect = j_defect(K)
    jtol = _default_tol(K.operator) if tol is None else tol
    jh = defect <= jtol
    # Symmetrize so roundoff does not leak into the spectrum; for a
    # non-J-Hermitian kernel this is only the Hermitian part, reported as such.
    spectrum = np.linalg.eigvalsh(_hermitian_part(h)) if h.size else np.zeros(0)
    if tol is None:
        tol = DEFAULT_TOL * max(1.0, float(np.max(np.abs(spectrum))) if spectrum.size else 0.0)
    lo, hi = (float(spectrum[0]), float(spectrum[-1])) if spectrum.size else (0.0, 0.0)
    in_range = lo >= -tol and hi <= 1 + tol
    norms_even = op_norm(K.even)

    schur_consistent = None
    if jh and K.space.n1 and K.space.n2 and op_norm(K.block(2, 2)) < 1:
        try:
            schur_consistent = schur_check(K, tol) == (lo >= -tol)
        except PreconditionError:
            schur_consistent = None

    return Verdict(
        j_hermitian=jh,
        hat_spectrum=tuple(float(x) for x in spectrum),
        valid=bool(jh and in_range),
        margin=min(lo, 1.0 - hi),
        op_norm_K=op_norm(K.operator),
        op_norm_even=norms_even,
        tol=float(tol),
        j_defect=defect,
        schur_consistent=schur_consistent,
    )


def schur_complement(K: JKernel) -> np.ndarray:
    """``Q11 = K11 - K21* (1 - K22)^{-1} K21`` for a J-Hermitian K.

    Requires ``1 - K22`` positive definite.
    """
    if not is_j_hermitian(K):
        raise InvalidKernelError("Schur criterion needs a J-Hermitian kernel")
    k11, k21, k22 = K.block(1, 1), K.block(2, 1), K.block(2, 2)
    one_minus = np.eye(len(k22)) - _hermitian_part(k22)
    try:
        chol = np.linalg.cholesky(one_minus)
    except np.linalg.LinAlgError:
        raise PreconditionError("1 - K22 is not positive definite (need ||K22|| < 1)") from None
    # K21* (1-K22)^{-1} K21 = Y* Y with Y = C^{-1} K21, C C* = 1 - K22
    y = np.linalg.solve(chol, k21) if len(k22) else np.zeros((0, len(k11)))
    return _hermitian_part(k11) - y.conj().T @ y


def schur_check(K: JKernel, tol: float = DEFAULT_TOL) -> bool:
    """``hat(K) >= 0`` tested through the Schur complement of ``1 - K22``.

    The ``hat(K) <= 1`` half is the same test applied to ``swap_parts(K)``,
    because ``1 - hat(K)`` is the hat transform of K with the parts exchanged.
    """
    q = schur_complement(K)
    if q.size == 0:
        return True
    return bool(np.linalg.eigvalsh(q)[0] >= -tol)


def norms(K: JKernel) -> Norms:
    m = K.operator
    even = K.even
    hs = float(np.linalg.norm(m)) if m.size else 0.0
    trace_even = float(np.linalg.svd(even, compute_uv=False).sum()) if m.size else 0.0
    return Norms(op=op_norm(m), hs=hs, trace_even=trace_even, norm_1_2=max(hs, trace_even))


def restrict(K: JKernel, delta: Iterable[int]) -> JKernel | None:
    """Principal submatrix on the window; ``None`` for the empty window."""
    idx = check_indices(K.space, delta)
    sub = K.space.subspace(idx)
    if sub is None:
        return None
    return JKernel(sub, K.entries[np.ix_(idx, idx)])


def l_transform(K: JKernel, max_condition: float = 1e12) -> JKernel:
    """``L = K (1 - K)^{-1}``."""
    m = K.operator
    one_minus = np.eye(K.n) - m
    cond = float(np.linalg.cond(one_minus))
    if not np.isfinite(cond) or cond > max_condition:
        raise SingularError(f"1 - K is singular to working precision (cond={cond:.3g})", cond)
    log.debug("l_transform: cond(1-K) = %.3g", cond)
    # L (1-K) = K  <=>  (1-K)^T L^T = K^T
    L = np.linalg.solve(one_minus.T, m.T).T
    out = K.with_operator(L)
    if __debug__ and is_j_hermitian(K) and op_norm(m) < 1:
        v = check_validity(K)
        if v.valid:
            assert is_j_hermitian(out, 1e-8 * max(1.0, cond)), "L lost J-Hermiticity"
            for b in (1, 2):
                blk = out.block(b, b)
                if blk.size:
                    lo = np.linalg.eigvalsh(_hermitian_part(blk))[0]
                    assert lo >= -1e-8 * max(1.0, cond), f"L{b}{b} not PSD (min eig {lo})"
    return out


def norm_identity_check(K: JKernel) -> NormPair:
    """``(||K||, ||hat(K) - P2||)``; equal for J-Hermitian K."""
    h = hat(K).operator.copy()
    i2 = K.space.idx2
    h[i2, i2] -= 1.0
    return NormPair(op_norm(K.operator), op_norm(h))
