"""Extended Fredholm determinants ``Det(1 + A)`` for block matrices.

At finite dimension the extended determinant coincides with the ordinary
one; the series and block routes are kept as independent evaluations of the
same number and must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalInconsistencyError, PreconditionError, SingularError
from .jop import JKernel, is_j_hermitian, norms, op_norm


@dataclass(frozen=True)
class DetReport:
    value: complex
    method: str
    terms_used: int | None = None
    truncation_bound: float | None = None

    def to_dict(self) -> dict:
        return {
            "value": {"re": self.value.real, "im": self.value.imag},
            "method": self.method,
            "terms_used": self.terms_used,
            "truncation_bound": self.truncation_bound,
        }


def power_traces(A: JKernel, k_max: int) -> np.ndarray:
    """``p_1 = Tr(A_even)``, ``p_k = Tr(A^k)`` for ``2 <= k <= k_max``."""
    m = A.operator
    p = np.zeros(k_max + 1, dtype=complex)
    if k_max >= 1:
        p[1] = np.trace(A.even)
    power = m
    for k in range(2, k_max + 1):
        power = power @ m
        p[k] = np.trace(power)
    return p


def cycle_coefficients(A: JKernel, n_max: int) -> np.ndarray:
    """``C_1..C_{n_max}`` via Newton's recursion on the power traces.

    ``n C_n = sum_{k=1}^{n} (-1)^(k-1) p_k C_{n-k}``, ``C_0 = 1``. This equals
    the signed sum over permutation cycle types of products of ``p_k``.
    """
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    p = power_traces(A, n_max)
    c = np.zeros(n_max + 1, dtype=complex)
    c[0] = 1.0
    for n in range(1, n_max + 1):
        acc = 0j
        for k in range(1, n + 1):
            acc += (-1) ** (k - 1) * p[k] * c[n - k]
        c[n] = acc / n
    return c[1:]


def det_series(A: JKernel, tol: float = 0.0, n_cap: int | None = None) -> DetReport:
    """``1 + sum C_n`` truncated once the tail bound drops below ``tol``.

    ``|C_n| <= ||A||_{1|2}^n`` gives the geometric tail bound whenever
    ``||A||_{1|2} < 1``. Without that, or with ``tol = 0``, the sum runs to
    ``min(n, n_cap)`` terms; for an n x n matrix ``C_k = 0`` beyond ``k = n``.
    """
    n = A.n
    if n_cap is None:
        n_cap = n
    if n_cap < 1:
        raise PreconditionError("n_cap must be >= 1")
    b = norms(A).norm_1_2
    n_terms = min(n, n_cap)
    if b < 1 and tol > 0:
        for N in range(1, n_terms + 1):
            if b ** (N + 1) / (1 - b) <= tol:
                n_terms = N
                break
    c = cycle_coefficients(A, n_terms)
    value = complex(1 + c.sum())
    if n_terms >= n:
        bound = 0.0
    elif b < 1:
        bound = b ** (n_terms + 1) / (1 - b)
    else:
        bound = math.inf
    return DetReport(value, "series", n_terms, bound)


def det_direct(A: JKernel) -> DetReport:
    """``det(1 + A) * exp(-Tr(A_odd))`` by pivoted LU."""
    tr_odd = np.trace(A.odd)
    assert tr_odd == 0, "odd part must have zero diagonal"
    value = complex(np.linalg.det(np.eye(A.n) + A.operator)) if A.n else 1 + 0j
    return DetReport(value * np.exp(-tr_odd), "direct")


def det_block(A: JKernel) -> DetReport:
    """``Det(1 - A) = det(1 - A11) det(1 - A22 - A21 (1 - A11)^{-1} A12)``.

    Note the sign: this evaluates ``Det(1 - A)``. Needs ``||A11|| < 1``.
    """
    a11, a12 = A.block(1, 1), A.block(1, 2)
    a21, a22 = A.block(2, 1), A.block(2, 2)
    if a11.size and op_norm(a11) >= 1:
        raise PreconditionError(f"block method needs ||A11|| < 1, got {op_norm(a11):.6g}")
    one11 = np.eye(len(a11)) - a11
    if a11.size:
        try:
            d1 = np.linalg.det(one11)
            schur = np.eye(len(a22)) - a22 - a21 @ np.linalg.solve(one11, a12)
        except np.linalg.LinAlgError as exc:
            raise SingularError(f"1 - A11 is singular: {exc}") from None
    else:
        d1, schur = 1.0, np.eye(len(a22)) - a22
    d2 = np.linalg.det(schur) if schur.size else 1.0
    value = complex(d1 * d2)
    if (
        is_j_hermitian(A)
        and op_norm(A.operator) < 1
        and (a11.size == 0 or np.linalg.eigvalsh((a11 + a11.conj().T) / 2)[0] >= 0)
    ):
        assert value.real > 0 and abs(value.imag) <= 1e-9 * max(1.0, abs(value)), (
            f"Det(1-A) should be positive here, got {value}"
        )
    return DetReport(value, "block")


def det_multiplier(K: JKernel, phi, rtol: float = 1e-10) -> complex:
    """``Det(1 + sgn(phi) sqrt|phi| K sqrt|phi|)``, cross-checked against ``Det(1 + K phi)``."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (K.n,):
        raise PreconditionError(f"phi needs {K.n} values, got shape {phi.shape}")
    if not np.all(np.isfinite(phi)):
        raise PreconditionError("phi must be finite")
    m = K.operator
    root = np.sqrt(np.abs(phi))
    left = np.sign(phi) * root
    sym = left[:, None] * m * root[None, :]
    one = np.eye(K.n)
    a = complex(np.linalg.det(one + sym))
    b = complex(np.linalg.det(one + m * phi[None, :]))
    if abs(a - b) > rtol * max(1.0, abs(a), abs(b)):
        raise NumericalInconsistencyError(f"multiplier determinants disagree: {a} vs {b}")
    return a


def evaluate(A: JKernel, method: str = "direct", **kwargs) -> DetReport:
    """Dispatch by method name; ``block`` returns ``Det(1 + A)`` via ``det_block(-A)``."""
    if method == "series":
        return det_series(A, **kwargs)
    if method == "direct":
        return det_direct(A)
    if method == "block":
        rep = det_block(A.with_operator(-A.operator))
        return DetReport(rep.value, "block")
    raise PreconditionError(f"unknown method {method!r}; use series, direct or block")
