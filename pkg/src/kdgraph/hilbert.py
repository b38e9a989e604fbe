"""Linear algebra substrate: DFT bases, operator validation and KD distributions.

Basis convention: ``|a_i>`` is the computational basis and ``|b_j>`` is the
``j``-th column of ``U`` with ``U[i, j] = omega_d**(i*j) / sqrt(d)``.  The KD
grid is ``Q[i, j] = <a_i|F|b_j> <b_j|a_i>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DEFAULT_TOL = 1e-9


class ValidationError(ValueError):
    """An operator failed a named physical invariant."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


def omega_powers(d: int, exponents) -> np.ndarray:
    """``exp(2 pi i k / d)`` with ``k`` reduced mod ``d`` first."""
    k = np.mod(np.asarray(exponents, dtype=np.int64), d)
    return np.exp(2j * np.pi * k / d)


@dataclass(frozen=True)
class DftPair:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be positive, got {self.d}")

    @cached_property
    def U(self) -> np.ndarray:
        idx = np.arange(self.d)
        return omega_powers(self.d, np.outer(idx, idx)) / np.sqrt(self.d)

    def a(self, i: int) -> np.ndarray:
        v = np.zeros(self.d, dtype=complex)
        v[i] = 1.0
        return v

    def b(self, j: int) -> np.ndarray:
        return self.U[:, j].copy()


def check_finite(F: np.ndarray) -> None:
    if not np.all(np.isfinite(F)):
        raise ValidationError("finiteness", "matrix has NaN or Inf entries")


def hermiticity_defect(F: np.ndarray) -> float:
    return float(np.linalg.norm(F - F.conj().T))


def as_hermitian(F, tol: float = DEFAULT_TOL) -> np.ndarray:
    F = np.asarray(F, dtype=complex)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValidationError("shape", f"expected a square matrix, got shape {F.shape}")
    check_finite(F)
    defect = hermiticity_defect(F)
    if defect > tol:
        raise ValidationError("hermiticity", f"||F - F^dag||_F = {defect:.3e} > {tol:.1e}")
    return F


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        F = as_hermitian(self.matrix, self.tol)
        tr = np.trace(F)
        if abs(tr - 1) > self.tol:
            raise ValidationError("trace", f"trace {tr.real:.12g} differs from 1")
        lam = float(np.linalg.eigvalsh(F).min())
        if lam < -self.tol:
            raise ValidationError("positivity", f"minimum eigenvalue {lam:.3e} < 0")
        object.__setattr__(self, "matrix", F)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class KDDistribution:
    Q: np.ndarray
    tol: float = DEFAULT_TOL
    worst_imag: tuple = field(init=False)
    worst_real: tuple = field(init=False)

    def __post_init__(self):
        im = np.abs(self.Q.imag)
        ij = np.unravel_index(np.argmax(im), im.shape)
        object.__setattr__(self, "worst_imag", (tuple(int(t) for t in ij), complex(self.Q[ij])))
        re = self.Q.real
        ij = np.unravel_index(np.argmin(re), re.shape)
        object.__setattr__(self, "worst_real", (tuple(int(t) for t in ij), complex(self.Q[ij])))

    @property
    def is_real(self) -> bool:
        return abs(self.worst_imag[1].imag) <= self.tol

    @property
    def is_classical(self) -> bool:
        return self.is_real and self.worst_real[1].real >= -self.tol

    @property
    def normalization_residual(self) -> float:
        return float(abs(self.Q.sum() - 1))

    def worst_offender(self):
        """``(index, value)`` of the entry that most violates classicality."""
        if not self.is_real:
            return self.worst_imag
        return self.worst_real


def kd_grid(F: np.ndarray, pair: DftPair) -> np.ndarray:
    """Raw KD grid without validation; ``F`` may be any square matrix."""
    return (F @ pair.U) * pair.U.conj()


def kd_distribution(F, pair: DftPair, tol: float = DEFAULT_TOL) -> KDDistribution:
    F = as_hermitian(F, tol)
    if F.shape[0] != pair.d:
        raise ValueError(f"operator dimension {F.shape[0]} does not match pair dimension {pair.d}")
    return KDDistribution(kd_grid(F, pair), tol)


def is_kd_classical(F, pair: DftPair, tol: float = DEFAULT_TOL):
    """Returns ``(verdict, worst_offender)``."""
    dist = kd_distribution(F, pair, tol)
    return dist.is_classical, dist.worst_offender()


def is_kd_real(F, pair: DftPair, tol: float = DEFAULT_TOL):
    dist = kd_distribution(F, pair, tol)
    return dist.is_real, dist.worst_imag


# -- real vectorization -------------------------------------------------------

_SQRT2 = np.sqrt(2.0)


def _offdiag_index(d: int):
    return np.triu_indices(d, k=1)


def hermitian_to_real_vector(F, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Isometric map to ``R^(d^2)``: diagonal, then ``sqrt2*Re, sqrt2*Im`` per upper pair."""
    F = as_hermitian(F, tol)
    return _vec(F)


def _vec(F: np.ndarray) -> np.ndarray:
    d = F.shape[0]
    r, c = _offdiag_index(d)
    off = F[r, c]
    out = np.empty(d * d)
    out[:d] = np.diag(F).real
    out[d::2] = _SQRT2 * off.real
    out[d + 1 :: 2] = _SQRT2 * off.imag
    return out


def vectorize_many(ops) -> np.ndarray:
    """Column stack of vectorized Hermitian operators (no validation)."""
    return np.column_stack([_vec(np.asarray(F)) for F in ops])


def real_vector_to_hermitian(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"length {v.size} is not a perfect square")
    F = np.zeros((d, d), dtype=complex)
    F[np.diag_indices(d)] = v[:d]
    r, c = _offdiag_index(d)
    F[r, c] = (v[d::2] + 1j * v[d + 1 :: 2]) / _SQRT2
    F[c, r] = F[r, c].conj()
    return F


def singular_rank(A: np.ndarray, rank_tol: float = 1e-10) -> int:
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def rank_of_span(ops, rank_tol: float = 1e-10) -> int:
    ops = [as_hermitian(F) for F in ops]
    if not ops:
        return 0
    return singular_rank(vectorize_many(ops), rank_tol)


def kd_real_space_dimension(pair: DftPair, rank_tol: float = 1e-10) -> int:
    """Null-space dimension of ``F -> Im Q(F)`` on the real space of Hermitian matrices."""
    d = pair.d
    cols = []
    for k in range(d * d):
        e = np.zeros(d * d)
        e[k] = 1.0
        cols.append(kd_grid(real_vector_to_hermitian(e), pair).imag.ravel())
    return d * d - singular_rank(np.column_stack(cols), rank_tol)


# -- JSON matrix I/O ------------------------------------------------------------


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    try:
        d, re, im = obj["d"], obj["re"], obj["im"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"matrix JSON needs keys d, re, im: {exc}") from None
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"invalid dimension {d!r}")
    for name, rows in (("re", re), ("im", im)):
        if not isinstance(rows, list) or len(rows) != d:
            raise ValueError(f"'{name}' must have {d} rows")
        for n, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != d:
                raise ValueError(f"'{name}' row {n} is ragged (expected {d} entries)")
    return np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)


def matrix_to_json(F: np.ndarray) -> dict:
    F = np.asarray(F, dtype=complex)
    return {"d": int(F.shape[0]), "re": F.real.tolist(), "im": F.imag.tolist()}
