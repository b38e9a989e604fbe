"""Dense phase-1 simplex (Bland's rule) for ``A w = b, w >= 0`` feasibility."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
INDETERMINATE = "indeterminate"


@dataclass
class PhaseOneResult:
    status: str
    w: np.ndarray | None
    objective: float
    residual: float
    iterations: int


def phase_one(
    A: np.ndarray,
    b: np.ndarray,
    tol: float = 1e-7,
    max_iter: int = 50_000,
    pivot_tol: float = 1e-9,
    cost_tol: float = 1e-11,
) -> PhaseOneResult:
    """Minimise the artificial mass ``sum a`` subject to ``A w + a = b``.

    The verdict is made on the L1 residual ``|A w - b|_1`` of the final basic
    solution, recomputed from the original data rather than read off the
    tableau.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    As = A * sign[:, None]
    bs = b * sign

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = As
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = bs
    T[m, :n] = -As.sum(axis=0)
    T[m, -1] = -bs.sum()
    basis = list(range(n, n + m))

    it = 0
    status = None
    while True:
        # Bland: lowest-index improving column; artificials never re-enter
        improving = np.flatnonzero(T[m, :n] < -cost_tol)
        if improving.size == 0:
            break
        if it >= max_iter:
            status = INDETERMINATE
            break
        j = int(improving[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > pivot_tol)
        if rows.size == 0:
            # unbounded direction cannot occur in phase 1; treat as numerical breakdown
            status = INDETERMINATE
            break
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-15 * max(1.0, abs(best))]
        i = int(min(ties, key=lambda r: basis[r]))
        T[i] /= T[i, j]
        others = np.arange(m + 1) != i
        T[others] -= np.outer(T[others, j], T[i])
        basis[i] = j
        it += 1

    objective = float(-T[m, -1])
    w = _resolve_basic(As, bs, basis, n)
    residual = float(np.abs(A @ w - b).sum())
    if status is None:
        status = FEASIBLE if residual <= tol else INFEASIBLE
    return PhaseOneResult(status, w, objective, residual, it)


def _resolve_basic(As, bs, basis, n):
    m = As.shape[0]
    full = np.hstack([As, np.eye(m)])
    cols = np.array(basis)
    z, *_ = np.linalg.lstsq(full[:, cols], bs, rcond=None)
    w = np.zeros(n)
    original = cols < n
    w[cols[original]] = z[original]
    return np.clip(w, 0.0, None)
