"""Convex decompositions of KD-classical states over path pure states.

The sweep walks the path edge by edge.  Across an edge ``v_x -> v_x'`` the
marginal identity lets a common amount be moved from a family of ``p``
source coefficients to the matching family of target coefficients, so each
source family is shifted by its minimum and becomes nonnegative.  Only the
final vertex is left; its coefficients are sums of original coefficients
along a chain of labels and equal ``d * Q[i', j']`` for a suitable grid
entry, so they are nonnegative for KD-classical inputs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .graph import GraphPath, build_graph, canonical_path, path_state_union, validate_path
from .hilbert import (
    DftPair,
    ValidationError,
    _vec,
    as_hermitian,
    is_kd_classical,
    kd_grid,
    real_vector_to_hermitian,
    vectorize_many,
)
from .numtheory import factorize
from .purestates import PureStateLabel, enumerate_all, marginal_families, projector
from .simplex import FEASIBLE, INDETERMINATE, INFEASIBLE, phase_one

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    entry: float = 1e-9
    span: float = 1e-8
    residual: float = 1e-8
    lp: float = 1e-7


DEFAULT_TOLERANCES = Tolerances()


class Rejection(Exception):
    """The input is outside the set the certificate would describe."""

    NOT_KD_CLASSICAL = "not in KD+"
    NOT_IN_SPAN = "not in span"
    NOT_PRIME_POWER = "not a prime power"

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class SweepInconsistency(RuntimeError):
    """A coefficient the construction guarantees nonnegative came out negative."""


@dataclass
class CoefficientTable:
    labels: tuple[PureStateLabel, ...]
    coeffs: np.ndarray
    residual: float

    def by_vertex(self, d: int) -> dict[int, np.ndarray]:
        out: dict[int, np.ndarray] = {}
        for lab, c in zip(self.labels, self.coeffs):
            block = out.setdefault(lab.x, np.zeros((d // lab.x, lab.x)))
            block[lab.m, lab.s] += c
        return out


def span_project(rho, states, tol: float = DEFAULT_TOLERANCES.span):
    """Minimum-norm real coefficients for ``rho`` over ``states``; returns ``(table, in_span)``."""
    if not states:
        raise ValueError("empty state list")
    rho = np.asarray(rho, dtype=complex)
    labels = tuple(lab for lab, _ in states)
    if rho.shape != states[0][1].shape:
        raise ValueError(f"operator shape {rho.shape} does not match states {states[0][1].shape}")
    A = vectorize_many([P for _, P in states])
    b = _vec(rho)
    c, *_ = np.linalg.lstsq(A, b, rcond=1e-10)
    # Frobenius norm of the anti-Hermitian part counts as off-span too
    herm_part = 0.5 * (rho + rho.conj().T)
    anti = float(np.linalg.norm(rho - herm_part))
    residual = float(np.hypot(np.linalg.norm(A @ c - b), anti))
    return CoefficientTable(labels, c, residual), residual <= tol


@dataclass
class DecompositionCertificate:
    method: str
    path: tuple[int, ...] | None
    weights: list[tuple[PureStateLabel, float]]
    weight_sum: float
    residual: float
    sweep_log: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "path": list(self.path) if self.path is not None else None,
            "weights": [{**lab.to_json(), "w": float(w)} for lab, w in self.weights],
            "residual": float(self.residual),
            "weight_sum": float(self.weight_sum),
        }

    def reconstruct(self, pair: DftPair) -> np.ndarray:
        out = np.zeros((pair.d, pair.d), dtype=complex)
        for lab, w in self.weights:
            out += w * projector(lab, pair)
        return out


def verify_certificate(cert: DecompositionCertificate, rho, pair: DftPair,
                       tols: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Independent check: nonnegative weights, unit sum, small reconstruction error."""
    w = np.array([w for _, w in cert.weights])
    if w.size and w.min() < 0:
        return False
    if abs(w.sum() - 1) > tols.residual:
        return False
    return float(np.linalg.norm(np.asarray(rho) - cert.reconstruct(pair))) <= tols.residual


def _resolve_path(path, pair: DftPair) -> GraphPath:
    if isinstance(path, GraphPath):
        gp = path
    else:
        verts = tuple(int(v) for v in path)
        gp = GraphPath(verts[0], verts)
    validate_path(gp, build_graph(pair.d, gp.x0))
    return gp


def _check_input(rho, pair: DftPair, tols: Tolerances) -> np.ndarray:
    rho = as_hermitian(rho, tols.entry)
    if rho.shape[0] != pair.d:
        raise ValueError(f"operator dimension {rho.shape[0]} does not match d={pair.d}")
    tr = np.trace(rho).real
    if abs(tr - 1) > tols.entry:
        raise ValidationError("trace", f"trace {tr:.12g} differs from 1")
    ok, worst = is_kd_classical(rho, pair, tols.entry)
    if not ok:
        raise Rejection(Rejection.NOT_KD_CLASSICAL, f"worst KD entry {worst[1]:.3e} at {worst[0]}")
    return rho


def sweep_decompose(rho, path, pair: DftPair, tols: Tolerances = DEFAULT_TOLERANCES,
                    check_steps: bool = False) -> DecompositionCertificate:
    """Certify ``rho`` in the convex hull of the path's pure states by min-subtraction."""
    d = pair.d
    gp = _resolve_path(path, pair)
    rho = _check_input(rho, pair, tols)

    states = path_state_union(gp, pair)
    table, in_span = span_project(rho, states, tols.span)
    if not in_span:
        raise Rejection(Rejection.NOT_IN_SPAN, f"residual {table.residual:.3e}")

    lam = table.by_vertex(d)
    graph = build_graph(d, gp.x0)
    sweep_log = []
    # coefficients are d times KD entries, so the entry tolerance scales by d
    coef_tol = d * tols.entry
    for t, edge in enumerate(gp.edges(graph), start=1):
        src, dst, p = edge.source, edge.target, edge.prime
        if edge.removes_prime:
            for m, sc, fine_s, coarse_m in marginal_families(src, p, d):
                vals = lam[src][m, fine_s]
                k = int(np.argmin(vals))
                mn = vals[k]
                lam[src][m, fine_s] -= mn
                lam[dst][coarse_m, sc] += mn
                sweep_log.append((src, dst, (m, sc), k, float(mn)))
        else:
            for m, sc, fine_s, coarse_m in marginal_families(dst, p, d):
                vals = lam[src][coarse_m, sc]
                k = int(np.argmin(vals))
                mn = vals[k]
                lam[src][coarse_m, sc] -= mn
                lam[dst][m, fine_s] += mn
                sweep_log.append((src, dst, (m, sc), k, float(mn)))
        if check_steps:
            for x in gp.vertices[:t]:
                if lam[x].min() < -tols.entry:
                    raise SweepInconsistency(f"vertex {x} negative after edge {t}")

    final = gp.vertices[-1]
    worst = float(lam[final].min())
    if worst < -10 * coef_tol:
        raise SweepInconsistency(
            f"final-vertex coefficient {worst:.3e} below -10*tol for a KD-classical input"
        )

    weights = []
    for x in gp.vertices:
        block = lam[x]
        for m in range(block.shape[0]):
            for s in range(block.shape[1]):
                w = block[m, s]
                if w < -coef_tol and x != final:
                    raise SweepInconsistency(f"coefficient {w:.3e} at {(x, m, s)}")
                if w > 0:
                    weights.append((PureStateLabel(x, m, s), float(w)))
    total = sum(w for _, w in weights)
    if abs(total - 1) <= max(tols.entry, 10 * coef_tol):
        weights = [(lab, w / total) for lab, w in weights]
        total = sum(w for _, w in weights)

    cert = DecompositionCertificate("sweep", gp.vertices, weights, total, 0.0, sweep_log)
    cert.residual = float(np.linalg.norm(rho - cert.reconstruct(pair)))
    if cert.residual > tols.residual:
        raise SweepInconsistency(f"reconstruction residual {cert.residual:.3e}")
    return cert


@dataclass
class LPVerdict:
    status: str
    certificate: DecompositionCertificate | None
    objective: float
    residual: float

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def lp_membership(rho, states, tols: Tolerances = DEFAULT_TOLERANCES,
                  max_iter: int = 50_000) -> LPVerdict:
    """Phase-1 LP: is ``rho`` a convex combination of ``states``?"""
    if not states:
        raise ValueError("empty state list")
    rho = np.asarray(rho, dtype=complex)
    A = vectorize_many([P for _, P in states])
    anti = float(np.linalg.norm(rho - rho.conj().T)) / 2
    A = np.vstack([A, np.ones(A.shape[1])])
    b = np.concatenate([_vec(rho), [1.0]])
    res = phase_one(A, b, tol=tols.lp, max_iter=max_iter)
    status = res.status
    if status == FEASIBLE and anti > tols.lp:
        status = INFEASIBLE
    cert = None
    if status == FEASIBLE:
        weights = [(lab, float(w)) for (lab, _), w in zip(states, res.w) if w > 0]
        d = rho.shape[0]
        recon = np.zeros((d, d), dtype=complex)
        for (lab, P), w in zip(states, res.w):
            recon += w * P
        cert = DecompositionCertificate(
            "lp", None, weights, float(res.w.sum()), float(np.linalg.norm(rho - recon))
        )
    return LPVerdict(status, cert, res.objective, res.residual + anti)


def theorem1_decompose(rho, pair: DftPair, tols: Tolerances = DEFAULT_TOLERANCES):
    """For ``d = p**r`` every KD-classical state is a mixture of the pure ones."""
    profile = factorize(pair.d)
    if not profile.is_prime_power():
        raise Rejection(Rejection.NOT_PRIME_POWER, f"d={pair.d}")
    graph = build_graph(pair.d, 1)
    return sweep_decompose(rho, canonical_path(graph), pair, tols)


def sweep_verdict(rho, path, pair: DftPair, tols: Tolerances = DEFAULT_TOLERANCES) -> str:
    """``feasible`` / ``infeasible`` from the sweep, for comparison with the LP."""
    try:
        sweep_decompose(rho, path, pair, tols)
    except Rejection:
        return INFEASIBLE
    return FEASIBLE


# -- sampling helpers -----------------------------------------------------------


def random_convex_combination(states, rng: np.random.Generator, sparsity: float | None = None):
    """A Dirichlet mixture of ``states``; returns ``(rho, weights)``."""
    n = len(states)
    w = rng.dirichlet(np.ones(n))
    if sparsity is not None:
        w = w * (rng.random(n) < sparsity)
        if w.sum() == 0:
            w[rng.integers(n)] = 1.0
        w = w / w.sum()
    rho = sum(wk * P for wk, (_, P) in zip(w, states))
    return rho, w


def kd_violating_sample(states, pair: DftPair, rng: np.random.Generator, depth: float):
    """A span member of trace 1 whose smallest KD entry is exactly ``-depth``."""
    sigma, _ = random_convex_combination(states, rng)
    q0 = kd_grid(sigma, pair).real
    while True:
        c = rng.standard_normal(len(states))
        c -= c.mean()
        H = sum(ck * P for ck, (_, P) in zip(c, states))
        qh = kd_grid(H, pair).real
        neg = qh < -1e-12
        if neg.any():
            break
    t = np.min((q0[neg] + depth) / -qh[neg])
    return sigma + t * H


def off_span_sample(states, pair: DftPair, rng: np.random.Generator, size: float):
    """A trace-1 Hermitian operator whose distance to the span equals ``size``."""
    sigma, _ = random_convex_combination(states, rng)
    d = pair.d
    A = vectorize_many([P for _, P in states])
    Qb, sv, _ = np.linalg.svd(A, full_matrices=False)
    Qb = Qb[:, sv > 1e-10 * sv[0]]
    while True:
        v = rng.standard_normal(d * d)
        v -= Qb @ (Qb.T @ v)
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            break
    return sigma + real_vector_to_hermitian(v * (size / nv))


# -- exploratory search at d = 6 ------------------------------------------------------


def gap_search(budget: int, seed: int, d: int = 6, tols: Tolerances = DEFAULT_TOLERANCES):
    """Look for KD-classical states outside ``conv(pure)``.

    Vertices of the polytope ``{F in KD-real : Q(F) >= 0, tr F = 1}`` are found
    with random objectives; each is pulled toward ``I/d`` until it is positive
    semidefinite with margin, then tested against the full pure set.
    """
    from scipy.optimize import linprog

    if d != 6:
        raise ValueError("gap search is defined for d = 6")
    if budget <= 0:
        return []
    pair = DftPair(d)
    rng = np.random.default_rng(seed)
    states = enumerate_all(pair)
    A = vectorize_many([P for _, P in states])
    U_, sv, _ = np.linalg.svd(A, full_matrices=False)
    basis = U_[:, sv > 1e-10 * sv[0]]

    ops = [real_vector_to_hermitian(basis[:, k]) for k in range(basis.shape[1])]
    G = np.column_stack([kd_grid(B, pair).real.ravel() for B in ops])
    traces = np.array([np.trace(B).real for B in ops])
    margin = 100 * tols.entry
    center = np.eye(d) / d

    candidates = []
    for _ in range(budget):
        c = rng.standard_normal(basis.shape[1])
        sol = linprog(c, A_ub=-G, b_ub=np.zeros(G.shape[0]), A_eq=traces[None, :], b_eq=[1.0],
                      bounds=[(None, None)] * len(c), method="highs")
        if sol.status != 0:
            continue
        vtx = sum(ck * B for ck, B in zip(sol.x, ops))
        rho = _pull_to_psd(vtx, center, margin)
        if rho is None:
            continue
        if kd_grid(rho, pair).real.min() < margin:
            continue
        if screen_gap_candidate(rho, states, pair, tols):
            candidates.append(rho)
            log.info("gap candidate found, min eig %.3e", np.linalg.eigvalsh(rho).min())
    return candidates


def screen_gap_candidate(rho, states, pair: DftPair, tols: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Emit only if KD-classical at entry tol 1e-11 and LP-infeasible at lp tol 1e-7."""
    tight = Tolerances(entry=1e-11, span=tols.span, residual=tols.residual, lp=1e-7)
    ok, _ = is_kd_classical(rho, pair, tight.entry)
    return ok and lp_membership(rho, states, tight).status == INFEASIBLE


def _pull_to_psd(vtx, center, margin, steps: int = 60):
    """Largest ``t`` in ``[0, 1]`` with ``(1-t) center + t vtx`` having min eigenvalue >= margin."""
    def ok(t):
        return np.linalg.eigvalsh((1 - t) * center + t * vtx).min() >= margin

    if ok(1.0):
        return vtx
    lo, hi = 0.0, 1.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        return None
    return (1 - lo) * center + lo * vtx
