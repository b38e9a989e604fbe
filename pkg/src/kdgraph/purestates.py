"""KD-classical pure states ``psi_{ms}`` for every factorization ``d = x*y``."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hilbert import DftPair, kd_grid, omega_powers
from .numtheory import factorize, fiber_over_m, fiber_over_s


@dataclass(frozen=True, order=True)
class PureStateLabel:
    x: int
    m: int
    s: int

    def validate(self, d: int) -> None:
        if self.x <= 0 or d % self.x:
            raise ValueError(f"x={self.x} does not divide d={d}")
        y = d // self.x
        if not 0 <= self.m < y:
            raise ValueError(f"m={self.m} outside [0, {y})")
        if not 0 <= self.s < self.x:
            raise ValueError(f"s={self.s} outside [0, {self.x})")

    def to_json(self) -> dict:
        return {"x": self.x, "m": self.m, "s": self.s}

    @classmethod
    def from_json(cls, obj: dict) -> "PureStateLabel":
        return cls(int(obj["x"]), int(obj["m"]), int(obj["s"]))


def build_pure_state(label: PureStateLabel, pair: DftPair) -> np.ndarray:
    """``(1/sqrt x) sum_k omega_x^{sk} |a_{ky+m}>``."""
    d = pair.d
    label.validate(d)
    x = label.x
    y = d // x
    k = np.arange(x)
    v = np.zeros(d, dtype=complex)
    v[k * y + label.m] = omega_powers(x, label.s * k) / np.sqrt(x)
    return v


def build_pure_state_b(label: PureStateLabel, pair: DftPair) -> np.ndarray:
    """The same state written over the Fourier basis; kept only as a cross-check."""
    d = pair.d
    label.validate(d)
    x, m, s = label.x, label.m, label.s
    y = d // x
    l = np.arange(y)
    coeffs = omega_powers(y, -m * l) * omega_powers(d, -m * s) / np.sqrt(y)
    return pair.U[:, l * x + s] @ coeffs


@lru_cache(maxsize=256)
def _vertex_block(d: int, x: int) -> np.ndarray:
    """Projectors of vertex ``v_x`` as an array indexed ``[m, s, :, :]``."""
    pair = DftPair(d)
    y = d // x
    out = np.empty((y, x, d, d), dtype=complex)
    for m in range(y):
        for s in range(x):
            v = build_pure_state(PureStateLabel(x, m, s), pair)
            out[m, s] = np.outer(v, v.conj())
    out.setflags(write=False)
    return out


def projector(label: PureStateLabel, pair: DftPair) -> np.ndarray:
    label.validate(pair.d)
    return _vertex_block(pair.d, label.x)[label.m, label.s]


def vertex_states(x: int, pair: DftPair) -> list[tuple[PureStateLabel, np.ndarray]]:
    d = pair.d
    if x <= 0 or d % x:
        raise ValueError(f"x={x} does not divide d={d}")
    block = _vertex_block(d, x)
    return [
        (PureStateLabel(x, m, s), block[m, s]) for m in range(d // x) for s in range(x)
    ]


def enumerate_all(pair: DftPair, dedup: bool = False, tol: float = 1e-10):
    """All ``d * tau(d)`` labelled projectors.

    With ``dedup`` the result is a list of ``(labels, projector)`` where
    ``labels`` groups every label whose projector coincides (Frobenius ``tol``).
    """
    entries = []
    for x in factorize(pair.d).divisors:
        entries.extend(vertex_states(x, pair))
    if not dedup:
        return entries
    groups: list[tuple[list[PureStateLabel], np.ndarray]] = []
    for label, P in entries:
        for labels, Q in groups:
            if np.linalg.norm(P - Q) <= tol:
                labels.append(label)
                break
        else:
            groups.append(([label], P))
    return [(tuple(labels), P) for labels, P in groups]


@dataclass(frozen=True)
class LemmaAReport:
    label: PureStateLabel
    max_deviation: float
    support_size: int
    support_matches: bool

    @property
    def ok(self) -> bool:
        return self.support_matches and self.max_deviation <= 1e-9


def check_lemma_A(label: PureStateLabel, pair: DftPair, tol: float = 1e-9) -> LemmaAReport:
    """KD grid of ``psi_{ms}`` is ``1/d`` on ``{i = m mod y, j = s mod x}`` and 0 elsewhere."""
    d = pair.d
    label.validate(d)
    y = d // label.x
    Q = kd_grid(projector(label, pair), pair)
    i = np.arange(d)[:, None]
    j = np.arange(d)[None, :]
    expected_support = (i % y == label.m) & (j % label.x == label.s)
    expected = np.where(expected_support, 1.0 / d, 0.0)
    dev = float(np.abs(Q - expected).max())
    near_inv_d = np.abs(Q - 1.0 / d) <= tol
    return LemmaAReport(
        label,
        dev,
        int(near_inv_d.sum()),
        bool(np.array_equal(near_inv_d, expected_support)),
    )


@dataclass(frozen=True)
class MarginalReport:
    x: int
    p: int
    instances: int
    max_deviation: float
    worst_family: tuple[int, int] | None

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_deviation <= tol


def marginal_families(x: int, p: int, d: int):
    """Yield ``(m, s_coarse, source_s, target_m)`` for the edge ``v_x -- v_{x/p}``.

    ``source_s`` are the ``s`` in ``Z_x`` over which ``psi^{(x)}_{m,s}`` is summed;
    ``target_m`` are the ``m`` in ``Z_{y p}`` over which ``psi^{(x/p)}_{m, s_coarse}`` is summed.
    """
    profile = factorize(d)
    if x <= 0 or d % x:
        raise ValueError(f"x={x} does not divide d={d}")
    if p not in profile.prime_list or x % p:
        raise ValueError(f"prime {p} does not divide x={x}")
    y = d // x
    xt = x // p
    for m in range(y):
        target = fiber_over_m(m, y, p, profile)
        for sc in range(xt):
            yield m, sc, fiber_over_s(sc, x, p, profile), target


def check_marginal_identity(x: int, p: int, pair: DftPair) -> MarginalReport:
    """Check ``sum_s psi^{(x)}_{m,s} = sum_m' psi^{(x/p)}_{m',s~}`` on every family."""
    d = pair.d
    big = _vertex_block(d, x)
    small = _vertex_block(d, x // p)
    worst, worst_family, n = 0.0, None, 0
    for m, sc, source_s, target_m in marginal_families(x, p, d):
        lhs = big[m, source_s].sum(axis=0)
        rhs = small[target_m, sc].sum(axis=0)
        dev = float(np.linalg.norm(lhs - rhs))
        n += 1
        if dev >= worst:
            worst, worst_family = dev, (m, sc)
    return MarginalReport(x, p, n, worst, worst_family)


def check_all_marginals(pair: DftPair) -> list[MarginalReport]:
    profile = factorize(pair.d)
    return [
        check_marginal_identity(x, p, pair)
        for x in profile.divisors
        for p in profile.prime_list
        if x % p == 0
    ]
