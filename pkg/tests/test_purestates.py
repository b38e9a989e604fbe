from __future__ import annotations

import cmath
import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kdgraph.hilbert import DftPair, kd_grid
from kdgraph.numtheory import factorize
from kdgraph.purestates import (
    PureStateLabel,
    build_pure_state,
    build_pure_state_b,
    check_lemma_A,
    check_marginal_identity,
    enumerate_all,
    marginal_families,
    projector,
    vertex_states,
)


def psi_by_loop(d, x, m, s):
    y = d // x
    v = np.zeros(d, dtype=complex)
    for k in range(x):
        v[k * y + m] = cmath.exp(2j * cmath.pi * s * k / x) / np.sqrt(x)
    return v


def proj(v):
    return np.outer(v, v.conj())


class TestBuild:
    def test_b1_at_d2(self):
        v = build_pure_state(PureStateLabel(2, 0, 1), DftPair(2))
        assert_allclose(v, np.array([1, -1]) / np.sqrt(2), atol=1e-15)
        assert_allclose(v, DftPair(2).b(1), atol=1e-15)

    def test_a3_at_d4(self):
        assert_allclose(build_pure_state(PureStateLabel(1, 3, 0), DftPair(4)), [0, 0, 0, 1])

    def test_d4_x2(self):
        v = build_pure_state(PureStateLabel(2, 1, 1), DftPair(4))
        assert_allclose(v, np.array([0, 1, 0, -1]) / np.sqrt(2), atol=1e-15)

    @pytest.mark.parametrize("label", [PureStateLabel(3, 0, 0), PureStateLabel(2, 2, 0),
                                       PureStateLabel(2, 0, 2), PureStateLabel(4, 1, 0)])
    def test_invalid_ranges(self, label):
        with pytest.raises(ValueError):
            build_pure_state(label, DftPair(4))

    def test_matches_loop(self):
        for d in (6, 12):
            pair = DftPair(d)
            for x in factorize(d).divisors:
                for m in range(d // x):
                    for s in range(x):
                        got = build_pure_state(PureStateLabel(x, m, s), pair)
                        assert_allclose(got, psi_by_loop(d, x, m, s), atol=1e-13)

    def test_dual_form(self):
        for d in range(1, 17):
            pair = DftPair(d)
            for lab, _ in enumerate_all(pair):
                a = build_pure_state(lab, pair)
                b = build_pure_state_b(lab, pair)
                assert np.abs(a - b).max() <= 1e-10

    def test_basis_recovery(self):
        d = 6
        pair = DftPair(d)
        for i in range(d):
            assert np.array_equal(projector(PureStateLabel(1, i, 0), pair), proj(np.eye(d)[i]))
            assert np.linalg.norm(projector(PureStateLabel(d, 0, i), pair) - proj(pair.b(i))) <= 1e-12

    def test_label_json(self):
        lab = PureStateLabel(4, 2, 3)
        assert PureStateLabel.from_json(lab.to_json()) == lab


class TestVertexStates:
    @pytest.mark.parametrize("d", [4, 6, 12])
    def test_projector_invariants(self, d):
        pair = DftPair(d)
        for x in factorize(d).divisors:
            states = vertex_states(x, pair)
            assert len(states) == d
            total = 0
            for _, P in states:
                assert np.linalg.norm(P - P.conj().T) <= 1e-12
                assert abs(np.trace(P) - 1) <= 1e-12
                assert np.linalg.matrix_rank(P, tol=1e-10) == 1
                total = total + P
            assert_allclose(np.trace(total).real, d, atol=1e-12)

    def test_row_sums_are_a_projectors(self):
        d, x = 12, 4
        pair = DftPair(d)
        y = d // x
        for m in range(y):
            lhs = sum(projector(PureStateLabel(x, m, s), pair) for s in range(x))
            rhs = sum(proj(np.eye(d)[k * y + m]) for k in range(x))
            assert_allclose(lhs, rhs, atol=1e-13)

    def test_read_only(self):
        _, P = vertex_states(2, DftPair(4))[0]
        with pytest.raises(ValueError):
            P[0, 0] = 3


class TestEnumerate:
    @pytest.mark.parametrize("d, labels, distinct", [(2, 4, 4), (3, 6, 6), (4, 12, None)])
    def test_counts(self, d, labels, distinct):
        pair = DftPair(d)
        entries = enumerate_all(pair)
        assert len(entries) == labels == d * factorize(d).tau()
        if distinct is not None:
            assert len(enumerate_all(pair, dedup=True)) == distinct

    @pytest.mark.parametrize("d", [4, 6, 8])
    def test_dedup_matches_pairwise_distances(self, d):
        entries = enumerate_all(DftPair(d))
        close = [
            (a, b)
            for (a, (_, P)), (b, (_, Q)) in itertools.combinations(enumerate(entries), 2)
            if np.linalg.norm(P - Q) <= 1e-10
        ]
        # union-find count of alias classes
        parent = list(range(len(entries)))

        def find(i):
            while parent[i] != i:
                i = parent[i]
            return i

        for a, b in close:
            parent[find(a)] = find(b)
        n_classes = len({find(i) for i in range(len(entries))})
        groups = enumerate_all(DftPair(d), dedup=True)
        assert len(groups) == n_classes
        assert sum(len(labels) for labels, _ in groups) == len(entries)


class TestValueLaw:
    def test_d6_example(self):
        pair = DftPair(6)
        lab = PureStateLabel(2, 1, 0)
        rep = check_lemma_A(lab, pair)
        assert rep.ok and rep.support_size == 6
        Q = kd_grid(projector(lab, pair), pair)
        support = {(i, j) for i in range(6) for j in range(6) if abs(Q[i, j] - 1 / 6) < 1e-9}
        assert support == {(i, j) for i in (1, 4) for j in (0, 2, 4)}

    def test_b0_at_d2(self):
        pair = DftPair(2)
        Q = kd_grid(projector(PureStateLabel(2, 0, 0), pair), pair)
        assert_allclose(Q, [[0.5, 0], [0.5, 0]], atol=1e-15)

    def test_d12(self):
        rep = check_lemma_A(PureStateLabel(4, 2, 3), DftPair(12))
        assert rep.ok and rep.support_size == 12

    def test_invalid_label(self):
        with pytest.raises(ValueError):
            check_lemma_A(PureStateLabel(5, 0, 0), DftPair(4))


class TestMarginals:
    @staticmethod
    def congruence_oracle(d, x, p, m, sc):
        """Both sides built from loop-constructed vectors and plain congruences."""
        y, xt = d // x, x // p
        lhs = sum(proj(psi_by_loop(d, x, m, s)) for s in range(x) if s % xt == sc)
        rhs = sum(proj(psi_by_loop(d, xt, mm, sc)) for mm in range(y * p) if mm % y == m)
        return lhs, rhs

    @pytest.mark.parametrize("d, x, p", [(4, 4, 2), (4, 2, 2), (6, 2, 2), (6, 6, 3), (12, 12, 2)])
    def test_explicit_sums(self, d, x, p):
        for m in range(d // x):
            for sc in range(x // p):
                lhs, rhs = self.congruence_oracle(d, x, p, m, sc)
                assert np.linalg.norm(lhs - rhs) <= 1e-12

    @pytest.mark.parametrize("d, x, p", [(4, 4, 2), (6, 2, 2), (12, 6, 3), (18, 9, 3)])
    def test_families_are_congruence_classes(self, d, x, p):
        y, xt = d // x, x // p
        fams = list(marginal_families(x, p, d))
        assert len(fams) == y * xt
        for m, sc, ss, mm in fams:
            assert sorted(ss) == [s for s in range(x) if s % xt == sc]
            assert sorted(mm) == [k for k in range(y * p) if k % y == m]

    @pytest.mark.parametrize("d, p", [(8, 2), (9, 3)])
    def test_corollary_endpoint(self, d, p):
        # sum over the top a-digit equals the sum over the lowest b-digit
        pair = DftPair(d)
        y = d // p
        for m in range(y):
            a_side = sum(proj(np.eye(d)[m + t * y]) for t in range(p))
            psi_side = sum(projector(PureStateLabel(p, m, s), pair) for s in range(p))
            assert np.linalg.norm(a_side - psi_side) <= 1e-12
        assert check_marginal_identity(p, p, pair).passed()

    def test_rejects_non_dividing_prime(self):
        with pytest.raises(ValueError):
            check_marginal_identity(3, 2, DftPair(6))

    def test_library_checker(self):
        rep = check_marginal_identity(12, 3, DftPair(36))
        assert rep.passed(1e-10) and rep.instances == 3 * 4
