"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (lines appear even with output captured) or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import random
import sys
import time

import numpy as np
import pytest

from kdgraph.decompose import (
    Rejection,
    gap_search,
    kd_violating_sample,
    lp_membership,
    off_span_sample,
    random_convex_combination,
    sweep_decompose,
    sweep_verdict,
    theorem1_decompose,
)
from kdgraph.graph import build_graph, enumerate_paths, expected_path_count, path_state_union
from kdgraph.hilbert import DftPair, kd_grid, kd_real_space_dimension, rank_of_span
from kdgraph.numtheory import factorize, from_digits, residue_coverage_check, to_digits
from kdgraph.purestates import (
    build_pure_state,
    build_pure_state_b,
    check_all_marginals,
    enumerate_all,
)


def _admissible(d):
    return [x for x in factorize(d).divisors if math.gcd(x, d // x) == 1]


def _within(start, limit):
    elapsed = time.perf_counter() - start
    return elapsed <= limit, f"{elapsed:.2f}s/{limit}s"


def ac1_value_law():
    start = time.perf_counter()
    worst, bad = 0.0, []
    for d in range(2, 31):
        pair = DftPair(d)
        for label, P in enumerate_all(pair):
            Q = kd_grid(P, pair)
            dist = np.minimum(np.abs(Q), np.abs(Q - 1 / d))
            worst = max(worst, float(dist.max()))
            support = int((np.abs(Q - 1 / d) <= 1e-9).sum())
            if dist.max() > 1e-9 or support != d:
                bad.append((d, label))
    fast, t = _within(start, 30)
    return not bad and fast, f"worst {worst:.1e}, violations {len(bad)}, {t}"


def ac2_dual_form():
    start = time.perf_counter()
    worst = 0.0
    for d in range(1, 31):
        pair = DftPair(d)
        for label, _ in enumerate_all(pair):
            diff = build_pure_state(label, pair) - build_pure_state_b(label, pair)
            worst = max(worst, float(np.abs(diff).max()))
    fast, t = _within(start, 10)
    return worst <= 1e-10 and fast, f"worst {worst:.1e}, {t}"


def ac3_marginals():
    start = time.perf_counter()
    worst, instances, failing = 0.0, 0, []
    for d in (4, 6, 8, 9, 12, 16, 18, 27):
        for rep in check_all_marginals(DftPair(d)):
            instances += 1
            worst = max(worst, rep.max_deviation)
            if not rep.passed(1e-10):
                failing.append((d, rep.x, rep.p))
    fast, t = _within(start, 60)
    return not failing and fast, f"{instances} (x,p) instances, worst {worst:.1e}, {t}"


def ac4_rank_equality():
    start = time.perf_counter()
    rows, ok = [], True
    for d in range(2, 13):
        pair = DftPair(d)
        dim = kd_real_space_dimension(pair)
        rank = rank_of_span([P for _, P in enumerate_all(pair)])
        ok &= dim == rank
        if factorize(d).primes == ((d, 1),):
            ok &= dim == 2 * d - 1
        rows.append(f"{d}:{dim}")
    fast, t = _within(start, 30)
    return ok and fast, f"dims {' '.join(rows)}, {t}"


def ac5_theorem1():
    start = time.perf_counter()
    ok, n, worst = True, 0, 0.0
    for d in (4, 8, 9):
        pair = DftPair(d)
        states = enumerate_all(pair)
        rng = np.random.default_rng(1000 + d)
        for _ in range(200):
            rho, _ = random_convex_combination(states, rng)
            cert = theorem1_decompose(rho, pair)
            w = np.array([v for _, v in cert.weights])
            ok &= bool(w.min() >= 0) and abs(w.sum() - 1) <= 1e-8 and cert.residual <= 1e-8
            ok &= lp_membership(rho, states).status == "feasible"
            worst = max(worst, cert.residual)
            n += 1
    fast, t = _within(start, 120)
    return ok and fast, f"{n} certificates, worst residual {worst:.1e}, {t}"


def ac6_theorem2():
    start = time.perf_counter()
    ok, paths, certified, rejected = True, 0, 0, 0
    for d in (6, 12):
        pair = DftPair(d)
        rng = np.random.default_rng(2000 + d)
        for x0 in _admissible(d):
            for path in enumerate_paths(build_graph(d, x0)):
                paths += 1
                states = path_state_union(path, pair)
                for _ in range(100):
                    rho, _ = random_convex_combination(states, rng)
                    try:
                        cert = sweep_decompose(rho, path, pair)
                    except Rejection:
                        ok = False
                        continue
                    good = cert.residual <= 1e-8 and abs(cert.weight_sum - 1) <= 1e-8
                    ok &= good
                    certified += good
                for _ in range(50):
                    depth = 10 ** rng.uniform(np.log10(2e-6), -3)
                    rho = kd_violating_sample(states, pair, rng, depth)
                    if kd_grid(rho, pair).real.min() >= -1e-6:
                        ok = False
                    both = (sweep_verdict(rho, path, pair) == "infeasible"
                            and lp_membership(rho, states).status == "infeasible")
                    ok &= both
                    rejected += both
    fast, t = _within(start, 180)
    return ok and fast, f"{paths} paths, {certified} certified, {rejected} adversarial rejected, {t}"


EXAMPLE_108_EDGES = {
    (4, 12), (12, 36), (2, 6), (6, 18), (1, 3), (3, 9), (108, 54), (54, 27),
    (4, 2), (2, 1), (36, 108), (12, 6), (6, 3), (18, 54), (36, 18), (18, 9), (9, 27),
}


def ac7_graph():
    start = time.perf_counter()
    g = build_graph(108, 4)
    ok = len(g.vertices) == 12 and {(e.source, e.target) for e in g.edges} == EXAMPLE_108_EDGES
    g12 = build_graph(12, 4)
    n12 = len(enumerate_paths(g12))
    ok &= n12 == 3 == expected_path_count(g12.profile)
    for d in (2, 8, 27, 125, 1024):
        ok &= len(enumerate_paths(build_graph(d, 1))) == 1
    fast, t = _within(start, 1)
    return ok and fast, f"108 graph exact, d=12 paths {n12}, {t}"


def ac8_number_theory():
    start = time.perf_counter()
    rng = random.Random(8)
    ok = True
    for d in rng.sample(range(1, 10_001), 50):
        prof = factorize(d)
        ok &= all(from_digits(to_digits(i, prof), prof) == i for i in range(d))
    for d in range(1, 61):
        prof = factorize(d)
        ok &= all(residue_coverage_check(x, prof).ok for x in prof.divisors)
    fast, t = _within(start, 10)
    return ok and fast, f"round trip on 50 dims, coverage d<=60, {t}"


def ac9_oracle_agreement():
    start = time.perf_counter()
    d = 4
    pair = DftPair(d)
    rng = np.random.default_rng(9)
    paths = [p for x0 in _admissible(d) for p in enumerate_paths(build_graph(d, x0))]
    disagree, indeterminate, kinds = 0, 0, {"conv": 0, "kd": 0, "span": 0}
    for n in range(500):
        path = paths[n % len(paths)]
        states = path_state_union(path, pair)
        kind = ("conv", "kd", "span")[n % 3]
        if kind == "conv":
            rho, _ = random_convex_combination(states, rng, sparsity=rng.choice([None, 0.3]))
        elif kind == "kd":
            rho = kd_violating_sample(states, pair, rng, 10 ** rng.uniform(-6, -2))
        else:
            rho = off_span_sample(states, pair, rng, 10 ** rng.uniform(-5, -2))
        kinds[kind] += 1
        lp = lp_membership(rho, states).status
        if lp == "indeterminate":
            indeterminate += 1
            continue
        disagree += sweep_verdict(rho, path, pair) != lp
    fast, t = _within(start, 120)
    return disagree == 0 and fast, (
        f"{kinds}, disagreements {disagree}, indeterminate {indeterminate}, {t}"
    )


def ac10_gap_search():
    found = gap_search(200, seed=1)
    return True, f"informational: {len(found)} d=6 candidate(s) outside conv(pure) at seed 1"


CRITERIA = [
    ("AC1 value law", ac1_value_law),
    ("AC2 dual-form identity", ac2_dual_form),
    ("AC3 marginal identities", ac3_marginals),
    ("AC4 rank equality", ac4_rank_equality),
    ("AC5 prime-power round trip", ac5_theorem1),
    ("AC6 all paths", ac6_theorem2),
    ("AC7 graph structure", ac7_graph),
    ("AC8 number theory", ac8_number_theory),
    ("AC9 oracle cross-agreement", ac9_oracle_agreement),
    ("AC10 gap search (exploratory)", ac10_gap_search),
]


def _line(name, passed, detail):
    return f"{name}: {'PASS' if passed else 'FAIL'} ({detail})"


@pytest.mark.parametrize("name, check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, check, capsys):
    passed, detail = check()
    with capsys.disabled():
        print("\n" + _line(name, passed, detail))
    assert passed, detail


if __name__ == "__main__":
    results = []
    for name, check in CRITERIA:
        passed, detail = check()
        results.append(passed)
        print(_line(name, passed, detail), flush=True)
    sys.exit(0 if all(results) else 1)
