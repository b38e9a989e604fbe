"""Command-line entry point.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or parse error,
3 state is not KD-classical, 4 state is outside the span of the path.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .decompose import (
    Rejection,
    SweepInconsistency,
    Tolerances,
    gap_search,
    kd_violating_sample,
    lp_membership,
    random_convex_combination,
    sweep_decompose,
    sweep_verdict,
    theorem1_decompose,
    verify_certificate,
)
from .graph import (
    GraphPath,
    build_graph,
    canonical_path,
    enumerate_paths,
    expected_path_count,
    path_state_union,
)
from .hilbert import (
    DftPair,
    DensityOperator,
    ValidationError,
    kd_distribution,
    kd_real_space_dimension,
    matrix_from_json,
    matrix_to_json,
    rank_of_span,
)
from .numtheory import factorize
from .purestates import check_all_marginals, check_lemma_A, enumerate_all

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOT_KD, EXIT_NOT_SPAN = 0, 1, 2, 3, 4
SUITES = ("lemmaA", "marginals", "lemma4", "theorem1", "theorem2")


class UsageError(Exception):
    pass


def _tolerances() -> Tolerances:
    raw = os.environ.get("KD_TOL")
    if raw is None:
        return Tolerances()
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"KD_TOL must be a float, got {raw!r}") from None
    return Tolerances(entry=tol)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=False))


def _load_state(path: str, d: int | None) -> np.ndarray:
    try:
        with open(path) as fh:
            F = matrix_from_json(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read state file {path}: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"malformed state file {path}: {exc}") from None
    if d is not None and F.shape[0] != d:
        raise UsageError(f"state has dimension {F.shape[0]}, --d is {d}")
    return F


def _admissible_x0(d: int) -> list[int]:
    return [x for x in factorize(d).divisors if math.gcd(x, d // x) == 1]


# -- verification suites ------------------------------------------------------------


def _check(name, passed, worst=None, failures=None, **extra):
    out = {"name": name, "passed": bool(passed), "worst_deviation": worst,
           "failures": failures or []}
    out.update(extra)
    return out


def suite_lemmaA(pair: DftPair, tols: Tolerances):
    worst, failures = 0.0, []
    for label, _ in enumerate_all(pair):
        rep = check_lemma_A(label, pair, tols.entry)
        worst = max(worst, rep.max_deviation)
        if not (rep.support_matches and rep.max_deviation <= tols.entry and rep.support_size == pair.d):
            failures.append({"label": label.to_json(), "deviation": rep.max_deviation})
    return [_check("lemmaA value law", not failures, worst, failures)]


def suite_marginals(pair: DftPair, tols: Tolerances, tol: float = 1e-10):
    reports = check_all_marginals(pair)
    failures = [
        {"x": r.x, "p": r.p, "family": r.worst_family, "deviation": r.max_deviation}
        for r in reports if not r.passed(tol)
    ]
    worst = max((r.max_deviation for r in reports), default=0.0)
    return [_check("marginal identities", not failures, worst, failures,
                   instances=sum(r.instances for r in reports))]


def suite_lemma4(pair: DftPair, tols: Tolerances):
    dim = kd_real_space_dimension(pair)
    rank = rank_of_span([P for _, P in enumerate_all(pair)])
    fails = [] if dim == rank else [{"kd_real_dim": dim, "span_rank": rank}]
    return [_check("lemma4 rank equality", dim == rank, abs(dim - rank), fails,
                   kd_real_dim=dim, span_rank=rank)]


def _sample_checks(name, pair, path, states, rng, samples, tols, adversarial, decompose):
    worst, failures = 0.0, []
    for n in range(samples):
        rho, _ = random_convex_combination(states, rng)
        try:
            cert = decompose(rho)
        except (Rejection, SweepInconsistency) as exc:
            failures.append({"sample": n, "error": str(exc)})
            continue
        worst = max(worst, cert.residual, abs(cert.weight_sum - 1))
        if not verify_certificate(cert, rho, pair, tols):
            failures.append({"sample": n, "residual": cert.residual})
        if lp_membership(rho, states, tols).status != "feasible":
            failures.append({"sample": n, "error": "LP disagrees (infeasible)"})
    checks = [_check(f"{name} conv samples", not failures, worst, failures)]
    adv_fail = []
    for n in range(adversarial):
        rho = kd_violating_sample(states, pair, rng, depth=10.0 ** rng.uniform(-6, -3))
        sv = sweep_verdict(rho, path, pair, tols)
        lv = lp_membership(rho, states, tols).status
        if sv != "infeasible" or lv != "infeasible":
            adv_fail.append({"sample": n, "sweep": sv, "lp": lv})
    if adversarial:
        checks.append(_check(f"{name} adversarial rejected", not adv_fail, None, adv_fail))
    return checks


def suite_theorem1(pair, tols, samples, rng):
    profile = factorize(pair.d)
    if not profile.is_prime_power():
        raise UsageError(f"theorem1 suite needs a prime-power dimension, got d={pair.d}")
    path = canonical_path(build_graph(pair.d, 1))
    states = path_state_union(path, pair)
    return _sample_checks("theorem1", pair, path, states, rng, samples, tols, samples // 4,
                          lambda rho: theorem1_decompose(rho, pair, tols))


def suite_theorem2(pair, tols, samples, rng, x0=None):
    x0s = [x0] if x0 is not None else _admissible_x0(pair.d)
    checks = []
    for x in x0s:
        graph = build_graph(pair.d, x)
        paths = enumerate_paths(graph)
        expected = expected_path_count(graph.profile)
        checks.append(_check(f"G({x}) path count", len(paths) == expected, None,
                             [] if len(paths) == expected else [{"dfs": len(paths), "formula": expected}]))
        for path in paths:
            states = path_state_union(path, pair)
            tag = "theorem2 " + "->".join(map(str, path.vertices))
            checks += _sample_checks(tag, pair, path, states, rng, samples, tols, samples // 2,
                                     lambda rho, p=path: sweep_decompose(rho, p, pair, tols))
    return checks


def cmd_verify(args, tols: Tolerances):
    d = args.d
    factorize(d)
    pair = DftPair(d)
    if args.suite and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    if args.x0 is not None:
        build_graph(d, args.x0)
    suites = [args.suite] if args.suite else [
        s for s in SUITES if s != "theorem1" or factorize(d).is_prime_power()
    ]
    if args.samples < 0:
        raise UsageError("--samples must be nonnegative")
    if "theorem1" in suites and not factorize(d).is_prime_power():
        raise UsageError(f"theorem1 suite needs a prime-power dimension, got d={d}")
    if args.seed is None and {"theorem1", "theorem2"} & set(suites):
        raise UsageError("sampling suites need an explicit --seed")
    rng = np.random.default_rng(args.seed)
    checks = []
    for s in suites:
        if s == "lemmaA":
            checks += suite_lemmaA(pair, tols)
        elif s == "marginals":
            checks += suite_marginals(pair, tols)
        elif s == "lemma4":
            checks += suite_lemma4(pair, tols)
        elif s == "theorem1":
            checks += suite_theorem1(pair, tols, args.samples, rng)
        elif s == "theorem2":
            checks += suite_theorem2(pair, tols, args.samples, rng, args.x0)
    return checks


# -- other commands -------------------------------------------------------------------


def cmd_dist(args, tols: Tolerances):
    F = _load_state(args.state, args.d)
    DensityOperator(F, tols.entry)
    dist = kd_distribution(F, DftPair(F.shape[0]), tols.entry)
    idx, val = dist.worst_offender()
    _emit({
        "d": F.shape[0],
        "re": dist.Q.real.tolist(),
        "im": dist.Q.imag.tolist(),
        "is_real": dist.is_real,
        "is_classical": dist.is_classical,
        "normalization_residual": dist.normalization_residual,
        "worst_entry": {"index": list(idx), "re": val.real, "im": val.imag},
    })
    return EXIT_OK


def cmd_graph(args, tols: Tolerances):
    graph = build_graph(args.d, args.x0)
    if args.dot:
        print(graph.to_dot())
        return EXIT_OK
    out = {
        "d": graph.d,
        "x0": graph.x0,
        "y0": graph.y0,
        "vertices": list(graph.vertices),
        "edges": [{"from": e.source, "to": e.target, "prime": e.prime} for e in graph.edges],
    }
    if args.paths:
        out["paths"] = [p.to_json() for p in enumerate_paths(graph)]
        out["canonical_path"] = canonical_path(graph).to_json()
    _emit(out)
    return EXIT_OK


def _parse_path(raw: str | None, d: int, x0: int | None) -> GraphPath:
    if raw:
        try:
            verts = tuple(int(v) for v in raw.split(","))
        except ValueError:
            raise UsageError(f"--path must be comma-separated integers, got {raw!r}") from None
        if x0 is not None and verts[0] != x0:
            raise UsageError(f"path starts at {verts[0]} but --x0 is {x0}")
        return GraphPath(verts[0], verts)
    if x0 is None:
        raise UsageError("need --x0 or --path")
    return canonical_path(build_graph(d, x0))


def cmd_decompose(args, tols: Tolerances):
    F = _load_state(args.state, args.d)
    d = F.shape[0]
    pair = DftPair(d)
    path = _parse_path(args.path, d, args.x0)
    build_graph(d, path.x0)
    try:
        cert = sweep_decompose(F, path, pair, tols)
        status = EXIT_OK
        out = cert.to_json()
    except Rejection as exc:
        print(json.dumps({"error": exc.reason, "detail": str(exc)}), file=sys.stderr)
        status = EXIT_NOT_KD if exc.reason == Rejection.NOT_KD_CLASSICAL else EXIT_NOT_SPAN
        out = {"method": "sweep", "path": list(path.vertices), "rejected": exc.reason}
    if args.oracle:
        verdict = lp_membership(F, path_state_union(path, pair), tols)
        agrees = (verdict.status == "feasible") == (status == EXIT_OK)
        out["oracle"] = {"status": verdict.status, "residual": verdict.residual,
                         "agrees": agrees if verdict.status != "indeterminate" else None}
        if verdict.status != "indeterminate" and not agrees:
            _emit(out)
            return EXIT_FAIL
    _emit(out)
    return status


def cmd_sample(args, tols: Tolerances):
    pair = DftPair(args.d)
    path = _parse_path(args.path, args.d, args.x0)
    build_graph(args.d, path.x0)
    rho, _ = random_convex_combination(path_state_union(path, pair), np.random.default_rng(args.seed))
    _emit(matrix_to_json(rho))
    return EXIT_OK


def cmd_gap(args, tols: Tolerances):
    found = gap_search(args.budget, args.seed, tols=tols)
    _emit({"d": 6, "budget": args.budget, "seed": args.seed,
           "candidates": [matrix_to_json(r) for r in found]})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kdgraph", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="KD distribution of a state")
    p.add_argument("--state", required=True)
    p.add_argument("--d", type=int)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--suite")
    p.add_argument("--x0", type=int)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, help="required by the sampling suites theorem1/theorem2")

    p = sub.add_parser("graph", help="the divisor graph G(x0)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--x0", type=int, required=True)
    p.add_argument("--paths", action="store_true")
    p.add_argument("--dot", action="store_true")

    p = sub.add_parser("decompose", help="convex decomposition certificate")
    p.add_argument("--state", required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--x0", type=int)
    p.add_argument("--path")
    p.add_argument("--oracle", action="store_true")

    p = sub.add_parser("sample", help="random mixture of path states, as matrix JSON")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--x0", type=int)
    p.add_argument("--path")
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("gap", help="search d=6 for KD-classical states outside conv(pure)")
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    for stream in (sys.stdout, sys.stderr):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(line_buffering=True)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    try:
        tols = _tolerances()
        if args.command == "verify":
            start = time.perf_counter()
            checks = cmd_verify(args, tols)
            passed = all(c["passed"] for c in checks)
            _emit({
                "command": ["kdgraph", *argv],
                "tolerances": vars(tols),
                "checks": checks,
                "passed": passed,
                "wall_time": round(time.perf_counter() - start, 3),
            })
            return EXIT_OK if passed else EXIT_FAIL
        handler = {"dist": cmd_dist, "graph": cmd_graph, "decompose": cmd_decompose,
                   "sample": cmd_sample, "gap": cmd_gap}[args.command]
        return handler(args, tols)
    except (UsageError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
