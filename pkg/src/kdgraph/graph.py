"""The directed divisor graph ``G(x0)`` and its start-to-end paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .hilbert import DftPair
from .numtheory import DimensionProfile, factorize
from .purestates import PureStateLabel, vertex_states

DEFAULT_PATH_CAP = 10**5


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    prime: int

    @property
    def removes_prime(self) -> bool:
        """True when the edge divides ``x`` by ``prime`` (an ``x0``-prime)."""
        return self.target * self.prime == self.source


@dataclass(frozen=True)
class DivisorGraph:
    d: int
    x0: int
    profile: DimensionProfile = field(repr=False)
    edges: tuple[Edge, ...] = field(repr=False)

    @property
    def y0(self) -> int:
        return self.d // self.x0

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.profile.divisors

    def out_edges(self, x: int) -> list[Edge]:
        return [e for e in self.edges if e.source == x]

    def in_edges(self, x: int) -> list[Edge]:
        return [e for e in self.edges if e.target == x]

    def edge(self, source: int, target: int) -> Edge | None:
        for e in self.edges:
            if e.source == source and e.target == target:
                return e
        return None

    def to_dot(self) -> str:
        lines = [f'digraph "G(x0={self.x0})" {{']
        for v in self.vertices:
            lines.append(f'  v{v} [label="{v}"];')
        for e in self.edges:
            lines.append(f'  v{e.source} -> v{e.target} [label="{e.prime}"];')
        lines.append("}")
        return "\n".join(lines)


def build_graph(d: int, x0: int) -> DivisorGraph:
    profile = factorize(d)
    if x0 <= 0 or d % x0:
        raise ValueError(f"x0={x0} does not divide d={d}")
    y0 = d // x0
    if math.gcd(x0, y0) != 1:
        raise ValueError(
            f"x0={x0} and y0={y0} must be coprime (gcd = {math.gcd(x0, y0)})"
        )
    edges = []
    for x in profile.divisors:
        for p in profile.prime_list:
            if x % p:
                continue
            small = x // p
            if x0 % p == 0:
                edges.append(Edge(x, small, p))
            else:
                edges.append(Edge(small, x, p))
    edges.sort(key=lambda e: (e.source, e.target))
    return DivisorGraph(d, x0, profile, tuple(edges))


@dataclass(frozen=True)
class GraphPath:
    x0: int
    vertices: tuple[int, ...]

    def to_json(self) -> dict:
        return {"x0": self.x0, "vertices": list(self.vertices)}

    def edges(self, graph: DivisorGraph) -> list[Edge]:
        out = []
        for a, b in zip(self.vertices, self.vertices[1:]):
            e = graph.edge(a, b)
            if e is None:
                raise ValueError(f"no edge {a} -> {b} in G(x0={graph.x0})")
            out.append(e)
        return out


def validate_path(path: GraphPath, graph: DivisorGraph) -> None:
    if not path.vertices:
        raise ValueError("empty path")
    if path.vertices[0] != graph.x0 or path.vertices[-1] != graph.y0:
        raise ValueError(
            f"path must run from {graph.x0} to {graph.y0}, got {path.vertices[0]} .. {path.vertices[-1]}"
        )
    path.edges(graph)
    expected = graph.profile.total_exponent + 1
    if len(path.vertices) != expected:
        raise ValueError(f"path has {len(path.vertices)} vertices, expected {expected}")


def enumerate_paths(graph: DivisorGraph, cap: int = DEFAULT_PATH_CAP) -> list[GraphPath]:
    """All directed paths from ``v_x0`` to ``v_y0`` by DFS; raises past ``cap`` paths."""
    succ = {v: [e.target for e in graph.out_edges(v)] for v in graph.vertices}
    paths: list[GraphPath] = []
    stack = [(graph.x0,)]
    while stack:
        prefix = stack.pop()
        last = prefix[-1]
        if last == graph.y0:
            paths.append(GraphPath(graph.x0, prefix))
            if len(paths) > cap:
                raise RuntimeError(f"more than {cap} paths in G(x0={graph.x0}), d={graph.d}")
            continue
        for nxt in reversed(succ[last]):
            stack.append(prefix + (nxt,))
    return paths


def expected_path_count(profile: DimensionProfile) -> int:
    """Multinomial ``L! / prod r_u!``: interleavings of the unit exponent moves."""
    count = math.factorial(profile.total_exponent)
    for _, r in profile.primes:
        count //= math.factorial(r)
    return count


def canonical_path(graph: DivisorGraph) -> GraphPath:
    """Strip ``x0``'s primes one power at a time, then build up ``y0``'s, both in ascending prime order."""
    x = graph.x0
    verts = [x]
    for p, r in graph.profile.primes:
        if graph.x0 % p == 0:
            for _ in range(r):
                x //= p
                verts.append(x)
    for p, r in graph.profile.primes:
        if graph.x0 % p:
            for _ in range(r):
                x *= p
                verts.append(x)
    return GraphPath(graph.x0, tuple(verts))


def path_state_union(path: GraphPath, pair: DftPair) -> list[tuple[PureStateLabel, object]]:
    """Labelled projectors of every vertex on the path, in path order."""
    out = []
    for x in path.vertices:
        out.extend(vertex_states(x, pair))
    return out
