"""Exact maximum flow on small networks (Edmonds-Karp with rationals)."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Optional

from .dist import ZERO

INF = math.inf

Node = Hashable


@dataclass(frozen=True)
class FlowNetwork:
    """Directed graph with rational (or infinite) capacities.

    ``nodes`` fixes the iteration order used everywhere, which makes the
    augmenting-path search deterministic.  ``omega`` is an optional target
    value carried along for the Strassen construction.
    """

    nodes: tuple
    capacity: dict
    source: Node
    sink: Node
    omega: Optional[Fraction] = None

    def __post_init__(self):
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ValueError("duplicate nodes")
        if self.source not in known or self.sink not in known:
            raise ValueError("source and sink must be nodes")
        for (u, v), c in self.capacity.items():
            if u not in known or v not in known:
                raise ValueError(f"edge {(u, v)!r} mentions an unknown node")
            if u == v:
                raise ValueError("self-loops are not allowed")
            if c != INF and (not isinstance(c, Fraction) or c < 0):
                raise ValueError(f"capacity of {(u, v)!r} must be a non-negative Fraction or INF")

    def finite_bound(self) -> Fraction:
        """One more than the sum of all finite capacities; stands in for INF."""
        return sum((c for c in self.capacity.values() if c != INF), ZERO) + 1

    def cap(self, u, v):
        return self.capacity.get((u, v), ZERO)

    def cut_capacity(self, source_side) -> Fraction:
        """Capacity of the cut, with INF edges counted at :meth:`finite_bound`."""
        side = set(source_side)
        bound = self.finite_bound()
        return sum(((bound if c == INF else c) for (u, v), c in self.capacity.items()
                    if u in side and v not in side), ZERO)


@dataclass(frozen=True)
class Flow:
    """Antisymmetric flow values (only positive entries stored) and the net mass."""

    value: dict = field(repr=False)
    mass: Fraction

    def __call__(self, u, v) -> Fraction:
        if (u, v) in self.value:
            return self.value[u, v]
        if (v, u) in self.value:
            return -self.value[v, u]
        return ZERO


class _Residual:
    def __init__(self, net: FlowNetwork):
        self.net = net
        bound = net.finite_bound()
        self.order = {n: i for i, n in enumerate(net.nodes)}
        self.res: dict = {}
        adj: dict = {n: set() for n in net.nodes}
        for (u, v), c in net.capacity.items():
            c = bound if c == INF else c
            self.res[u, v] = self.res.get((u, v), ZERO) + c
            self.res.setdefault((v, u), ZERO)
            adj[u].add(v)
            adj[v].add(u)
        self.adj = {n: sorted(vs, key=self.order.__getitem__) for n, vs in adj.items()}

    def reachable_from(self, start) -> set:
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in self.adj[u]:
                if v not in seen and self.res[u, v] > 0:
                    seen.add(v)
                    queue.append(v)
        return seen

    def reaching(self, target) -> set:
        """Nodes with a positive-residual path into ``target``."""
        seen = {target}
        queue = deque([target])
        while queue:
            v = queue.popleft()
            for u in self.adj[v]:
                if u not in seen and self.res[u, v] > 0:
                    seen.add(u)
                    queue.append(u)
        return seen

    def augment_once(self) -> Fraction:
        s, t = self.net.source, self.net.sink
        parent = {s: None}
        queue = deque([s])
        while queue and t not in parent:
            u = queue.popleft()
            for v in self.adj[u]:
                if v not in parent and self.res[u, v] > 0:
                    parent[v] = u
                    queue.append(v)
        if t not in parent:
            return ZERO
        path = []
        v = t
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        push = min(self.res[e] for e in path)
        for u, v in path:
            self.res[u, v] -= push
            self.res[v, u] += push
        return push


def _solve(net: FlowNetwork):
    residual = _Residual(net)
    mass = ZERO
    while True:
        push = residual.augment_once()
        if not push:
            break
        mass += push
    bound = net.finite_bound()

    def cap(u, v):
        c = net.capacity.get((u, v), ZERO)
        return bound if c == INF else c

    # Residual capacity is cap - net flow, so net flow is cap - residual.
    value = {}
    for u, v in {tuple(sorted(e, key=residual.order.__getitem__)) for e in net.capacity}:
        x = cap(u, v) - residual.res[u, v]
        if x > 0:
            value[u, v] = x
        elif x < 0:
            value[v, u] = -x
    return Flow(value, mass), residual


def max_flow(net: FlowNetwork) -> Flow:
    """Exact maximum flow; its mass equals the minimum cut capacity."""
    return _solve(net)[0]


def max_flow_with_cut(net: FlowNetwork):
    """Maximum flow plus the minimal and maximal source sides of minimum cuts.

    The minimal side is everything reachable from the source in the
    residual graph; the maximal side is everything that cannot reach the
    sink.  Both are minimum cuts.
    """
    flow, residual = _solve(net)
    minimal = frozenset(residual.reachable_from(net.source))
    maximal = frozenset(net.nodes) - frozenset(residual.reaching(net.sink))
    return flow, minimal, maximal


def check_flow(net: FlowNetwork, flow: Flow) -> list:
    """Every legality violation of ``flow`` (empty when the flow is legal).

    Checks capacity on every ordered node pair, antisymmetry of the
    reported values, Kirchhoff's law at internal nodes, and that ``mass``
    is the net outflow of the source.
    """
    problems = []
    for (u, v), x in flow.value.items():
        if x <= 0:
            problems.append(f"non-positive stored value on {(u, v)!r}")
        if (v, u) in flow.value:
            problems.append(f"both directions stored for {(u, v)!r}")
        if flow(u, v) != -flow(v, u):
            problems.append(f"antisymmetry fails on {(u, v)!r}")
    for u in net.nodes:
        for v in net.nodes:
            if u == v:
                continue
            c = net.cap(u, v)
            if c != INF and flow(u, v) > c:
                problems.append(f"capacity exceeded on {(u, v)!r}")
    for n in net.nodes:
        if n in (net.source, net.sink):
            continue
        net_out = sum((flow(n, v) for v in net.nodes if v != n), ZERO)
        if net_out != 0:
            problems.append(f"Kirchhoff fails at {n!r} (net out {net_out})")
    out = sum((flow(net.source, v) for v in net.nodes if v != net.source), ZERO)
    if out != flow.mass:
        problems.append(f"mass {flow.mass} differs from source outflow {out}")
    return problems
