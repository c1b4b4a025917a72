"""Port-graph encoding of AQC configurations and the matching graph dynamics.

Vertices are ("s", a) for sectors and ("r", min(g)) for gates. A port is a
pair (kind, index): ("p", a), ("e", 0), ("tau", 0), ("in", i), ("out", i)
with 1-based word positions. An edge is a sorted pair of (vertex, port)
endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable

from .circuits import CircuitBundle
from .core import AQCError, Configuration, Sector, Skeleton, SparseState
from .evolution import run
from .operators import Local

Vertex = tuple[str, int]
Endpoint = tuple[Vertex, tuple[str, int]]
Edge = tuple[Endpoint, Endpoint]

_VORDER = {"s": 0, "r": 1}


def _vkey(v: Vertex):
    return (_VORDER[v[0]], v[1])


def _edge(a: Endpoint, b: Endpoint) -> Edge:
    return (a, b) if (_vkey(a[0]), a[1]) <= (_vkey(b[0]), b[1]) else (b, a)


@dataclass(frozen=True)
class PortGraph:
    """Edges and sector labels; gate labels live in the skeleton."""

    edges: tuple[Edge, ...]
    labels: tuple[tuple[int, tuple[tuple[str, ...], tuple[str, ...]]], ...]

    @staticmethod
    def make(edges: Iterable[Edge], labels: dict[int, tuple]) -> "PortGraph":
        es = tuple(sorted(set(edges), key=lambda e: ((_vkey(e[0][0]), e[0][1]), (_vkey(e[1][0]), e[1][1]))))
        return PortGraph(es, tuple(sorted(labels.items())))

    def serialize(self) -> str:
        lines = [f"{_vname(a[0])}.{_pname(a[1])} -- {_vname(b[0])}.{_pname(b[1])}" for a, b in self.edges]
        lines += [f"{_vname(('s', a))} [{' '.join(qi)} | {' '.join(qo)}]" for a, (qi, qo) in self.labels]
        return "\n".join(lines)


def _vname(v: Vertex) -> str:
    return f"{v[0]}{v[1]}"


def _pname(p: tuple[str, int]) -> str:
    kind, i = p
    return kind if kind in ("e", "tau") else f"{kind}{i}"


GraphState = dict[PortGraph, complex]


def encode_config(skeleton: Skeleton, config: Configuration) -> PortGraph:
    edges: list[Edge] = []
    labels = {}
    for a, s in zip(skeleton.addresses, config):
        sa = ("s", a)
        if s.target:
            edges.append(_edge((sa, ("tau", 0)), (("s", s.target[0]), ("e", 0))))
        for kind, word in (("in", s.in_addr), ("out", s.out_addr)):
            for i, b in enumerate(word, start=1):
                edges.append(_edge((sa, (kind, i)), (("s", b), ("e", 0))))
        labels[a] = (s.in_data, s.out_data)
    for g in skeleton.gates:
        r = ("r", g[0])
        for a in g:
            edges.append(_edge((("s", a), ("p", a)), (r, ("p", a))))
    return PortGraph.make(edges, labels)


def encode(c: CircuitBundle | Skeleton, state: SparseState | None = None) -> GraphState:
    skeleton = c if isinstance(c, Skeleton) else c.skeleton
    state = state if state is not None else c.initial
    out: GraphState = {}
    for conf, amp in state.terms.items():
        g = encode_config(skeleton, conf)
        out[g] = out.get(g, 0j) + amp
    return out


class _Index:
    """Endpoint -> opposite endpoint, for one graph."""

    def __init__(self, g: PortGraph):
        self.other: dict[Endpoint, Endpoint] = {}
        for a, b in g.edges:
            self.other[a] = b
            self.other[b] = a
        self.labels = dict(g.labels)

    def word(self, a: int, kind: str) -> tuple[int, ...]:
        out = []
        i = 1
        while ((("s", a), (kind, i))) in self.other:
            out.append(self.other[(("s", a), (kind, i))][0][1])
            i += 1
        return tuple(out)

    def sector(self, a: int) -> Sector:
        tau = self.other.get((("s", a), ("tau", 0)))
        target = (tau[0][1],) if tau else ()
        qi, qo = self.labels.get(a, ((), ()))
        return Sector(target, self.word(a, "in"), qi, self.word(a, "out"), qo)


def _sector_edges(a: int, s: Sector) -> list[Edge]:
    sa = ("s", a)
    edges = []
    if s.target:
        edges.append(_edge((sa, ("tau", 0)), (("s", s.target[0]), ("e", 0))))
    for kind, word in (("in", s.in_addr), ("out", s.out_addr)):
        for i, b in enumerate(word, start=1):
            edges.append(_edge((sa, (kind, i)), (("s", b), ("e", 0))))
    return edges


def _owned(edge: Edge, sectors: set[int]) -> bool:
    """Edges hanging off the tau/in/out ports of the given sector vertices."""
    for (v, (kind, _)) in edge:
        if v[0] == "s" and v[1] in sectors and kind in ("tau", "in", "out"):
            return True
    return False


def graph_transport_graph(g: PortGraph) -> PortGraph:
    idx = _Index(g)
    pairs = []
    for (a, b) in g.edges:
        for src, dst in ((a, b), (b, a)):
            if src[1] == ("tau", 0) and dst[1] == ("e", 0):
                pairs.append((src[0][1], dst[0][1]))
    new_edges: list[Edge] = []
    labels = dict(idx.labels)
    swap_in: dict[int, tuple[int, ...]] = {}
    swap_out: dict[int, tuple[int, ...]] = {}
    for a, t in pairs:
        swap_out[a] = idx.word(t, "in")
        swap_in[t] = idx.word(a, "out")
        labels[a] = (labels[a][0], idx.labels[t][0])
    for a, t in pairs:
        labels[t] = (idx.labels[a][1], labels[t][1])
    for e in g.edges:
        drop = False
        for (v, (kind, _)) in e:
            if v[0] == "s" and ((kind == "out" and v[1] in swap_out) or (kind == "in" and v[1] in swap_in)):
                drop = True
        if not drop:
            new_edges.append(e)
    for a, word in swap_out.items():
        new_edges += [_edge((("s", a), ("out", i)), (("s", b), ("e", 0))) for i, b in enumerate(word, start=1)]
    for t, word in swap_in.items():
        new_edges += [_edge((("s", t), ("in", i)), (("s", b), ("e", 0))) for i, b in enumerate(word, start=1)]
    return PortGraph.make(new_edges, labels)


def graph_transport(state: GraphState) -> GraphState:
    out: GraphState = {}
    for g, amp in state.items():
        h = graph_transport_graph(g)
        out[h] = out.get(h, 0j) + amp
    return out


def _gate_members(idx: _Index, r: Vertex) -> tuple[int, ...]:
    members = [ep[0][1] for key, ep in idx.other.items() if key[0] == r]
    return tuple(sorted(members))


def graph_scatter_graph(g: PortGraph, skeleton: Skeleton) -> list[tuple[complex, PortGraph]]:
    idx = _Index(g)
    gate_vertices = sorted({ep[0] for e in g.edges for ep in e if ep[0][0] == "r"}, key=_vkey)
    branches = []
    for r in gate_vertices:
        members = _gate_members(idx, r)
        op = skeleton.operators.get(members)
        if op is None:
            raise AQCError(f"gate vertex {_vname(r)} does not resolve to a skeleton gate")
        local: Local = tuple(idx.sector(a) for a in members)
        image = op.apply(local)
        if len(image) == 1 and image[0][1] == local and image[0][0] == 1:
            continue
        branches.append((members, image))
    if not branches:
        return [(1.0, g)]
    results = []
    for combo in product(*(img for _, img in branches)):
        touched: set[int] = set()
        amp = 1.0 + 0j
        new_sectors: dict[int, Sector] = {}
        for (members, _), (a, out) in zip(branches, combo):
            amp *= a
            touched |= set(members)
            new_sectors.update(zip(members, out))
        edges = [e for e in g.edges if not _owned(e, touched)]
        labels = dict(idx.labels)
        for a, s in new_sectors.items():
            edges += _sector_edges(a, s)
            labels[a] = (s.in_data, s.out_data)
        results.append((amp, PortGraph.make(edges, labels)))
    return results


def graph_scatter(state: GraphState, skeleton: Skeleton) -> GraphState:
    out: GraphState = {}
    for g, amp in state.items():
        for a, h in graph_scatter_graph(g, skeleton):
            out[h] = out.get(h, 0j) + amp * a
    return {k: v for k, v in out.items() if abs(v) >= 1e-12}


def graph_step(state: GraphState, skeleton: Skeleton) -> GraphState:
    return graph_transport(graph_scatter(state, skeleton))


def graph_distance(a: GraphState, b: GraphState) -> float:
    keys = set(a) | set(b)
    return math.sqrt(sum(abs(a.get(k, 0) - b.get(k, 0)) ** 2 for k in keys))


def check_port_e(g: PortGraph) -> bool:
    """At most one edge per e-port and one p-edge per sector."""
    seen: set[Endpoint] = set()
    for e in g.edges:
        for ep in e:
            if ep[1][0] in ("e", "tau", "in", "out", "p"):
                if ep in seen:
                    return False
                seen.add(ep)
    return True


@dataclass
class EquivalenceReport:
    distances: list[float]

    @property
    def max_distance(self) -> float:
        return max(self.distances, default=0.0)

    @property
    def ok(self) -> bool:
        return self.max_distance < 1e-10

    def to_json(self) -> dict:
        return {"steps": len(self.distances), "max_distance": self.max_distance, "ok": self.ok}


def check_equivalence(c: CircuitBundle, k: int, frames: list | None = None) -> EquivalenceReport:
    """Compare encode(G^j C) with E^j encode(C) for j = 1..k."""
    if k < 1:
        raise AQCError("k must be at least 1")
    state = c.initial
    graph = encode(c)
    distances = []
    for _ in range(k):
        state = run(c.skeleton, state, 1)
        graph = graph_step(graph, c.skeleton)
        distances.append(graph_distance(encode(c.skeleton, state), graph))
        if frames is not None:
            frames.append(graph)
    return EquivalenceReport(distances)


def to_edge_list(state: GraphState) -> str:
    blocks = []
    for g, amp in sorted(state.items(), key=lambda kv: kv[0].serialize()):
        blocks.append(f"# amplitude {amp.real!r} {amp.imag!r}\n{g.serialize()}")
    return "\n\n".join(blocks) + "\n"


def to_dot(state: GraphState, skeleton: Skeleton) -> str:
    lines = ["graph aqc {", "  node [shape=circle];"]
    for n, (g, amp) in enumerate(sorted(state.items(), key=lambda kv: kv[0].serialize())):
        lines.append(f"  subgraph cluster_{n} {{")
        lines.append(f'    label="{amp.real:.6g}{amp.imag:+.6g}i";')
        for a, (qi, qo) in g.labels:
            lines.append(f'    t{n}_s{a} [label="{a}\\n{"".join(qi)}|{"".join(qo)}"];')
        for gate in skeleton.gates:
            lines.append(f'    t{n}_r{gate[0]} [shape=box, color=red, label="r{gate[0]}"];')
        for (va, pa), (vb, pb) in g.edges:
            colour = "red" if pa[0] == "p" else "black" if "tau" in (pa[0], pb[0]) else "blue"
            lines.append(f'    t{n}_{_vname(va)} -- t{n}_{_vname(vb)} '
                         f'[taillabel="{_pname(pa)}", headlabel="{_pname(pb)}", color={colour}];')
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
