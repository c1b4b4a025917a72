"""Renamings of the address set and gate-local nameblindness checks."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import AQCError, Configuration, Sector, Skeleton, SparseState
from .operators import GateOperator, Local


class OutOfRange(AQCError):
    pass


class Renaming:
    """A bijection of a finite address set; ``r @ s`` applies s first."""

    __slots__ = ("_map",)

    def __init__(self, mapping: Mapping[int, int]):
        m = {int(a): int(b) for a, b in mapping.items()}
        if sorted(m) != sorted(m.values()):
            raise AQCError("a renaming must be a bijection of its address set")
        self._map = m

    @classmethod
    def identity(cls, addresses: Iterable[int]) -> "Renaming":
        return cls({a: a for a in addresses})

    @classmethod
    def cycles(cls, addresses: Iterable[int], *cycles: Sequence[int]) -> "Renaming":
        """Build from cycle notation, e.g. cycles(A, (2, 9, 8), (4, 5))."""
        m = {a: a for a in addresses}
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                m[a] = b
        return cls(m)

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(sorted(self._map))

    def __call__(self, a: int) -> int:
        return self._map.get(a, a)

    def word(self, w: Sequence[int]) -> tuple[int, ...]:
        return tuple(self(a) for a in w)

    def __matmul__(self, other: "Renaming") -> "Renaming":
        dom = set(self._map) | set(other._map)
        return Renaming({a: self(other(a)) for a in dom})

    def inverse(self) -> "Renaming":
        return Renaming({b: a for a, b in self._map.items()})

    def is_identity(self) -> bool:
        return all(a == b for a, b in self._map.items())

    def support(self) -> set[int]:
        return {a for a, b in self._map.items() if a != b}

    def as_dict(self) -> dict[int, int]:
        return dict(self._map)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Renaming):
            return NotImplemented
        dom = set(self._map) | set(other._map)
        return all(self(a) == other(a) for a in dom)

    def __hash__(self) -> int:
        return hash(tuple(sorted((a, b) for a, b in self._map.items() if a != b)))

    def __repr__(self) -> str:
        return f"Renaming({dict(sorted((a, b) for a, b in self._map.items() if a != b))})"


def rename_sector(r: Renaming, s: Sector) -> Sector:
    return Sector(r.word(s.target), r.word(s.in_addr), s.in_data, r.word(s.out_addr), s.out_data)


def rename_local(r: Renaming, local: Local) -> Local:
    return tuple(rename_sector(r, s) for s in local)


def apply_renaming(r: Renaming, state: SparseState) -> SparseState:
    """Rename register contents; sector positions stay put."""
    return SparseState(state.addresses, ((rename_local(r, c), a) for c, a in state.terms.items()))


def relabel_configuration(r: Renaming, addresses: tuple[int, ...], config: Configuration) -> Configuration:
    """Move the sector at a to position r(a) and rename its registers."""
    by_addr = {r(a): rename_sector(r, s) for a, s in zip(addresses, config)}
    return tuple(by_addr[a] for a in addresses)


def adjacent_transposition(k: int, A: Iterable[int]) -> Renaming:
    """Swap the k-th and (k+1)-th smallest addresses of A (1-based)."""
    addrs = sorted(A)
    if not 1 <= k < len(addrs):
        raise OutOfRange(f"k={k} outside 1..{len(addrs) - 1}")
    m = {a: a for a in addrs}
    m[addrs[k - 1]], m[addrs[k]] = addrs[k], addrs[k - 1]
    return Renaming(m)


def bubble_factorization(r: Renaming, A: Iterable[int]) -> list[int]:
    """Indices k with r = R_{k_1} @ R_{k_2} @ … (adjacent transpositions of A)."""
    addrs = sorted(A)
    pos = {a: i for i, a in enumerate(addrs)}
    # position permutation: r(addrs[i]) = addrs[p[i]]
    arr = [pos[r(a)] for a in addrs]
    swaps: list[int] = []
    n = len(arr)
    for i in range(n):
        for j in range(n - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                swaps.append(j + 1)
    # p ∘ τ_{s_1} ∘ … ∘ τ_{s_t} = id, hence p = τ_{s_t} ∘ … ∘ τ_{s_1}
    return swaps[::-1]


def compose_transpositions(ks: Sequence[int], A: Iterable[int]) -> Renaming:
    addrs = sorted(A)
    out = Renaming.identity(addrs)
    for k in ks:
        out = out @ adjacent_transposition(k, addrs)
    return out


def is_external(r: Renaming, g: Iterable[int]) -> bool:
    return all(r(a) == a for a in g)


def decompose_renaming(r: Renaming, mu: Sequence[int]) -> tuple[Renaming, Renaming, Renaming]:
    """Return (E, I, M) with r = E @ I @ M.

    M swaps SET(mu)\\SET(r(mu)) with SET(r(mu))\\SET(mu) in ascending order,
    I is internal to M(mu) and sends M(mu)_k to r(mu)_k, and E fixes r(mu).
    """
    mu = tuple(mu)
    if len(set(mu)) != len(mu):
        raise AQCError("mu must be non-repeating")
    dom = set(r.domain) | set(mu)
    rmu = r.word(mu)
    leaving = sorted(set(mu) - set(rmu))
    arriving = sorted(set(rmu) - set(mu))
    m = {a: a for a in dom}
    for x, y in zip(leaving, arriving):
        m[x], m[y] = y, x
    M = Renaming(m)
    mmu = M.word(mu)
    i_map = {a: a for a in dom}
    for x, y in zip(mmu, rmu):
        i_map[x] = y
    I = Renaming(i_map)
    E = r @ M.inverse() @ I.inverse()
    return E, I, M


# --------------------------------------------------------------------------
# nameblindness of gate operators

@dataclass
class NameblindReport:
    gate: tuple[int, ...]
    max_defect: float = 0.0
    renamings_checked: int = 0
    probes: int = 0
    worst: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.max_defect < 1e-10

    def to_json(self) -> dict:
        return {"gate": list(self.gate), "max_defect": self.max_defect, "renamings": self.renamings_checked,
                "probes": self.probes, "worst": self.worst, "ok": self.ok}


def _image_dict(op: GateOperator, local: Local) -> dict[Local, complex]:
    out: dict[Local, complex] = {}
    for a, y in op.apply(local):
        out[y] = out.get(y, 0j) + a
    return out


def external_renamings(skeleton: Skeleton, g: Sequence[int], mode: str = "exhaustive") -> list[Renaming]:
    ext = [a for a in skeleton.addresses if a not in g]
    if mode == "full":
        if len(ext) > 6:
            raise AQCError("full enumeration is limited to 6 external addresses")
        out = []
        for perm in itertools.permutations(ext):
            out.append(Renaming({**{a: a for a in skeleton.addresses}, **dict(zip(ext, perm))}))
        return out
    out = []
    for k in range(1, len(ext)):
        out.append(Renaming({**{a: a for a in skeleton.addresses}, ext[k - 1]: ext[k], ext[k]: ext[k - 1]}))
    return out


def _orbit_closure(probes: list[Local], gens: Sequence[Renaming], limit: int) -> list[Local]:
    seen = dict.fromkeys(probes)
    frontier = list(seen)
    while frontier:
        nxt = []
        for x in frontier:
            for E in gens:
                y = rename_local(E, x)
                if y not in seen:
                    seen[y] = None
                    nxt.append(y)
        if len(seen) > limit:
            raise AQCError(f"probe orbit exceeds {limit} local states")
        frontier = nxt
    return list(seen)


def check_nameblind_gate(skeleton: Skeleton, g: Sequence[int], probe_basis: Iterable[Local],
                         mode: str = "exhaustive", samples: int = 64, seed: int = 0,
                         limit: int = 50000) -> NameblindReport:
    """max ‖S E|x> − E S|x>‖ over external renamings E and probes x.

    ``exhaustive`` uses the external adjacent transpositions on the probe set
    closed under them, which is enough to cover the whole external group on
    that set. ``full`` enumerates the external group, ``sampled`` a random
    subset of it.
    """
    g = tuple(sorted(g))
    op = skeleton.operators[g]
    if mode == "sampled":
        import random
        rng = random.Random(seed)
        ext = [a for a in skeleton.addresses if a not in g]
        renamings = []
        for _ in range(samples):
            perm = ext[:]
            rng.shuffle(perm)
            renamings.append(Renaming({**{a: a for a in skeleton.addresses}, **dict(zip(ext, perm))}))
    else:
        renamings = external_renamings(skeleton, g, "full" if mode == "full" else "exhaustive")
    probes = list(dict.fromkeys(probe_basis))
    if mode == "exhaustive":
        probes = _orbit_closure(probes, renamings, limit)
    report = NameblindReport(g, renamings_checked=len(renamings), probes=len(probes))
    for x in probes:
        sx = _image_dict(op, x)
        for E in renamings:
            lhs = _image_dict(op, rename_local(E, x))
            rhs: dict[Local, complex] = {}
            for y, a in sx.items():
                ey = rename_local(E, y)
                rhs[ey] = rhs.get(ey, 0j) + a
            keys = set(lhs) | set(rhs)
            d = math.sqrt(sum(abs(lhs.get(k, 0) - rhs.get(k, 0)) ** 2 for k in keys))
            if d > report.max_defect:
                report.max_defect = d
                report.worst = {"renaming": repr(E), "state": repr(x)}
    return report


@dataclass
class CircuitNameblindReport:
    gates: list[NameblindReport]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.gates)

    def to_json(self) -> dict:
        return {"gates": [r.to_json() for r in self.gates], "ok": self.ok}


def check_nameblind_circuit(skeleton: Skeleton, probes: Mapping[tuple[int, ...], Iterable[Local]],
                            mode: str = "exhaustive") -> CircuitNameblindReport:
    return CircuitNameblindReport([check_nameblind_gate(skeleton, g, probes.get(g, ()), mode)
                                   for g in skeleton.gates])
