"""Parallel composition, buffer detection, connection and concatenation."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

from .circuits import CircuitBundle
from .core import AQCError, Sector, Skeleton, SparseState, VACUUM
from .operators import Flip
from .renaming import Renaming


class AddressClash(AQCError):
    pass


class NotABuffer(AQCError):
    pass


class SizeMismatch(AQCError):
    pass


class OverlapError(AQCError):
    pass


@dataclass(frozen=True)
class BufferReport:
    ingoing: frozenset[int]
    outgoing: frozenset[int]


def _occurring(state: SparseState) -> set[int]:
    return {a for conf in state.terms for s in conf for a in s.addresses()}


def detect_buffers(c: CircuitBundle) -> BufferReport:
    occurring = _occurring(c.initial)
    ingoing, outgoing = set(), set()
    for g in c.skeleton.gates:
        if len(g) != 1 or not isinstance(c.skeleton.operators[g], Flip):
            continue
        a = g[0]
        pos = c.initial.addresses.index(a)
        if a not in occurring:
            ingoing.add(a)
        if all(conf[pos] == VACUUM for conf in c.initial.terms):
            outgoing.add(a)
    return BufferReport(frozenset(ingoing), frozenset(outgoing))


def relabel(c: CircuitBundle, r: Renaming | Mapping[int, int]) -> CircuitBundle:
    """Move every address of ``c`` through an injective map.

    Sector positions, registers, gates and operator literals all follow.
    """
    mapping = {a: (r(a) if isinstance(r, Renaming) else dict(r).get(a, a)) for a in c.skeleton.addresses}
    if len(set(mapping.values())) != len(mapping):
        raise AQCError("relabeling must be injective")

    def ren(w):
        return tuple(mapping[a] for a in w)

    sk = c.skeleton
    new_addrs = tuple(sorted(mapping.values()))
    ops = {}
    for g in sk.gates:
        ng = tuple(sorted(mapping[a] for a in g))
        op = sk.operators[g].relabel(mapping)
        order = [mapping[a] for a in g]
        if order != sorted(order):
            raise AQCError(f"relabeling reorders the multi-sector gate {g}; use an order-preserving map")
        ops[ng] = op
    new_sk = Skeleton(new_addrs, tuple(ops), sk.data_alphabet, sk.max_data_len, ops)
    terms = []
    for conf, amp in c.initial.terms.items():
        by_addr = {mapping[a]: Sector(ren(s.target), ren(s.in_addr), s.in_data, ren(s.out_addr), s.out_data)
                   for a, s in zip(sk.addresses, conf)}
        terms.append((tuple(by_addr[a] for a in new_addrs), amp))
    return CircuitBundle(new_sk, SparseState(new_addrs, terms), [], c.name)


def _merge_skeletons(circuits: Sequence[CircuitBundle], drop: set[int]) -> Skeleton:
    addrs, ops, alphabet, length = [], {}, set(), 0
    for c in circuits:
        addrs.extend(a for a in c.skeleton.addresses if a not in drop)
        for g, op in c.skeleton.operators.items():
            if not (len(g) == 1 and g[0] in drop):
                ops[g] = op
        alphabet |= set(c.skeleton.data_alphabet)
        length += c.skeleton.max_data_len
    return Skeleton(tuple(addrs), tuple(ops), tuple(alphabet), length, ops)


def connect(I: Sequence[int], O: Sequence[int], circuits: Sequence[CircuitBundle]) -> CircuitBundle:
    """Merge outgoing buffer O[k] with ingoing buffer I[k] for every k.

    The merged sector keeps the address O[k] and the register contents of
    I[k]. Sets (rather than sequences) are paired in ascending order.
    """
    I = sorted(I) if isinstance(I, (set, frozenset)) else list(I)
    O = sorted(O) if isinstance(O, (set, frozenset)) else list(O)
    seen: set[int] = set()
    for c in circuits:
        if seen & set(c.skeleton.addresses):
            raise AddressClash(f"circuits share addresses {sorted(seen & set(c.skeleton.addresses))}")
        seen |= set(c.skeleton.addresses)
    if len(I) != len(O):
        raise SizeMismatch("I and O must have the same size")
    if set(I) & set(O) or len(set(I)) != len(I) or len(set(O)) != len(O):
        raise OverlapError("I and O must be disjoint sets")
    reports = [detect_buffers(c) for c in circuits]
    ingoing = set().union(*(r.ingoing for r in reports))
    outgoing = set().union(*(r.outgoing for r in reports))
    for i in I:
        if i not in ingoing:
            raise NotABuffer(f"{i} is not an ingoing buffer")
    for o in O:
        if o not in outgoing:
            raise NotABuffer(f"{o} is not an outgoing buffer")

    skeleton = _merge_skeletons(circuits, set(I))
    source = dict(zip(O, I))  # merged sector o takes its contents from i
    parts = []
    for c in circuits:
        parts.append([(dict(zip(c.skeleton.addresses, conf)), amp) for conf, amp in c.initial.terms.items()])
    terms = []
    for combo in product(*parts):
        merged: dict = {}
        amp = 1.0 + 0j
        for assign, a in combo:
            merged.update(assign)
            amp *= a
        conf = tuple(merged[source.get(a, a)] for a in skeleton.addresses)
        terms.append((conf, amp))
    state = SparseState(skeleton.addresses, terms).validate(skeleton)
    return CircuitBundle(skeleton, state, [], "+".join(c.name for c in circuits))


def parallel(cA: CircuitBundle, cB: CircuitBundle) -> CircuitBundle:
    return connect([], [], [cA, cB])


def concatenate(cA: CircuitBundle, cB: CircuitBundle, I: Sequence[int], O: Sequence[int]) -> CircuitBundle:
    """cA ⊙ cB: I from cB's ingoing buffers, O from cA's outgoing buffers."""
    if not set(I) <= detect_buffers(cB).ingoing:
        raise NotABuffer("I must be ingoing buffers of the second circuit")
    if not set(O) <= detect_buffers(cA).outgoing:
        raise NotABuffer("O must be outgoing buffers of the first circuit")
    return connect(I, O, [cA, cB])


def trivial_circuit(address: int) -> CircuitBundle:
    """One empty flip sector: both an ingoing and an outgoing buffer."""
    sk = Skeleton((address,), ((address,),), (), 0, {(address,): Flip()})
    return CircuitBundle(sk, SparseState.basis((address,), (VACUUM,)), [], "trivial")


def same_circuit(a: CircuitBundle, b: CircuitBundle) -> bool:
    """Equal skeletons (operators compared by spec) and equal initial states."""
    sa, sb = a.skeleton, b.skeleton
    return (sa.addresses == sb.addresses and sa.gates == sb.gates and sa.data_alphabet == sb.data_alphabet
            and sa.max_data_len == sb.max_data_len
            and all(sa.operators[g].to_spec() == sb.operators[g].to_spec() for g in sa.gates)
            and a.initial == b.initial)
