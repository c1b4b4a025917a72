"""Scattering, transport and the global evolution G = T∘S."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .core import (ATOL, PRUNE, Configuration, DataError, Sector, SparseState, Skeleton,
                   address_multiset, validate_configuration)
from .operators import GateOperator, Local, NonUnitaryRule, RuleOperator


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("AQC_THREADS", "1")))
    except ValueError:
        return 1


def _local_image(op: GateOperator, local: Local, check: bool = True) -> list[tuple[complex, Local]]:
    image = op.apply(local)
    if check:
        norm2 = sum(abs(a) ** 2 for a, _ in image)
        if abs(norm2 - 1.0) > ATOL:
            raise NonUnitaryRule(f"image of {local} has squared norm {norm2}")
    return image


def _scatter_config(gate_ix: Sequence[tuple[GateOperator, tuple[int, ...]]],
                    config: Configuration) -> list[tuple[complex, Configuration]]:
    branches: list[list[tuple[complex, tuple[int, ...], Local]]] = []
    for op, ix in gate_ix:
        local = tuple(config[i] for i in ix)
        image = _local_image(op, local)
        if len(image) == 1 and image[0][1] == local and image[0][0] == 1.0:
            continue
        branches.append([(a, ix, out) for a, out in image])
    if not branches:
        return [(1.0, config)]
    results = []
    for combo in product(*branches):
        amp = 1.0 + 0j
        new = list(config)
        for a, ix, out in combo:
            amp *= a
            for i, s in zip(ix, out):
                new[i] = s
        results.append((amp, tuple(new)))
    return results


def _gate_indices(skeleton: Skeleton):
    return [(skeleton.operators[g], tuple(skeleton.index(a) for a in g)) for g in skeleton.gates]


def _check_outputs(skeleton: Skeleton, before: Configuration, after: Configuration) -> None:
    validate_configuration(after, skeleton.addresses, skeleton)
    if address_multiset(before) != address_multiset(after):
        raise DataError("gate operator did not preserve the address multiset")


def scatter(skeleton: Skeleton, state: SparseState, workers: int | None = None,
            validate: bool = True) -> SparseState:
    """Apply every gate operator simultaneously, term by term."""
    gate_ix = _gate_indices(skeleton)
    items = list(state.terms.items())

    def work(chunk):
        out = []
        for config, amp in chunk:
            for a, new in _scatter_config(gate_ix, config):
                if validate and new != config:
                    _check_outputs(skeleton, config, new)
                out.append((new, amp * a))
        return out

    workers = workers or worker_count()
    if workers > 1 and len(items) > 1:
        size = -(-len(items) // workers)
        chunks = [items[i:i + size] for i in range(0, len(items), size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, chunks))
        pairs = [p for part in parts for p in part]
    else:
        pairs = work(items)
    return SparseState(state.addresses, pairs)


def apply_gate_operator(op: GateOperator, gate: Iterable[int], state: SparseState) -> SparseState:
    """Apply one gate operator to the sectors ``gate`` of ``state``."""
    ix = tuple(state.addresses.index(a) for a in sorted(gate))
    pairs = []
    for config, amp in state.terms.items():
        for a, new in _scatter_config([(op, ix)], config):
            pairs.append((new, amp * a))
    return SparseState(state.addresses, pairs)


def transport_config(addresses: tuple[int, ...], config: Configuration) -> Configuration:
    pos = {a: i for i, a in enumerate(addresses)}
    ins = [(s.in_addr, s.in_data) for s in config]
    outs = [(s.out_addr, s.out_data) for s in config]
    new_ins, new_outs = list(ins), list(outs)
    for i, s in enumerate(config):
        if s.target:
            j = pos[s.target[0]]
            new_outs[i] = ins[j]
            new_ins[j] = outs[i]
    return tuple(Sector(s.target, new_ins[i][0], new_ins[i][1], new_outs[i][0], new_outs[i][1])
                 for i, s in enumerate(config))


def transport(state: SparseState) -> SparseState:
    """Swap each sector's output with its target's input. A basis permutation."""
    return SparseState(state.addresses,
                       ((transport_config(state.addresses, c), a) for c, a in state.terms.items()))


def step(skeleton: Skeleton, state: SparseState, validate: bool = True) -> SparseState:
    out = transport(scatter(skeleton, state, validate=validate))
    if validate:
        out.validate(skeleton)
    return out


def run(skeleton: Skeleton, state: SparseState, k: int, validate: bool = True) -> SparseState:
    """k applications of G."""
    if k < 0:
        raise ValueError("k must be non-negative")
    for _ in range(k):
        state = step(skeleton, state, validate=validate)
    return state


def trajectory(skeleton: Skeleton, state: SparseState, k: int) -> list[SparseState]:
    """States after 0, 1, …, k applications."""
    out = [state]
    for _ in range(k):
        out.append(step(skeleton, out[-1]))
    return out


# --------------------------------------------------------------------------
# operator checks

@dataclass
class OperatorReport:
    address_violations: list = field(default_factory=list)
    overlaps: list = field(default_factory=list)
    unitarity_defect: float = 0.0
    closure_size: int = 0
    truncated: bool = False

    @property
    def ok(self) -> bool:
        return not self.address_violations and not self.overlaps and self.unitarity_defect < 1e-10

    def to_json(self) -> dict:
        return {"address_violations": self.address_violations, "overlaps": self.overlaps,
                "unitarity_defect": self.unitarity_defect, "closure_size": self.closure_size,
                "truncated": self.truncated, "ok": self.ok}


def _local_addresses(local: Local) -> list[int]:
    return sorted(a for s in local for a in s.addresses())


def check_gate_operator(op: GateOperator, probe_basis: Iterable[Local], limit: int = 20000) -> OperatorReport:
    """Address preservation and isometry on the forward closure of ``probe_basis``."""
    report = OperatorReport()
    rule_ops = [op] if isinstance(op, RuleOperator) else [o for o in getattr(op, "ops", ()) if isinstance(o, RuleOperator)]
    for rop in rule_ops:
        for i, r in enumerate(rop.rules):
            if not r.preserves_addresses():
                report.address_violations.append({"rule": i})

    closure: list[Local] = []
    index: dict[Local, int] = {}
    frontier = list(dict.fromkeys(tuple(p) for p in probe_basis))
    images: dict[Local, list] = {}
    while frontier and len(closure) < limit:
        nxt = []
        for x in frontier:
            if x in index:
                continue
            index[x] = len(closure)
            closure.append(x)
            img = op.apply(x)
            images[x] = img
            for a, y in img:
                if _local_addresses(y) != _local_addresses(x):
                    report.address_violations.append({"state": repr(x)})
                if y not in index:
                    nxt.append(y)
            if isinstance(op, RuleOperator):
                hits = op.matching_rules(x)
                if len(hits) > 1:
                    outs = {tuple(sorted(((o, a) for a, o in _rule_image(op, i, env)), key=repr)) for i, env in hits}
                    if len(outs) > 1:
                        report.overlaps.append({"state": repr(x), "rules": [i for i, _ in hits]})
        frontier = nxt
    report.truncated = bool(frontier)
    rows: dict[Local, int] = dict(index)
    for img in images.values():
        for _, y in img:
            rows.setdefault(y, len(rows))
    mat = np.zeros((len(rows), len(closure)), dtype=complex)
    for x, img in images.items():
        for a, y in img:
            mat[rows[y], index[x]] += a
    gram = mat.conj().T @ mat
    report.unitarity_defect = float(np.max(np.abs(gram - np.eye(len(closure))))) if closure else 0.0
    report.closure_size = len(closure)
    return report


def _rule_image(op: RuleOperator, i: int, env: dict):
    return [(a, p.instantiate(env)) for a, p in op.rules[i].outputs]


def reachable_locals(skeleton: Skeleton, state: SparseState, gate: Sequence[int], depth: int) -> set[Local]:
    """Restrictions to ``gate`` of every basis state met in ``depth`` steps."""
    ix = [skeleton.index(a) for a in sorted(gate)]
    seen: set[Local] = set()
    current = state
    for d in range(depth + 1):
        for c in current.terms:
            seen.add(tuple(c[i] for i in ix))
        if d < depth:
            current = step(skeleton, current)
    return seen


def reachable_configs(skeleton: Skeleton, state: SparseState, depth: int) -> set[Configuration]:
    seen: set[Configuration] = set()
    current = state
    for d in range(depth + 1):
        seen.update(current.terms)
        if d < depth:
            current = step(skeleton, current)
    return seen


__all__ = ["scatter", "transport", "step", "run", "trajectory", "apply_gate_operator",
           "check_gate_operator", "OperatorReport", "reachable_locals", "reachable_configs",
           "transport_config", "PRUNE"]
