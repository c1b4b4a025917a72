"""Command-line entry point: ``aqc run|verify|nameblind|compose|qcgd|export``.

Exit codes: 0 pass, 1 input error, 2 verification failure, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import circuits as C
from .composition import concatenate, connect, relabel
from .core import AQCError
from .evolution import check_gate_operator, reachable_locals, run, trajectory
from .io import DocumentError, dump_state, load_bundle, save_bundle
from .nameblind import (ResourceLimit, commutant_dimension, dump_matrix, is_nameblind, load_matrix,
                        random_nameblind, random_pure_nameblind)
from .qcgd import check_equivalence, to_dot, to_edge_list
from .renaming import check_nameblind_gate

EXIT_OK, EXIT_INPUT, EXIT_FAIL, EXIT_LIMIT = 0, 1, 2, 3


def _emit(obj) -> None:
    print(json.dumps(obj, indent=1, sort_keys=True, default=str))


def cmd_run(args) -> int:
    bundle = load_bundle(args.circuit)
    at = sorted(set(args.at)) if args.at else [args.steps]
    states = trajectory(bundle.skeleton, bundle.initial, max(at + [args.steps]))
    if args.dump:
        for k in at:
            print(f"== step {k}")
            sys.stdout.write(dump_state(states[k]))
    status = EXIT_OK
    if args.landmarks:
        results = []
        for lm in bundle.landmarks:
            k = lm["step"]
            st = states[k] if k < len(states) else run(bundle.skeleton, bundle.initial, k)
            results.append(C.evaluate_landmark(bundle, lm, st))
        _emit({"landmarks": results, "ok": all(r["ok"] for r in results)})
        if not all(r["ok"] for r in results):
            status = EXIT_FAIL
    return status


def cmd_verify(args) -> int:
    bundle = load_bundle(args.circuit)
    do_unitary = args.unitary or not args.nameblind
    do_nameblind = args.nameblind or not args.unitary
    mode = "full" if args.full else "exhaustive"
    report: dict = {"circuit": str(args.circuit), "gates": []}
    ok = True
    for g in bundle.skeleton.gates:
        probes = reachable_locals(bundle.skeleton, bundle.initial, g, args.probe_depth)
        entry: dict = {"gate": list(g)}
        if do_unitary:
            r = check_gate_operator(bundle.skeleton.operators[g], probes)
            entry["unitary"] = r.to_json()
            ok &= r.ok
        if do_nameblind:
            r = check_nameblind_gate(bundle.skeleton, g, probes, mode=mode)
            entry["nameblind"] = r.to_json()
            ok &= r.ok
        report["gates"].append(entry)
    report["ok"] = bool(ok)
    _emit(report)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_nameblind(args) -> int:
    if args.action == "gen":
        if args.n > 5:
            raise ResourceLimit("dense nameblind matrices are limited to n <= 5")
        rng = np.random.default_rng(args.seed)
        M = random_pure_nameblind(args.n, rng) if args.pure else random_nameblind(args.n, rng)
        text = dump_matrix(M, args.n, args.n)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    if args.action == "check":
        try:
            M, basis = load_matrix(Path(args.matrix).read_text())
        except OSError as e:
            raise DocumentError(args.matrix, e.strerror or str(e)) from None
        if basis.n > 6:
            raise ResourceLimit("matrix checks are limited to 6 addresses")
        r = is_nameblind(M, basis, args.mode)
        _emit({"max_defect": r.max_defect, "renamings": r.renamings, "ok": r.ok})
        return EXIT_OK if r.ok else EXIT_FAIL
    if args.action == "commutant-dim":
        print(commutant_dimension(args.n))
        return EXIT_OK
    raise AQCError(f"unknown action {args.action}")


def _load_constituent(entry, base: Path):
    if isinstance(entry, str):
        entry = {"file": entry}
    bundle = load_bundle(base / entry["file"])
    if "relabel" in entry:
        bundle = relabel(bundle, {int(k): int(v) for k, v in entry["relabel"].items()})
    return bundle


def cmd_compose(args) -> int:
    spec_path = Path(args.spec)
    try:
        spec = json.loads(spec_path.read_text())
    except OSError as e:
        raise DocumentError(str(spec_path), e.strerror or str(e)) from None
    except json.JSONDecodeError as e:
        raise DocumentError(f"{spec_path}:{e.lineno}", e.msg) from None
    base = spec_path.parent
    parts = [_load_constituent(e, base) for e in spec.get("circuits", [])]
    if len(parts) < 1:
        raise DocumentError("circuits", "at least one constituent is required")
    pairs = spec.get("pairs", [])
    if spec.get("mode") == "parallel":
        pairs = []
    I = [int(i) for i, _ in pairs]
    O = [int(o) for _, o in pairs]
    if spec.get("mode") == "concatenate":
        if len(parts) != 2:
            raise DocumentError("circuits", "concatenation takes two constituents")
        out = concatenate(parts[0], parts[1], I, O)
    else:
        out = connect(I, O, parts)
    target = args.out or spec.get("output")
    if target:
        target_path = Path(target) if args.out else base / target
        save_bundle(out, target_path)
        _emit({"written": str(target_path), "addresses": list(out.skeleton.addresses)})
    else:
        from .io import bundle_to_document
        _emit(bundle_to_document(out))
    return EXIT_OK


def cmd_qcgd(args) -> int:
    bundle = load_bundle(args.circuit)
    frames: list = []
    report = check_equivalence(bundle, args.steps, frames)
    if args.dot:
        out = Path(args.dot)
        out.mkdir(parents=True, exist_ok=True)
        for k, g in enumerate(frames, start=1):
            (out / f"step_{k:03d}.dot").write_text(to_dot(g, bundle.skeleton))
    if args.edges:
        sys.stdout.write(to_edge_list(frames[-1]))
    _emit(report.to_json())
    return EXIT_OK if report.ok else EXIT_FAIL


def _named_unitary(name: str, seed: int | None):
    if name in C.PAULI:
        return C.PAULI[name]
    if name == "random":
        return C.random_unitary(2, np.random.default_rng(seed))
    raise AQCError(f"unknown unitary {name!r}; use one of {sorted(C.PAULI)} or 'random'")


def build_named(name: str, args) -> C.CircuitBundle:
    if name == "bell":
        return C.bell_circuit()
    if name == "switch":
        U, V = _named_unitary(args.u, args.seed), _named_unitary(args.v, None if args.seed is None else args.seed + 1)
        norm = math.hypot(abs(args.alpha), abs(args.beta))
        return C.quantum_switch(U, V, 1, (args.alpha / norm, args.beta / norm))
    if name == "pbs":
        return C.pbs_circuit(1, [{(1, 0): 1.0}, {(0, 1): 1.0}, None, None])
    if name == "phase":
        return C.phase_fixture()
    if name == "identity":
        return C.identity_circuit()
    if name == "empty":
        return C.vacuum_circuit(3)
    if name == "bell-switch":
        bell = relabel(C.bell_circuit(), {1: 7, 2: 8, 3: 9, 4: 0})
        sw = C.quantum_switch(_named_unitary(args.u, args.seed), _named_unitary(args.v, args.seed), 1, None)
        return concatenate(bell, sw, [1], [0])
    raise AQCError(f"unknown circuit {name!r}")


def cmd_export(args) -> int:
    bundle = build_named(args.name, args)
    save_bundle(bundle, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aqc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="evolve a circuit file and dump states")
    r.add_argument("--circuit", required=True)
    r.add_argument("--steps", type=int, default=1)
    r.add_argument("--dump", action="store_true")
    r.add_argument("--at", type=int, nargs="*")
    r.add_argument("--landmarks", action="store_true")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="unitarity and nameblindness checks per gate")
    v.add_argument("--circuit", required=True)
    v.add_argument("--nameblind", action="store_true")
    v.add_argument("--exhaustive", action="store_true",
                   help="external adjacent transpositions on orbit-closed probes (the default)")
    v.add_argument("--full", action="store_true", help="enumerate every external renaming")
    v.add_argument("--unitary", action="store_true")
    v.add_argument("--probe-depth", type=int, default=12)
    v.set_defaults(func=cmd_verify)

    n = sub.add_parser("nameblind", help="generate or check nameblind matrices")
    nsub = n.add_subparsers(dest="action", required=True)
    g = nsub.add_parser("gen")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--pure", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    c = nsub.add_parser("check")
    c.add_argument("--matrix", required=True)
    c.add_argument("--mode", choices=["generators", "full"], default="generators")
    d = nsub.add_parser("commutant-dim")
    d.add_argument("--n", type=int, required=True)
    n.set_defaults(func=cmd_nameblind)

    cp = sub.add_parser("compose", help="connect circuits listed in a compose document")
    cp.add_argument("--spec", required=True)
    cp.add_argument("--out")
    cp.set_defaults(func=cmd_compose)

    q = sub.add_parser("qcgd", help="check the graph encoding against the circuit evolution")
    q.add_argument("--circuit", required=True)
    q.add_argument("--steps", type=int, default=1)
    q.add_argument("--dot")
    q.add_argument("--edges", action="store_true", help="print the last graph state as an edge list")
    q.set_defaults(func=cmd_qcgd)

    e = sub.add_parser("export", help="write a built-in circuit as a JSON document")
    e.add_argument("name", choices=["bell", "switch", "pbs", "phase", "identity", "empty", "bell-switch"])
    e.add_argument("--out", required=True)
    e.add_argument("--u", default="Y")
    e.add_argument("--v", default="Z")
    e.add_argument("--alpha", type=float, default=1.0)
    e.add_argument("--beta", type=float, default=1.0)
    e.add_argument("--seed", type=int)
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimit as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except AQCError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
