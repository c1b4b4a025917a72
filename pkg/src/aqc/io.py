"""JSON circuit documents and canonical text dumps."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .circuits import CircuitBundle
from .core import AQCError, Configuration, Sector, Skeleton, SparseState, make_circuit_state
from .operators import operator_from_spec

REGS = ("T", "WI", "QI", "WO", "QO")


class DocumentError(AQCError):
    """A circuit document failed to parse; ``where`` locates the problem."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def word_to_text(word) -> str:
    return " ".join(str(x) for x in word)


def _parse_word(text, address: bool, where: str) -> tuple:
    if isinstance(text, list):
        toks = [str(t) for t in text]
    elif isinstance(text, (str, int)):
        toks = str(text).split()
    else:
        raise DocumentError(where, f"register value {text!r} is neither a string nor a list")
    if address:
        try:
            return tuple(int(t) for t in toks)
        except ValueError:
            raise DocumentError(where, f"non-integer address in {text!r}") from None
    return tuple(toks)


def sector_to_json(s: Sector) -> dict:
    return {reg: word_to_text(val) for reg, val in zip(REGS, s) if val}


def sector_from_json(d: dict, where: str = "sector") -> Sector:
    unknown = set(d) - set(REGS)
    if unknown:
        raise DocumentError(where, f"unknown registers {sorted(unknown)}")
    vals = [_parse_word(d.get(reg, ""), reg in ("T", "WI", "WO"), f"{where}.{reg}") for reg in REGS]
    return Sector(*vals)


def local_to_json(local) -> list:
    return [sector_to_json(s) for s in local]


def local_from_json(items) -> tuple:
    return tuple(sector_from_json(d, f"basis[{i}]") for i, d in enumerate(items))


def bundle_to_document(c: CircuitBundle) -> dict:
    sk = c.skeleton
    doc: dict[str, Any] = {
        "addresses": list(sk.addresses),
        "gates": [list(g) for g in sk.gates],
        "data_alphabet": list(sk.data_alphabet),
        "max_data_len": sk.max_data_len,
        "operators": [{"gate": list(g), **sk.operators[g].to_spec()} for g in sk.gates],
        "initial_state": [],
    }
    for conf, amp in c.initial.terms.items():
        sectors = {str(a): sector_to_json(s) for a, s in zip(sk.addresses, conf) if any(s)}
        doc["initial_state"].append({"amplitude": [amp.real, amp.imag], "sectors": sectors})
    if c.landmarks:
        doc["landmarks"] = c.landmarks
    if c.name:
        doc["name"] = c.name
    return doc


def document_to_bundle(doc: dict) -> CircuitBundle:
    for key in ("addresses", "gates", "data_alphabet", "max_data_len", "operators", "initial_state"):
        if key not in doc:
            raise DocumentError("document", f"missing field {key!r}")
    ops = {}
    for i, spec in enumerate(doc["operators"]):
        where = f"operators[{i}]"
        if "gate" not in spec:
            raise DocumentError(where, "missing 'gate'")
        body = {k: v for k, v in spec.items() if k != "gate"}
        try:
            ops[tuple(sorted(int(a) for a in spec["gate"]))] = operator_from_spec(body)
        except (AQCError, KeyError, TypeError, ValueError) as e:
            raise DocumentError(where, str(e)) from None
    try:
        sk = Skeleton(tuple(doc["addresses"]), tuple(tuple(g) for g in doc["gates"]),
                      tuple(str(x) for x in doc["data_alphabet"]), int(doc["max_data_len"]), ops)
    except AQCError as e:
        raise DocumentError("skeleton", str(e)) from None
    terms = []
    for i, term in enumerate(doc["initial_state"]):
        where = f"initial_state[{i}]"
        try:
            re, im = term["amplitude"]
            assign = {int(a): sector_from_json(s, f"{where}.sectors[{a}]") for a, s in term.get("sectors", {}).items()}
            terms.append((make_circuit_state(sk, assign), complex(re, im)))
        except DocumentError:
            raise
        except (AQCError, KeyError, TypeError, ValueError) as e:
            raise DocumentError(where, str(e)) from None
    if not terms:
        raise DocumentError("initial_state", "no terms")
    state = SparseState(sk.addresses, terms)
    if abs(state.norm() - 1) > 1e-9:
        raise DocumentError("initial_state", f"norm {state.norm()} is not 1")
    return CircuitBundle(sk, state, list(doc.get("landmarks", [])), doc.get("name", ""))


def load_bundle(path: str | Path) -> CircuitBundle:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise DocumentError(str(path), e.strerror or str(e)) from None
    except json.JSONDecodeError as e:
        raise DocumentError(f"{path}:{e.lineno}:{e.colno}", e.msg) from None
    return document_to_bundle(doc)


def save_bundle(c: CircuitBundle, path: str | Path) -> None:
    Path(path).write_text(json.dumps(bundle_to_document(c), indent=1) + "\n")


def _fmt(x: float) -> str:
    return repr(0.0 if x == 0 else float(x))


def dump_configuration(addresses, conf: Configuration) -> str:
    parts = []
    for a, s in zip(addresses, conf):
        regs = " ".join(f"{reg}={','.join(str(x) for x in val)}" for reg, val in zip(REGS, s))
        parts.append(f"{a}[{regs}]")
    return " ".join(parts)


def dump_state(state: SparseState) -> str:
    lines = []
    for conf, amp in state.terms.items():
        lines.append(f"{_fmt(amp.real)} {_fmt(amp.imag)} | {dump_configuration(state.addresses, conf)}")
    return "\n".join(lines) + "\n"
