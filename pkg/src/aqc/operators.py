"""Gate operators: address-agnostic unitaries acting on a gate's sectors.

An operator sees a *local* state: the tuple of sector basis states of its
gate, in ascending address order ("slots"). ``apply`` returns the image as a
list of (amplitude, local state) pairs. Unmatched inputs map to themselves.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np

from .core import EPS, AQCError, Sector

Local = tuple[Sector, ...]
Image = list[tuple[complex, Local]]

_FIELDS = {"T": 0, "WI": 1, "QI": 2, "WO": 3, "QO": 4}


class NonUnitaryRule(AQCError):
    pass


class RuleError(AQCError):
    pass


class GateOperator:
    """Base class. Subclasses implement ``apply`` and ``to_spec``."""

    def apply(self, local: Local) -> Image:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def relabel(self, mapping: dict[int, int]) -> "GateOperator":
        """Rename literal addresses held by the operator (most hold none)."""
        return self

    def literal_addresses(self) -> set[int]:
        return set()

    def __eq__(self, other) -> bool:
        return isinstance(other, GateOperator) and self.to_spec() == other.to_spec()

    def __hash__(self) -> int:
        return hash(repr(self.to_spec()))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_spec()})"


class Identity(GateOperator):
    def apply(self, local):
        return [(1.0, local)]

    def to_spec(self):
        return {"builtin": "identity"}


class Flip(GateOperator):
    """Swap input and output spaces of every slot (addresses and data)."""

    def apply(self, local):
        return [(1.0, tuple(s.flip() for s in local))]

    def to_spec(self):
        return {"builtin": "flip"}


class FlipData(GateOperator):
    """Swap only the data registers of every slot."""

    def apply(self, local):
        return [(1.0, tuple(Sector(s.target, s.in_addr, s.out_data, s.out_addr, s.in_data) for s in local))]

    def to_spec(self):
        return {"builtin": "flip_data"}


def flip_full() -> GateOperator:
    return Flip()


def flip_data() -> GateOperator:
    return FlipData()


def _as_matrix(u) -> np.ndarray:
    m = np.asarray(u, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise AQCError("expected a square matrix")
    return m


def is_unitary(u, tol: float = 1e-12) -> bool:
    m = _as_matrix(u)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(len(m)))) < tol)


class DataUnitary(GateOperator):
    """Apply ``matrix`` to the first ``width`` symbols of one data register.

    Fires only when the register word has length ``word_len`` (if given) and
    its first ``width`` symbols are in ``symbols``; identity otherwise.
    """

    def __init__(self, matrix, width: int, symbols: Sequence[str] = ("0", "1"),
                 word_len: int | None = None, slot: int = 0, register: str = "QI"):
        self.matrix = _as_matrix(matrix)
        self.width = int(width)
        self.symbols = tuple(symbols)
        self.word_len = word_len
        self.slot = slot
        self.register = register
        d = len(self.symbols)
        if self.matrix.shape[0] != d ** self.width:
            raise AQCError("matrix size does not match symbols**width")
        if not is_unitary(self.matrix):
            raise AQCError("data matrix is not unitary")
        if register not in ("QI", "QO"):
            raise AQCError("data unitaries act on QI or QO")
        self._basis = list(itertools.product(self.symbols, repeat=self.width))
        self._index = {w: i for i, w in enumerate(self._basis)}

    def apply(self, local):
        field_ix = _FIELDS[self.register]
        s = local[self.slot]
        word = s[field_ix]
        if self.word_len is not None and len(word) != self.word_len:
            return [(1.0, local)]
        if len(word) < self.width:
            return [(1.0, local)]
        head, tail = word[: self.width], word[self.width:]
        col = self._index.get(head)
        if col is None:
            return [(1.0, local)]
        out = []
        for row, amp in enumerate(self.matrix[:, col]):
            if amp != 0:
                new = list(s)
                new[field_ix] = self._basis[row] + tail
                out.append((complex(amp), local[: self.slot] + (Sector(*new),) + local[self.slot + 1:]))
        return out

    def to_spec(self):
        return {"builtin": "data_unitary",
                "params": {"matrix": matrix_to_json(self.matrix), "width": self.width,
                           "symbols": list(self.symbols), "word_len": self.word_len,
                           "slot": self.slot, "register": self.register}}


class Compose(GateOperator):
    """Product ``ops[0] · ops[1] · …``: the last operator acts first."""

    def __init__(self, *ops: GateOperator):
        if not ops:
            raise AQCError("empty product")
        self.ops = tuple(ops)

    def apply(self, local):
        current: dict[Local, complex] = {local: 1.0}
        for op in reversed(self.ops):
            nxt: dict[Local, complex] = {}
            for loc, amp in current.items():
                for a, out in op.apply(loc):
                    nxt[out] = nxt.get(out, 0j) + amp * a
            current = {k: v for k, v in nxt.items() if abs(v) >= 1e-15}
        return [(v, k) for k, v in current.items()]

    def to_spec(self):
        return {"builtin": "compose", "params": {"ops": [op.to_spec() for op in self.ops]}}

    def relabel(self, mapping):
        return Compose(*(op.relabel(mapping) for op in self.ops))

    def literal_addresses(self):
        return set().union(*(op.literal_addresses() for op in self.ops))


# --------------------------------------------------------------------------
# rule patterns

def _is_var(tok) -> bool:
    return isinstance(tok, str) and tok[:1] in ("$", "*") and len(tok) > 1


class Pattern:
    """Per-slot register token lists. Missing registers are epsilon."""

    def __init__(self, slots: Sequence[dict]):
        self.slots = tuple({r: tuple(toks) for r, toks in slot.items() if toks} for slot in slots)
        for slot in self.slots:
            for reg, toks in slot.items():
                if reg not in _FIELDS:
                    raise RuleError(f"unknown register {reg!r}")
                if sum(1 for t in toks if isinstance(t, str) and t.startswith("*")) > 1:
                    raise RuleError(f"more than one word variable in register {reg}")
                for t in toks:
                    if reg in ("T", "WI", "WO"):
                        if not (isinstance(t, int) or _is_var(t)):
                            raise RuleError(f"address register {reg} holds data literal {t!r}")
                    elif not isinstance(t, str):
                        raise RuleError(f"data register {reg} holds address literal {t!r}")
                if reg == "T" and len(toks) > 1:
                    raise RuleError("target pattern longer than one letter")

    def variables(self) -> dict[str, str]:
        """variable name -> kind ('addr' or 'data')."""
        kinds: dict[str, str] = {}
        for slot in self.slots:
            for reg, toks in slot.items():
                kind = "data" if reg in ("QI", "QO") else "addr"
                for t in toks:
                    if _is_var(t):
                        if kinds.setdefault(t[1:], kind) != kind:
                            raise RuleError(f"variable {t[1:]!r} used for addresses and data")
        return kinds

    def address_tokens(self) -> list:
        return sorted((repr(t) for slot in self.slots for reg, toks in slot.items()
                       if reg in ("T", "WI", "WO") for t in toks))

    def match(self, local: Local) -> dict | None:
        if len(local) != len(self.slots):
            return None
        env: dict = {}
        for slot, s in zip(self.slots, local):
            for reg, ix in _FIELDS.items():
                if not _match_register(slot.get(reg, ()), s[ix], env):
                    return None
        return env

    def instantiate(self, env: dict) -> Local:
        out = []
        for slot in self.slots:
            regs = [EPS] * 5
            for reg, toks in slot.items():
                word: list = []
                for t in toks:
                    if isinstance(t, str) and t.startswith("*") and len(t) > 1:
                        word.extend(env[t[1:]])
                    elif isinstance(t, str) and t.startswith("$") and len(t) > 1:
                        word.append(env[t[1:]])
                    else:
                        word.append(t)
                regs[_FIELDS[reg]] = tuple(word)
            out.append(Sector(*regs))
        return tuple(out)

    def rename(self, mapping: dict[int, int]) -> "Pattern":
        return Pattern([{r: [mapping.get(t, t) if isinstance(t, int) else t for t in toks]
                         for r, toks in slot.items()} for slot in self.slots])

    def literals(self) -> set[int]:
        return {t for slot in self.slots for toks in slot.values() for t in toks if isinstance(t, int)}

    def to_json(self) -> list:
        return [{r: list(toks) for r, toks in slot.items()} for slot in self.slots]


def _bind(env: dict, name: str, value) -> bool:
    if name in env:
        return env[name] == value
    env[name] = value
    return True


def _match_register(tokens: tuple, value: tuple, env: dict) -> bool:
    star = next((i for i, t in enumerate(tokens) if isinstance(t, str) and t.startswith("*") and len(t) > 1), None)
    if star is None:
        if len(tokens) != len(value):
            return False
        pairs = zip(tokens, value)
        rest = None
    else:
        pre, post = tokens[:star], tokens[star + 1:]
        if len(pre) + len(post) > len(value):
            return False
        end = len(value) - len(post)
        pairs = list(zip(pre, value[: len(pre)])) + list(zip(post, value[end:]))
        rest = (tokens[star][1:], value[len(pre): end])
    for tok, v in pairs:
        if isinstance(tok, str) and tok.startswith("$") and len(tok) > 1:
            if not _bind(env, tok[1:], v):
                return False
        elif tok != v:
            return False
    if rest is not None and not _bind(env, rest[0], tuple(rest[1])):
        return False
    return True


class Rule:
    def __init__(self, match: Pattern, outputs: Sequence[tuple[complex, Pattern]]):
        self.match = match
        self.outputs = tuple((complex(a), p) for a, p in outputs)
        kinds = match.variables()
        for _, p in self.outputs:
            for name, kind in p.variables().items():
                if kinds.get(name) != kind:
                    raise RuleError(f"output variable {name!r} is not bound by the input pattern")
            if len(p.slots) != len(match.slots):
                raise RuleError("output pattern arity differs from input pattern")

    def preserves_addresses(self) -> bool:
        ref = self.match.address_tokens()
        return all(p.address_tokens() == ref for _, p in self.outputs)

    def rename(self, mapping):
        return Rule(self.match.rename(mapping), [(a, p.rename(mapping)) for a, p in self.outputs])


class RuleOperator(GateOperator):
    """First-match-wins rule list, identity on unmatched states.

    ``builtin`` records a (name, params) pair when the rules were generated
    by a named constructor, so documents stay compact.
    """

    def __init__(self, rules: Iterable[Rule], builtin: tuple[str, dict] | None = None):
        self.rules = tuple(rules)
        self.builtin = builtin

    def matching_rules(self, local: Local) -> list[tuple[int, dict]]:
        return [(i, env) for i, r in enumerate(self.rules) if (env := r.match.match(local)) is not None]

    def apply(self, local):
        for rule in self.rules:
            env = rule.match.match(local)
            if env is not None:
                acc: dict[Local, complex] = {}
                for amp, pat in rule.outputs:
                    out = pat.instantiate(env)
                    acc[out] = acc.get(out, 0j) + amp
                return [(a, o) for o, a in acc.items()]
        return [(1.0, local)]

    def to_spec(self):
        if self.builtin is not None:
            return {"builtin": self.builtin[0], "params": self.builtin[1]}
        return {"rules": [{"match": r.match.to_json(),
                           "out": [[[a.real, a.imag], p.to_json()] for a, p in r.outputs]}
                          for r in self.rules]}

    def relabel(self, mapping):
        if not self.literal_addresses() & set(mapping):
            return self
        return RuleOperator([r.rename(mapping) for r in self.rules])

    def literal_addresses(self):
        out: set[int] = set()
        for r in self.rules:
            out |= r.match.literals()
            for _, p in r.outputs:
                out |= p.literals()
        return out


def rule(match: Sequence[dict], *outputs: tuple[complex, Sequence[dict]]) -> Rule:
    return Rule(Pattern(match), [(a, Pattern(p)) for a, p in outputs])


def involution_rules(pairs: Iterable[tuple[Sequence[dict], Sequence[dict]]]) -> list[Rule]:
    """Each pair (x, y) yields x -> y and its reciprocal y -> x."""
    out = []
    for x, y in pairs:
        out.append(rule(x, (1.0, y)))
        out.append(rule(y, (1.0, x)))
    return out


class MatrixOperator(GateOperator):
    """Explicit matrix over an enumerated list of local basis states."""

    def __init__(self, basis: Sequence[Local], matrix):
        self.basis = tuple(tuple(loc) for loc in basis)
        self.matrix = _as_matrix(matrix)
        if len(self.basis) != len(self.matrix):
            raise AQCError("basis size does not match matrix")
        if len(set(self.basis)) != len(self.basis):
            raise AQCError("repeated basis state")
        self._index = {b: i for i, b in enumerate(self.basis)}

    def apply(self, local):
        col = self._index.get(local)
        if col is None:
            return [(1.0, local)]
        return [(complex(a), self.basis[r]) for r, a in enumerate(self.matrix[:, col]) if a != 0]

    def to_spec(self):
        from .io import local_to_json
        entries = [[int(r), int(c), [float(v.real), float(v.imag)]]
                   for (r, c), v in np.ndenumerate(self.matrix) if v != 0]
        return {"matrix": {"basis": [local_to_json(b) for b in self.basis], "entries": entries}}

    def relabel(self, mapping):
        def ren(w):
            return tuple(mapping.get(a, a) for a in w)
        basis = [tuple(Sector(ren(s.target), ren(s.in_addr), s.in_data, ren(s.out_addr), s.out_data)
                       for s in loc) for loc in self.basis]
        return MatrixOperator(basis, self.matrix)

    def literal_addresses(self):
        return {a for loc in self.basis for s in loc for a in s.addresses()}


# --------------------------------------------------------------------------
# named constructors

def m34_operator() -> RuleOperator:
    """|t>_T |w>_WO |q>_QO  <->  |eps>_T |t w>_WI |q>_QI, for non-empty q."""
    x = [{"T": ["$t"], "WO": ["*w"], "QO": ["$q0", "*q"]}]
    y = [{"WI": ["$t", "*w"], "QI": ["$q0", "*q"]}]
    return RuleOperator(involution_rules([(x, y)]), builtin=("m34", {}))


def switch_operator(m: int) -> RuleOperator:
    """The two-sector switch gate; slot 0 is the router, slot 1 the return sector.

    Data words carry m payload symbols followed by one control symbol.
    """
    q = [f"$q{i}" for i in range(m)]
    pairs = []
    for c in ("0", "1"):
        # router receives payload: route toward the first or second unit
        first, second = ("$t", "$a") if c == "0" else ("$a", "$t")
        pairs.append((
            [{"WO": ["$t", "$a", "*w"], "QI": q + [c]}, {"T": ["$b"]}],
            [{"T": [first], "WO": [second, "*w"], "QO": q + [c]}, {"T": ["$b"]}],
        ))
    pairs.append((
        [{"T": ["$b"]}, {"T": ["$t"], "QI": q + ["$c"]}],
        [{"T": ["$b"]}, {"WO": ["$t"], "QI": ["$c"], "QO": q}],
    ))
    for c in ("0", "1"):
        word = ["$t", "$b", "*w"] if c == "0" else ["$b", "$t", "*w"]
        pairs.append((
            [{"T": ["$t"], "WO": ["$b", "*w"], "QO": [c]}, {"WO": ["$a"], "QO": q}],
            [{"WO": word}, {"T": ["$a"], "QO": q + [c]}],
        ))
    return RuleOperator(involution_rules(pairs), builtin=("switch", {"m": m}))


def switch_unit(u, m: int) -> GateOperator:
    """M34 · L_U: apply U to the payload of an (m+1)-symbol input word, then fold."""
    return Compose(m34_operator(), DataUnitary(u, width=m, word_len=m + 1))


PBS_V = {1: 2, 2: 1, 3: 4, 4: 3}
PBS_H = {1: 3, 3: 1, 2: 4, 4: 2}


def pbs_symbol(nv: int, nh: int) -> tuple[str, ...]:
    return () if nv == 0 and nh == 0 else (f"{nv}V{nh}H",)


def parse_pbs_symbol(word: tuple[str, ...]) -> tuple[int, int] | None:
    if word == ():
        return (0, 0)
    if len(word) != 1:
        return None
    sym = word[0]
    try:
        v, h = sym.rstrip("H").split("V")
        return int(v), int(h)
    except ValueError:
        return None


class PhotonOverflow(AQCError):
    pass


class PolarizingBeamSplitter(GateOperator):
    """Four-slot router on photon counts; vertical counts follow PBS_V, horizontal PBS_H.

    Acts on data registers only. When every output is vacuum the inputs are
    routed to outputs; when every input is vacuum (and some output is not)
    the reciprocal map applies. Anything else is left alone.
    """

    def __init__(self, m: int):
        self.m = int(m)

    def _counts(self, local, ix):
        counts = [parse_pbs_symbol(s[ix]) for s in local]
        if any(c is None for c in counts):
            return None
        if any(v > self.m or h > self.m for v, h in counts):
            raise PhotonOverflow(f"photon count above {self.m}")
        return counts

    def apply(self, local):
        if len(local) != 4:
            raise AQCError("the beam splitter acts on four sectors")
        ins, outs = self._counts(local, 2), self._counts(local, 4)
        if ins is None or outs is None:
            return [(1.0, local)]
        if all(c == (0, 0) for c in outs):
            src, to_out = ins, True
        elif all(c == (0, 0) for c in ins):
            src, to_out = outs, False
        else:
            return [(1.0, local)]
        new = []
        for i, s in enumerate(local, start=1):
            word = pbs_symbol(src[PBS_V[i] - 1][0], src[PBS_H[i] - 1][1])
            if to_out:
                new.append(Sector(s.target, s.in_addr, (), s.out_addr, word))
            else:
                new.append(Sector(s.target, s.in_addr, word, s.out_addr, ()))
        return [(1.0, tuple(new))]

    def to_spec(self):
        return {"builtin": "pbs", "params": {"m": self.m}}


def matrix_to_json(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def operator_from_spec(spec: dict) -> GateOperator:
    if "rules" in spec:
        rules = []
        for r in spec["rules"]:
            outs = [(complex(a[0], a[1]), Pattern(p)) for a, p in r["out"]]
            rules.append(Rule(Pattern(r["match"]), outs))
        return RuleOperator(rules)
    if "matrix" in spec:
        from .io import local_from_json
        basis = [local_from_json(b) for b in spec["matrix"]["basis"]]
        mat = np.zeros((len(basis), len(basis)), dtype=complex)
        for r, c, (re, im) in spec["matrix"]["entries"]:
            mat[r, c] = complex(re, im)
        return MatrixOperator(basis, mat)
    name = spec.get("builtin")
    params = spec.get("params", {}) or {}
    if name == "identity":
        return Identity()
    if name == "flip":
        return Flip()
    if name == "flip_data":
        return FlipData()
    if name == "data_unitary":
        p = dict(params)
        p["matrix"] = matrix_from_json(p["matrix"])
        return DataUnitary(**p)
    if name == "compose":
        return Compose(*(operator_from_spec(s) for s in params["ops"]))
    if name == "m34":
        return m34_operator()
    if name == "switch":
        return switch_operator(int(params["m"]))
    if name == "pbs":
        return PolarizingBeamSplitter(int(params["m"]))
    raise AQCError(f"unknown operator spec {spec!r}")
