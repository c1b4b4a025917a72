"""The worked circuits: Bell pair, quantum switch, polarizing beam splitter."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .core import AQCError, Configuration, Skeleton, SparseState, make_circuit_state, sector
from .evolution import run
from .operators import (Compose, DataUnitary, Flip, Identity, PhotonOverflow,
                        PolarizingBeamSplitter, RuleOperator, is_unitary, pbs_symbol,
                        parse_pbs_symbol, rule, switch_operator, switch_unit)

H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": H,
}


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random d x d unitary (QR of a Ginibre matrix with phase fix)."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class NonUnitaryInput(AQCError):
    pass


@dataclass
class CircuitBundle:
    skeleton: Skeleton
    initial: SparseState
    landmarks: list[dict] = field(default_factory=list)
    name: str = ""

    def run(self, k: int) -> SparseState:
        return run(self.skeleton, self.initial, k)


def bits(s: str) -> tuple[str, ...]:
    return tuple(s)


_REG_FIELD = {"T": 0, "WI": 1, "QI": 2, "WO": 3, "QO": 4}


def bell_circuit() -> CircuitBundle:
    ops = {
        (1,): Flip(),
        (2,): Compose(Flip(), DataUnitary(H, width=1, word_len=2)),
        (3,): Compose(Flip(), DataUnitary(CNOT, width=2, word_len=2)),
        (4,): Flip(),
    }
    sk = Skeleton((1, 2, 3, 4), ((1,), (2,), (3,), (4,)), ("0", "1"), 2, ops)
    psi0 = make_circuit_state(sk, {1: sector(T=2, QI=bits("00")), 2: sector(T=3), 3: sector(T=4)})
    r = 1 / math.sqrt(2)
    landmarks = [
        {"name": "bell pair in sector 4 output", "kind": "register", "step": 4, "sector": 4,
         "register": "QO", "expect": [[[r, 0.0], ["0", "0"]], [[r, 0.0], ["1", "1"]]]},
    ]
    return CircuitBundle(sk, SparseState.basis(sk.addresses, psi0), landmarks, "bell")


def _state_vector(psi, m: int) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if len(v) != 2 ** m:
        raise AQCError(f"payload state needs {2 ** m} amplitudes")
    if abs(np.linalg.norm(v) - 1) > 1e-12:
        raise AQCError("payload state is not normalized")
    return v


def switch_data(U, V, alpha, beta, psi, m: int) -> dict[tuple[str, ...], complex]:
    """Expected sector-6 data: alpha VU|psi>|0> + beta UV|psi>|1>."""
    U, V, psi = np.asarray(U, dtype=complex), np.asarray(V, dtype=complex), _state_vector(psi, m)
    words = ["".join(w) for w in product("01", repeat=m)]
    out: dict[tuple[str, ...], complex] = {}
    for c, amp, vec in (("0", alpha, V @ U @ psi), ("1", beta, U @ V @ psi)):
        for w, x in zip(words, vec):
            if abs(amp * x) > 0:
                out[tuple(w) + (c,)] = complex(amp * x)
    return out


def quantum_switch(U, V, m: int = 1, control: tuple[complex, complex] | None = (1 / math.sqrt(2), 1 / math.sqrt(2)),
                   psi=None) -> CircuitBundle:
    """Switch applying U, V in an order set by the control symbol.

    With ``control=None`` the data registers start empty (for composition).
    """
    U, V = np.asarray(U, dtype=complex), np.asarray(V, dtype=complex)
    for name, M in (("U", U), ("V", V)):
        if M.shape != (2 ** m, 2 ** m) or not is_unitary(M):
            raise NonUnitaryInput(f"{name} is not a {2 ** m}-dimensional unitary")
    ops = {(1,): Flip(), (2, 5): switch_operator(m), (3,): switch_unit(U, m),
           (4,): switch_unit(V, m), (6,): Flip()}
    sk = Skeleton((1, 2, 3, 4, 5, 6), ((1,), (2, 5), (3,), (4,), (6,)), ("0", "1"), m + 1, ops)
    if control is None:
        conf = make_circuit_state(sk, {1: sector(T=2), 2: sector(WO=(3, 4, 5)), 5: sector(T=6)})
        return CircuitBundle(sk, SparseState.basis(sk.addresses, conf), [], "switch")
    alpha, beta = complex(control[0]), complex(control[1])
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-12:
        raise NonUnitaryInput("control amplitudes are not normalized")
    psi = np.eye(2 ** m, dtype=complex)[0] if psi is None else _state_vector(psi, m)
    terms = []
    for w, x in zip(product("01", repeat=m), psi):
        for c, amp in (("0", alpha), ("1", beta)):
            if x * amp != 0:
                conf = make_circuit_state(sk, {1: sector(T=2, QI=w + (c,)), 2: sector(WO=(3, 4, 5)),
                                              5: sector(T=6)})
                terms.append((conf, x * amp))
    expected = switch_data(U, V, alpha, beta, psi, m)
    landmarks = [
        {"name": "payload reaches the router", "kind": "register", "step": 1, "sector": 2, "register": "QI",
         "expect": [[[a.real, a.imag], list(w[:-1]) + [w[-1]]] for w, a in
                    ((tuple(q) + (c,), x * amp) for q, x in zip(product("01", repeat=m), psi)
                     for c, amp in (("0", alpha), ("1", beta))) if abs(a) > 0]},
        {"name": "switched data in sector 6 input", "kind": "register", "step": 8, "sector": 6,
         "register": "QI", "expect": [[[a.real, a.imag], list(w)] for w, a in sorted(expected.items())]},
        {"name": "router and return sector restored", "kind": "restored", "step": 8, "sectors": [2, 5]},
    ]
    return CircuitBundle(sk, SparseState(sk.addresses, terms), landmarks, "switch")


def pbs_alphabet(m: int) -> tuple[str, ...]:
    return tuple(f"{v}V{h}H" for v in range(m + 1) for h in range(m + 1) if (v, h) != (0, 0))


def pbs_circuit(m: int, entries: Sequence[Mapping[tuple[int, int], complex] | None]) -> CircuitBundle:
    """``entries[k]`` is the data state fed at sector 5+k, as {(n_V, n_H): amplitude}."""
    if len(entries) != 4:
        raise AQCError("four entry states are required")
    ops = {(1, 2, 3, 4): PolarizingBeamSplitter(m), (5,): Flip(), (6,): Flip(), (7,): Flip(), (8,): Flip()}
    sk = Skeleton(tuple(range(1, 9)), ((1, 2, 3, 4), (5,), (6,), (7,), (8,)), pbs_alphabet(m), 1, ops)
    per_entry = []
    for e in entries:
        e = {(0, 0): 1.0} if not e else e
        for (v, h) in e:
            if v > m or h > m or v < 0 or h < 0:
                raise PhotonOverflow(f"photon counts {(v, h)} exceed {m}")
        per_entry.append([(pbs_symbol(v, h), complex(a)) for (v, h), a in sorted(e.items())])
    terms = []
    for combo in product(*per_entry):
        assign = {}
        amp = 1.0 + 0j
        for k, (word, a) in enumerate(combo):
            i = 5 + k
            assign[i] = sector(T=i - 4, QI=word)
            assign[i - 4] = sector(T=i)
            amp *= a
        terms.append((make_circuit_state(sk, assign), amp))
    return CircuitBundle(sk, SparseState(sk.addresses, terms).normalized(), [], "pbs")


def photon_number(config: Configuration) -> int:
    total = 0
    for s in config:
        for word in (s.in_data, s.out_data):
            counts = parse_pbs_symbol(word)
            if counts is None:
                raise AQCError(f"not a photon word: {word}")
            total += sum(counts)
    return total


def phase_fixture() -> CircuitBundle:
    """Gate {1} puts a sign on target 4 only; not nameblind by construction."""
    phase = RuleOperator([rule([{"T": [4], "QI": ["$q"]}], (-1.0, [{"T": [4], "QI": ["$q"]}]))])
    ops = {(1,): phase, (2,): Flip(), (3,): Flip(), (4,): Flip()}
    sk = Skeleton((1, 2, 3, 4), ((1,), (2,), (3,), (4,)), ("0", "1"), 1, ops)
    psi0 = make_circuit_state(sk, {1: sector(T=4, QI=("0",)), 2: sector(T=3)})
    return CircuitBundle(sk, SparseState.basis(sk.addresses, psi0), [], "phase")


def vacuum_circuit(n: int = 3, operator=None) -> CircuitBundle:
    """n flip sectors (or ``operator`` everywhere) in the vacuum state."""
    op = operator if operator is not None else Flip()
    addrs = tuple(range(1, n + 1))
    sk = Skeleton(addrs, tuple((a,) for a in addrs), ("0", "1"), 1, {(a,): op for a in addrs})
    return CircuitBundle(sk, SparseState.basis(addrs, sk.vacuum()), [], "vacuum")


def identity_circuit() -> CircuitBundle:
    sk = Skeleton((1, 2, 3), ((1, 2), (3,)), ("0", "1"), 2, {(1, 2): Identity(), (3,): Identity()})
    psi0 = make_circuit_state(sk, {1: sector(T=3, WI=(2,), QI=("0", "1"))})
    return CircuitBundle(sk, SparseState.basis(sk.addresses, psi0), [], "identity")


# --------------------------------------------------------------------------
# landmarks

def _split(state: SparseState, key):
    """Amplitude matrix indexed by ``key(conf) = (row, column)``."""
    rows: dict = {}
    cols: dict = {}
    entries = []
    for conf, amp in state.terms.items():
        r, c = key(conf)
        entries.append((rows.setdefault(r, len(rows)), cols.setdefault(c, len(cols)), amp))
    mat = np.zeros((len(rows), len(cols)), dtype=complex)
    for r, c, a in entries:
        mat[r, c] += a
    return list(rows), list(cols), mat


def schmidt_residual(state: SparseState, addresses: Sequence[int]) -> tuple[float, list]:
    """Distance of ``state`` from a product (selected sectors) ⊗ (rest).

    Returns the residual and the dominant configuration of the selected sectors.
    """
    positions = [state.addresses.index(a) for a in addresses]

    def key(conf):
        return (tuple(conf[p] for p in positions),
                tuple(s for i, s in enumerate(conf) if i not in positions))

    rows, _, mat = _split(state, key)
    if mat.size == 0:
        return 0.0, []
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    residual = float(math.sqrt(sum(x ** 2 for x in s[1:])))
    dominant = rows[int(np.argmax(np.abs(u[:, 0])))]
    return residual, list(dominant)


def register_state(state: SparseState, address: int, register: str) -> tuple[dict, float]:
    """Factor ``state`` as (register content) ⊗ (everything else).

    Returns the register vector and the Schmidt residual. When the rest is a
    single configuration the vector carries the exact amplitudes.
    """
    pos = state.addresses.index(address)
    f = _REG_FIELD[register]

    def key(conf):
        return conf[pos][f], conf[:pos] + (conf[pos]._replace(**{conf[pos]._fields[f]: ()}),) + conf[pos + 1:]

    rows, cols, mat = _split(state, key)
    if mat.size == 0:
        return {}, 0.0
    if len(cols) == 1:
        return {r: complex(mat[i, 0]) for i, r in enumerate(rows)}, 0.0
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    residual = float(math.sqrt(sum(x ** 2 for x in s[1:])))
    vec = u[:, 0] * s[0]
    return {r: complex(vec[i]) for i, r in enumerate(rows)}, residual


def _parse_expect(expect) -> dict:
    return {tuple(str(x) for x in word): complex(a[0], a[1]) for a, word in expect}


def evaluate_landmark(bundle: CircuitBundle, lm: dict, state: SparseState | None = None,
                      tol: float = 1e-9) -> dict:
    state = state if state is not None else bundle.run(lm["step"])
    if lm["kind"] == "register":
        got, residual = register_state(state, lm["sector"], lm["register"])
        want = _parse_expect(lm["expect"])
        keys = set(got) | set(want)
        if lm.get("global_phase"):
            overlap = sum(want.get(k, 0).conjugate() * got.get(k, 0) for k in keys)
            phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
        else:
            phase = 1.0
        err = max((abs(got.get(k, 0) - phase * want.get(k, 0)) for k in keys), default=0.0)
        return {"name": lm["name"], "step": lm["step"], "error": err, "residual": residual,
                "ok": err < tol and residual < tol}
    if lm["kind"] == "restored":
        residual, dominant = schmidt_residual(state, lm["sectors"])
        init_res, init_dom = schmidt_residual(bundle.initial, lm["sectors"])
        ok = residual < tol and init_res < tol and dominant == init_dom
        return {"name": lm["name"], "step": lm["step"], "residual": residual,
                "matches_initial": dominant == init_dom, "ok": ok}
    raise AQCError(f"unknown landmark kind {lm['kind']!r}")


def check_landmarks(bundle: CircuitBundle, tol: float = 1e-9) -> list[dict]:
    cache: dict[int, SparseState] = {}
    out = []
    for lm in sorted(bundle.landmarks, key=lambda x: x["step"]):
        k = lm["step"]
        if k not in cache:
            cache[k] = bundle.run(k)
        out.append(evaluate_landmark(bundle, lm, cache[k], tol))
    return out
