"""Acceptance criteria 1-11. Each test records one PASS/FAIL line.

Frame convention: "N steps" counts frames starting at the initial state,
so frame N is the state after N-1 applications of the step operator.
"""

import itertools
import math
import time

import numpy as np

from aqc import circuits as C
from aqc.cli import main
from aqc.composition import concatenate, relabel
from aqc.core import address_shapes, count_address_configs, enumerate_address_configs
from aqc.evolution import reachable_locals, run, trajectory
from aqc.nameblind import (WordBasis, analyse_blocks, commutant_basis, commutant_dimension,
                           nameblind_parameter_count, partial_parameter_count, random_pure_nameblind,
                           block_pattern_defect, transposition_matrix, is_nameblind)
from aqc.operators import PBS_H, PBS_V
from aqc.qcgd import check_equivalence
from aqc.renaming import Renaming

import test_properties

R = 1 / math.sqrt(2)


def frame(bundle, n):
    return run(bundle.skeleton, bundle.initial, n - 1)


def bell_switch(U=C.PAULI["Y"], V=C.PAULI["Z"]):
    bell = relabel(C.bell_circuit(), {1: 7, 2: 8, 3: 9, 4: 0})
    return concatenate(bell, C.quantum_switch(U, V, 1, None), [1], [0])


def register(bundle, state, address, field):
    pos = bundle.skeleton.addresses.index(address)
    out = {}
    for conf, amp in state.terms.items():
        out[conf[pos][field]] = out.get(conf[pos][field], 0) + amp
    return out


def test_1_bell(acceptance):
    t0 = time.perf_counter()
    b = C.bell_circuit()
    st = frame(b, 5)
    elapsed = time.perf_counter() - t0
    got = register(b, st, 4, 4)
    want = {("0", "0"): R, ("1", "1"): R}
    err = max(abs(got.get(k, 0) - want.get(k, 0)) for k in set(got) | set(want))
    fidelity = abs(sum(np.conj(want[k]) * got.get(k, 0) for k in want)) ** 2
    ok = len(st) == 2 and set(got) == set(want) and err < 1e-10 and fidelity >= 1 - 1e-10 and elapsed < 1
    acceptance.record(1, "Bell reproduction", ok, f"max err {err:.1e}, fidelity {fidelity:.12f}, {elapsed:.3f}s")
    assert ok


def test_2_quantum_switch(acceptance):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst_amp = worst_res = 0.0
    restored = True
    for _ in range(20):
        U, V = C.random_unitary(2, rng), C.random_unitary(2, rng)
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        alpha, beta = z / np.linalg.norm(z)
        psi = C.random_unitary(2, rng)[:, 0]
        sw = C.quantum_switch(U, V, 1, (alpha, beta), psi=psi)
        frames = trajectory(sw.skeleton, sw.initial, 9)
        want = C.switch_data(U, V, alpha, beta, psi, 1)
        for st, field in ((frames[8], 2), (frames[9], 4)):  # frame 9 in sector-6 input, then its output
            got = register(sw, st, 6, field)
            err = max(abs(got.get(k, 0) - want.get(k, 0)) for k in set(got) | set(want))
            worst_amp = max(worst_amp, err)
        res, dom = C.schmidt_residual(frames[8], [2, 5])
        _, init_dom = C.schmidt_residual(sw.initial, [2, 5])
        worst_res = max(worst_res, res)
        restored &= dom == init_dom
    elapsed = time.perf_counter() - t0
    ok = worst_amp < 1e-9 and worst_res < 1e-9 and restored and elapsed < 5
    acceptance.record(2, "quantum switch, 20 random instances", ok,
                      f"max amp err {worst_amp:.1e}, Schmidt residual {worst_res:.1e}, {elapsed:.2f}s")
    assert ok


def test_3_bell_switch_concatenation(acceptance):
    t0 = time.perf_counter()
    c = bell_switch()
    st = run(c.skeleton, c.initial, 11)
    elapsed = time.perf_counter() - t0
    got = register(c, st, 6, 2)
    want = {("1", "0"): R, ("0", "1"): -R}
    overlap = sum(np.conj(want[k]) * got.get(k, 0) for k in want)
    phase = overlap / abs(overlap)
    err = max(abs(got.get(k, 0) - phase * want.get(k, 0)) for k in set(got) | set(want))
    ok = err < 1e-9 and abs(abs(overlap) - 1) < 1e-9 and elapsed < 2
    acceptance.record(3, "Bell then switch concatenation", ok,
                      f"global phase {phase.real:+.3f}{phase.imag:+.3f}i, err {err:.1e}, {elapsed:.3f}s")
    assert ok


def test_4_pbs_routing(acceptance):
    t0 = time.perf_counter()
    ok = True
    routes = []
    for port in range(1, 5):
        for pol, table in (((1, 0), PBS_V), ((0, 1), PBS_H)):
            entries = [None] * 4
            entries[port - 1] = {pol: 1.0}
            p = C.pbs_circuit(1, entries)
            frames = trajectory(p.skeleton, p.initial, 2)
            ok &= all({C.photon_number(c) for c in s.terms} == {1} for s in frames)
            (conf, amp), = frames[2].terms.items()
            holders = [a for a, s in zip(p.skeleton.addresses, conf) if s.in_data or s.out_data]
            ok &= holders == [4 + table[port]] and abs(amp - 1) < 1e-12
            routes.append(f"{4 + port}{'V' if pol == (1, 0) else 'H'}->{holders}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 2
    acceptance.record(4, "PBS routing", ok, f"{len(routes)} routes, {elapsed:.3f}s")
    assert ok


def test_5_configuration_counting(acceptance):
    brute = all(len(enumerate_address_configs(range(1, n + 1))) == count_address_configs(n) for n in range(6))
    configs = enumerate_address_configs(range(1, 7))
    classes = {}
    for t, i, o in configs:
        classes.setdefault((len(t), len(i), len(o)), []).append((t, i, o))
    # every shape class is a single renaming orbit of size 6!
    orbit_ok = True
    for shape, members in classes.items():
        t, i, o = members[0]
        orbit = set()
        for perm in itertools.permutations(range(1, 7)):
            r = Renaming(dict(zip(range(1, 7), perm)))
            orbit.add((r.word(t), r.word(i), r.word(o)))
        orbit_ok &= orbit == set(members)
    ok = (count_address_configs(6) == 9360 and len(configs) == 9360 and brute
          and len(classes) == 13 == len(address_shapes(6)) and orbit_ok)
    acceptance.record(5, "configuration counting", ok,
                      f"count(6)={count_address_configs(6)}, shapes={len(classes)}")
    assert ok


def test_6_nameblind_constructors(acceptance):
    rng = np.random.default_rng(6)
    worst = 0.0
    for n in (2, 3, 4, 5):
        basis = WordBasis(n, range(1, n + 1))
        mode = "full" if n <= 4 else "generators"
        for _ in range(50):
            worst = max(worst, is_nameblind(random_pure_nameblind(n, rng), basis, mode).max_defect)
    trans_ok = True
    for n in range(2, 7):
        basis = WordBasis(n, range(1, n + 1))
        for k in range(1, n):
            swap = Renaming({**{a: a for a in range(1, n + 1)}, k: k + 1, k + 1: k})
            direct = np.zeros((len(basis), len(basis)))
            direct[basis.permutation(swap), np.arange(len(basis))] = 1
            trans_ok &= np.array_equal(transposition_matrix(n, k), direct)
    ok = worst < 1e-12 and trans_ok
    acceptance.record(6, "nameblind constructors", ok, f"max commutator {worst:.1e}, transpositions n<=6")
    assert ok


def test_7_commutant_completeness(acceptance):
    rng = np.random.default_rng(7)
    ok = True
    details = []
    worst = 0.0
    for n in (2, 3, 4):
        solved = len(commutant_basis(n))
        params = nameblind_parameter_count(n)
        ok &= solved == commutant_dimension(n) == params == partial_parameter_count(n, 0)
        basis = commutant_basis(n)
        N = math.factorial(n)
        X = ((rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))) @ basis).reshape(N, N)
        worst = max(worst, block_pattern_defect(X, n))
        details.append(f"n={n}: {solved}={params}")
    ok &= worst < 1e-10
    acceptance.record(7, "commutant completeness", ok, ", ".join(details) + f", block defect {worst:.1e}")
    assert ok


def test_8_gate_operator_decomposition(acceptance):
    sw = C.quantum_switch(C.PAULI["Y"], C.PAULI["Z"])
    g = (2, 5)
    probes = set()
    rng = np.random.default_rng(8)
    for _ in range(3):
        other = C.quantum_switch(C.random_unitary(2, rng), C.random_unitary(2, rng))
        probes |= reachable_locals(other.skeleton, other.initial, g, 12)
    external = [a for a in sw.skeleton.addresses if a not in g]
    reports = analyse_blocks(sw.skeleton.operators[g], probes, set(g), external)
    nb = max(r.nameblind_defect for r in reports)
    eq = max(max(r.equality_defect, r.off_diagonal) for r in reports)
    ok = bool(reports) and nb < 1e-12 and eq < 1e-12
    acceptance.record(8, "switch gate-operator decomposition", ok,
                      f"{len(reports)} blocks, nameblind defect {nb:.1e}, block equality {eq:.1e}")
    assert ok


def test_9_nameblind_builtins(acceptance, tmp_path, capsys):
    codes = {}
    for name in ("bell", "switch", "pbs", "phase"):
        path = tmp_path / f"{name}.json"
        main(["export", name, "--out", str(path)])
        codes[name] = main(["verify", "--circuit", str(path), "--nameblind", "--exhaustive"])
    capsys.readouterr()
    ok = codes == {"bell": 0, "switch": 0, "pbs": 0, "phase": 2}
    acceptance.record(9, "nameblindness of built-ins", ok, ", ".join(f"{k}={v}" for k, v in codes.items()))
    assert ok


def test_10_qcgd_equivalence(acceptance):
    t0 = time.perf_counter()
    results = {
        "bell": check_equivalence(C.bell_circuit(), 6),
        "switch": check_equivalence(C.quantum_switch(C.PAULI["Y"], C.PAULI["Z"]), 9),
        "bell+switch": check_equivalence(bell_switch(), 14),
    }
    elapsed = time.perf_counter() - t0
    worst = max(r.max_distance for r in results.values())
    ok = all(r.ok for r in results.values()) and worst < 1e-10 and elapsed < 30
    acceptance.record(10, "QCGD equivalence", ok, f"max distance {worst:.1e}, {elapsed:.2f}s")
    assert ok


def test_11_structural_properties(acceptance):
    checks = [test_properties.test_transport_is_an_involution, test_properties.test_norm_conserved_over_20_steps,
              test_properties.test_address_multiset_conserved, test_properties.test_global_uniqueness_preserved]
    failures = []
    for check in checks:
        try:
            check()
        except Exception as e:  # hypothesis re-raises the falsifying example
            failures.append(f"{check.__name__}: {type(e).__name__}")
    ok = not failures
    acceptance.record(11, "structural properties on 1000 random circuits each", ok,
                      "; ".join(failures) if failures else "4 properties")
    assert ok
