import math

import pytest

from aqc.circuits import PAULI, bell_circuit, quantum_switch
from aqc.composition import (AddressClash, NotABuffer, OverlapError, SizeMismatch, concatenate, connect,
                             detect_buffers, parallel, relabel, same_circuit, trivial_circuit)
from aqc.core import AQCError


def bell_switch():
    bell = relabel(bell_circuit(), {1: 7, 2: 8, 3: 9, 4: 0})
    sw = quantum_switch(PAULI["Y"], PAULI["Z"], 1, None)
    return concatenate(bell, sw, [1], [0])


def test_buffers_of_builtins():
    b = detect_buffers(bell_circuit())
    assert b.ingoing == frozenset({1}) and b.outgoing == frozenset({4})
    s = detect_buffers(quantum_switch(PAULI["Y"], PAULI["Z"], 1, None))
    assert 1 in s.ingoing and 6 in s.outgoing


def test_trivial_circuit_is_both_buffers():
    b = detect_buffers(trivial_circuit(3))
    assert b.ingoing == b.outgoing == frozenset({3})


def test_relabel_moves_everything():
    moved = relabel(bell_circuit(), {1: 11, 2: 12, 3: 13, 4: 14})
    assert moved.skeleton.addresses == (11, 12, 13, 14)
    back = relabel(moved, {11: 1, 12: 2, 13: 3, 14: 4})
    assert same_circuit(back, bell_circuit())


def test_relabel_rejects_non_injective():
    with pytest.raises(AQCError):
        relabel(bell_circuit(), {1: 2})


def test_relabel_rejects_reordering_a_pair_gate():
    sw = quantum_switch(PAULI["Y"], PAULI["Z"])
    with pytest.raises(AQCError):
        relabel(sw, {2: 5, 5: 2})


def test_parallel_runs_independently():
    a = bell_circuit()
    b = relabel(bell_circuit(), {1: 5, 2: 6, 3: 7, 4: 8})
    both = parallel(a, b)
    st = both.run(4)
    assert len(st) == 4 and abs(st.norm() - 1) < 1e-12


def test_connect_errors():
    a, b = bell_circuit(), bell_circuit()
    with pytest.raises(AddressClash):
        parallel(a, b)
    c = relabel(b, {1: 5, 2: 6, 3: 7, 4: 8})
    with pytest.raises(SizeMismatch):
        connect([1], [], [a, c])
    with pytest.raises(OverlapError):
        connect([4], [4], [a, c])
    with pytest.raises(NotABuffer):
        connect([6], [4], [a, c])


def test_bell_switch_final_state():
    c = bell_switch()
    st = c.run(11)
    got = {}
    pos = c.skeleton.addresses.index(6)
    for conf, amp in st.terms.items():
        got[conf[pos].in_data] = amp
    r = 1 / math.sqrt(2)
    # (|10> - |01>)/sqrt2 up to a global phase; here the phase is -i
    want = {("1", "0"): r, ("0", "1"): -r}
    phase = got[("1", "0")] / want[("1", "0")]
    assert abs(abs(phase) - 1) < 1e-9
    assert set(got) == set(want)
    assert all(abs(got[k] - phase * want[k]) < 1e-9 for k in want)


def test_concatenate_checks_sides():
    bell = relabel(bell_circuit(), {1: 7, 2: 8, 3: 9, 4: 0})
    sw = quantum_switch(PAULI["Y"], PAULI["Z"], 1, None)
    with pytest.raises(NotABuffer):
        concatenate(sw, bell, [1], [0])
