import pytest

from aqc.circuits import PAULI, bell_circuit, pbs_circuit, phase_fixture, quantum_switch
from aqc.core import AQCError
from aqc.qcgd import (check_equivalence, check_port_e, encode, encode_config, graph_distance, graph_step,
                      graph_transport, to_dot, to_edge_list)


def test_encoding_is_injective_on_bell_trace():
    b = bell_circuit()
    seen = {}
    for k in range(5):
        for conf in b.run(k).terms:
            g = encode_config(b.skeleton, conf)
            assert seen.setdefault(g, conf) == conf


def test_encoded_graphs_are_well_formed():
    sw = quantum_switch(PAULI["Y"], PAULI["Z"])
    for k in range(10):
        for g in encode(sw.skeleton, sw.run(k)):
            assert check_port_e(g)


def test_graph_transport_is_an_involution():
    sw = quantum_switch(PAULI["H"], PAULI["X"])
    g = encode(sw.skeleton, sw.run(3))
    assert graph_distance(graph_transport(graph_transport(g)), g) == 0


@pytest.mark.parametrize("factory,k", [(bell_circuit, 6), (lambda: quantum_switch(PAULI["Y"], PAULI["Z"]), 9),
                                       (lambda: pbs_circuit(1, [{(1, 0): 1.0}, {(0, 1): 1.0}, None, None]), 6),
                                       (phase_fixture, 4)])
def test_equivalence(factory, k):
    rep = check_equivalence(factory(), k)
    assert rep.ok and len(rep.distances) == k


def test_step_count_validated():
    with pytest.raises(AQCError):
        check_equivalence(bell_circuit(), 0)


def test_exports():
    b = bell_circuit()
    g = graph_step(encode(b), b.skeleton)
    text = to_edge_list(g)
    assert text.startswith("# amplitude") and "tau" in text
    dot = to_dot(g, b.skeleton)
    assert dot.startswith("graph aqc {") and dot.rstrip().endswith("}")
