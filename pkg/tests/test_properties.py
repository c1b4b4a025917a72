"""Structural invariants on randomized small circuits."""

from hypothesis import HealthCheck, given, settings

from aqc.core import address_multiset, validate_configuration
from aqc.evolution import run, step, transport

from strategies import small_circuits

SETTINGS = settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@SETTINGS
@given(small_circuits())
def test_transport_is_an_involution(case):
    _, state = case
    assert transport(transport(state)) == state


@SETTINGS
@given(small_circuits())
def test_norm_conserved_over_20_steps(case):
    sk, state = case
    for _ in range(20):
        state = step(sk, state)
        assert abs(state.norm() - 1.0) < 1e-9


@SETTINGS
@given(small_circuits())
def test_address_multiset_conserved(case):
    sk, state = case
    allowed = {address_multiset(c) for c in state.terms}
    for k in range(1, 9):
        later = run(sk, state, k)
        assert {address_multiset(c) for c in later.terms} <= allowed


@SETTINGS
@given(small_circuits())
def test_global_uniqueness_preserved(case):
    sk, state = case
    for _ in range(8):
        state = step(sk, state, validate=False)
        for c in state.terms:
            validate_configuration(c, sk.addresses, sk)
