import itertools
import math

import numpy as np
import pytest

from aqc.nameblind import (EXT, DimensionMismatch, EmptyBlock, ResourceLimit, WordBasis, build_nameblind,
                           build_pure_nameblind, commutant_basis, commutant_dimension, commutant_dimension_dense,
                           dump_matrix, extend_mn_nameblind, indicator, is_nameblind, is_partially_nameblind,
                           load_matrix, nameblind_parameter_count, partial_parameter_count, partially_from_params,
                           pure_parameter_count, random_nameblind, random_partially_nameblind,
                           random_pure_nameblind, renaming_permutation_matrix, block_pattern_defect,
                           transposition_matrix, u_pm, decompose_gate_operator)
from aqc.operators import m34_operator
from aqc.core import Sector
from aqc.renaming import Renaming, adjacent_transposition


def direct_permutation(n, k):
    """Oracle: act on lex words of 1..n by swapping letters k and k+1."""
    words = list(itertools.permutations(range(1, n + 1)))
    idx = {w: i for i, w in enumerate(words)}
    swap = {k: k + 1, k + 1: k}
    P = np.zeros((len(words), len(words)))
    for j, w in enumerate(words):
        P[idx[tuple(swap.get(a, a) for a in w)], j] = 1
    return P


@pytest.mark.parametrize("n", range(2, 7))
def test_transposition_matrix_matches_direct_action(n):
    for k in range(1, n):
        assert np.array_equal(transposition_matrix(n, k), direct_permutation(n, k))


def test_word_basis_orders():
    b = WordBasis(2, (1, 2, 3), "set-lex")
    assert b.words[:2] == [(1, 2), (2, 1)]
    assert b.words[2:4] == [(1, 3), (3, 1)]
    assert indicator((2, 3), (1, 2, 3)) == 6
    assert len(WordBasis(2, range(1, 5))) == 12


def test_renaming_matrix_is_a_representation():
    A = (1, 2, 3, 4)
    basis = WordBasis(3, A)
    r = Renaming({1: 2, 2: 3, 3: 1, 4: 4})
    s = adjacent_transposition(3, A)
    lhs = renaming_permutation_matrix(r @ s, basis)
    rhs = renaming_permutation_matrix(r, basis) @ renaming_permutation_matrix(s, basis)
    assert np.array_equal(lhs, rhs)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_random_constructions_nameblind(n):
    rng = np.random.default_rng(n)
    basis = WordBasis(n, range(1, n + 1))
    for M in (random_nameblind(n, rng), random_pure_nameblind(n, rng)):
        assert is_nameblind(M, basis, "full").max_defect < 1e-12
    for p in range(n):
        assert is_partially_nameblind(random_partially_nameblind(n, p, rng), n, p) < 1e-12


def test_generic_matrix_is_not_nameblind():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((6, 6))
    assert not is_nameblind(M, WordBasis(3, (1, 2, 3))).ok


def test_parameter_counts():
    assert [nameblind_parameter_count(n) for n in range(1, 6)] == [1, 2, 6, 24, 120]
    assert [pure_parameter_count(n) for n in range(1, 6)] == [1, 2, 4, 8, 16]
    for n in range(2, 5):
        assert partial_parameter_count(n, n - 1) == math.factorial(n) ** 2


@pytest.mark.parametrize("n", [2, 3, 4])
def test_parameter_map_is_injective(n):
    for p in range(n):
        cnt = partial_parameter_count(n, p)
        cols = [partially_from_params(n, p, np.eye(cnt)[i]).ravel() for i in range(cnt)]
        assert np.linalg.matrix_rank(np.array(cols)) == cnt


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_commutant_dimension(n):
    assert commutant_dimension(n) == nameblind_parameter_count(n)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_commutant_dense_agrees(n):
    assert commutant_dimension_dense(n) == commutant_dimension(n)


def test_commutant_limits():
    with pytest.raises(ResourceLimit):
        commutant_basis(5)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_commutant_elements_follow_block_pattern(n):
    rng = np.random.default_rng(11)
    basis = commutant_basis(n)
    N = math.factorial(n)
    X = (rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))) @ basis
    assert block_pattern_defect(X.reshape(N, N), n) < 1e-10


def test_build_nameblind_rejects_bad_blocks():
    with pytest.raises(Exception):
        build_nameblind(3, np.eye(2), np.ones((3, 3)))


def test_build_pure_from_seeds():
    M = build_pure_nameblind(3, [1, 2, 3, 4])
    assert is_nameblind(M, WordBasis(3, (1, 2, 3)), "full").ok
    D, B = build_pure_nameblind(2, [1, 2]), build_pure_nameblind(2, [3, 4])
    assert np.allclose(build_pure_nameblind(3, D, B), M)


def test_extend_mn_block_diagonal():
    D = random_nameblind(2, np.random.default_rng(1))
    big = extend_mn_nameblind(D, 2, (1, 2, 3, 4))
    assert big.shape == (12, 12)
    assert is_nameblind(big, WordBasis(2, (1, 2, 3, 4), "set-lex"), "full").max_defect < 1e-12


def test_u_pm_unitary():
    U = u_pm(0.3, 1.1)
    assert np.allclose(U.conj().T @ U, np.eye(len(U)))


def test_matrix_text_round_trip():
    M = random_nameblind(3, np.random.default_rng(2))
    back, basis = load_matrix(dump_matrix(M, 3, 3))
    assert np.array_equal(back, M) and basis.n == 3


def test_decompose_errors():
    op = m34_operator()
    src = (Sector((EXT,), (), (), (EXT,), ("0",)),)
    with pytest.raises(DimensionMismatch):
        decompose_gate_operator(op, src, src, (1, 2, 3))
    tgt = (Sector((EXT,), (), (), (EXT,), ("1",)),)
    with pytest.raises(EmptyBlock):
        decompose_gate_operator(op, src, tgt, (1, 2))
