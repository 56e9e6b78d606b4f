import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from lawstar import oracle, sampling
from lawstar.annihil import (
    certify_baer,
    check_subset,
    left_annihilator,
    right_annihilator,
    supports,
)
from lawstar.matstar import AlgebraElement, FinStarAlgebra, op_norm

seeds = st.integers(0, 2**32 - 1)

NILPOTENT = [[0, 1], [0, 0]]


def el(*blocks):
    return AlgebraElement.from_blocks(blocks)


def same(x, y, tol=1e-10):
    return op_norm(x - y) <= tol


def test_right_annihilator_examples():
    r = right_annihilator([el(np.diag([1, 0]))])
    assert same(r.generator, el(np.diag([0, 1])))
    assert r.subspace_dim == r.oracle_dim == 2
    # the zero element is annihilated by everything
    r = right_annihilator([el(np.zeros((2, 2)))])
    assert same(r.generator, el(np.eye(2)))
    r = right_annihilator([el(NILPOTENT), el(np.diag([1, 0]))])
    assert same(r.generator, el(np.zeros((2, 2))))
    assert oracle.right_annihilator_basis([el(NILPOTENT), el(np.diag([1, 0]))]).shape[1] == 0


def test_left_annihilator_examples():
    assert same(left_annihilator([el(np.diag([1, 0]))]).generator, el(np.diag([0, 1])))
    assert same(left_annihilator([el(np.zeros((2, 2)))]).generator, el(np.eye(2)))
    left = left_annihilator([el(NILPOTENT)])
    assert same(left.generator, el(np.diag([0, 1])))
    assert left.oracle_dim == 2 and left.consistent


def test_support_examples():
    r, l = supports(el(np.diag([0, 5])))
    assert same(r, el(np.diag([0, 1]))) and same(l, el(np.diag([0, 1])))
    r, l = supports(el(np.eye(2)))
    assert same(r, el(np.eye(2))) and same(l, el(np.eye(2)))
    r, l = supports(el(NILPOTENT))
    assert same(r, el(np.diag([0, 1]))) and same(l, el(np.diag([1, 0])))


def test_certify_baer_examples():
    assert certify_baer(FinStarAlgebra((1,)), samples=20, seed=1).ok
    assert certify_baer(FinStarAlgebra((2,)), samples=200, seed=2).ok
    rep = certify_baer(FinStarAlgebra((2, 2)), samples=100, seed=3)
    assert rep.ok and rep.max_residual <= 1e-8


@given(seeds)
def test_annihilators_match_oracle(seed):
    rng = np.random.default_rng(seed)
    alg = sampling.random_algebra(rng, max_dim=64)
    result = check_subset(sampling.random_subset(rng, alg))
    assert result["ok"], result
    assert result["right_dim"] == result["right_oracle_dim"]
    assert result["left_dim"] == result["left_oracle_dim"]


@given(seeds)
def test_left_is_adjoint_of_right(seed):
    rng = np.random.default_rng(seed)
    alg = sampling.random_algebra(rng)
    S = sampling.random_subset(rng, alg)
    e = left_annihilator(S).generator
    f = right_annihilator([s.star() for s in S]).generator
    assert op_norm(e - f.star()) <= 1e-8
    for s in S:
        assert op_norm(e * s) <= 1e-8 * max(1, op_norm(s))


@given(seeds)
def test_generator_is_a_projection_killing_s(seed):
    rng = np.random.default_rng(seed)
    alg = sampling.random_algebra(rng)
    S = sampling.random_subset(rng, alg)
    g = right_annihilator(S).generator
    assert op_norm(g * g - g) <= 1e-8 and op_norm(g - g.star()) <= 1e-8
    for s in S:
        assert op_norm(s * g) <= 1e-8 * max(1, op_norm(s))
