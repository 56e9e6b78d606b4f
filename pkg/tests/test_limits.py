import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lawstar import sampling
from lawstar.errors import CoherenceError, HorizonError, StructureError
from lawstar.limits import (
    ChainSystem,
    ConnectingMap,
    IndexPoset,
    ProjectiveSystem,
    Thread,
    coherence_residual,
    lift,
    project,
    represent,
    seminorm,
    sup_norm,
    validate_system,
)
from lawstar.matstar import AlgebraElement, FinStarAlgebra, op_norm

seeds = st.integers(0, 2**32 - 1)

M2, M2M3 = FinStarAlgebra((2,)), FinStarAlgebra((2, 3))
SWAP = np.array([[0, 1], [1, 0]], dtype=complex)


def harmonic(chain):
    return Thread(chain, rule=lambda k: AlgebraElement(chain.algebra(k), [np.eye(1) / j for j in range(1, k + 1)]),
                  declared_bound=1.0, monotone=True)


def linear(chain, bound=10.0):
    return Thread(chain, rule=lambda k: AlgebraElement(chain.algebra(k), [np.eye(1) * j for j in range(1, k + 1)]),
                  declared_bound=bound)


def deletion_chain():
    """M2 (+) M3 at ``b`` mapped onto M2 at ``a`` by dropping the second block."""
    poset = IndexPoset(["a", "b"], [("a", "b")])
    g = ConnectingMap("b", "a", M2M3, M2, (0,))
    return ProjectiveSystem(poset, {"a": M2, "b": M2M3}, {("a", "b"): g})


def three_chain(skew=False):
    poset = IndexPoset(["a", "b", "c"], [("a", "b"), ("b", "c")])
    algs = {"a": M2, "b": M2, "c": M2}
    maps = {("a", "b"): ConnectingMap("b", "a", M2, M2, (0,)),
            ("b", "c"): ConnectingMap("c", "b", M2, M2, (0,)),
            ("a", "c"): ConnectingMap("c", "a", M2, M2, (0,), (SWAP,) if skew else None)}
    return ProjectiveSystem(poset, algs, maps)


# systems


def test_single_node_is_valid():
    assert validate_system(ProjectiveSystem.single(M2)).ok


def test_block_deletion_chain_is_valid():
    rep = validate_system(deletion_chain())
    assert rep.ok and any(r["check"] == "composition-law" for r in rep.records)


def test_wrong_composition_is_reported_with_triple():
    assert validate_system(three_chain()).ok
    rep = validate_system(three_chain(skew=True))
    bad = [r for r in rep.failures() if r["check"] == "composition-law"]
    assert bad and set(bad[0]["witness"]) == {"a", "b", "c"}


def test_non_directed_poset_is_reported():
    poset = IndexPoset(["a", "b"])
    rep = validate_system(ProjectiveSystem(poset, {"a": M2, "b": M2}))
    assert not rep.ok and rep.failures()[0]["check"] == "poset-directed"


def test_non_unitary_map_is_rejected_structurally():
    g = ConnectingMap("b", "a", M2, M2, (0,), (2 * np.eye(2),))
    sys = ProjectiveSystem(IndexPoset(["a", "b"], [("a", "b")]), {"a": M2, "b": M2}, {("a", "b"): g})
    assert [r["check"] for r in validate_system(sys).failures()] == ["map-structure"]


@given(seeds)
def test_random_systems_validate(seed):
    assert validate_system(sampling.random_system(np.random.default_rng(seed))).ok


# threads


def test_projection_examples():
    sys = deletion_chain()
    assert op_norm(project(sys.unit(), "a") - M2.unit()) == 0
    chain = ChainSystem(1, horizon=10)
    x3 = project(harmonic(chain), 3)
    assert np.allclose([b[0, 0] for b in x3.blocks], [1, 1 / 2, 1 / 3])


def test_projection_beyond_horizon_is_a_horizon_error():
    chain = ChainSystem(1, horizon=5)
    with pytest.raises(HorizonError):
        project(harmonic(chain), 6)


def test_lift_round_trip_and_trivial_cases():
    sys = deletion_chain()
    x_top = AlgebraElement(M2M3, [np.arange(4).reshape(2, 2), np.eye(3)])
    x = lift({"a": sys.map("a", "b")(x_top), "b": x_top}, sys)
    assert op_norm(x("b") - x_top) == 0
    assert all(op_norm(c) == 0 for c in lift({n: sys.algebra(n).zero() for n in sys.nodes}, sys).coords.values())
    one = lift({n: sys.algebra(n).unit() for n in sys.nodes}, sys)
    assert coherence_residual(one)[0] == 0


def test_lift_rejects_incoherent_pair():
    sys = deletion_chain()
    with pytest.raises(CoherenceError) as err:
        lift({"a": M2.zero(), "b": M2M3.unit()}, sys)
    assert (err.value.alpha, err.value.beta) == ("a", "b")
    assert err.value.residual == pytest.approx(1.0)


def test_seminorm_examples():
    sys = deletion_chain()
    assert all(seminorm(sys.unit(), n) == 1 for n in sys.nodes)
    assert seminorm(sys.zero(), "b") == 0
    assert seminorm(linear(ChainSystem(1, 10)), 4) == pytest.approx(4)


def test_sup_norm_examples():
    chain = ChainSystem(1, horizon=50)
    v = sup_norm(harmonic(chain), 50)
    assert v.bounded and v.sup_over_horizon == pytest.approx(1)
    v = sup_norm(linear(chain), 50)
    assert v.status == "exceeds-bound" and v.witness == 11
    undeclared = Thread(chain, rule=harmonic(chain)._rule)
    assert sup_norm(undeclared).status == "inconclusive"


def test_sup_norm_on_finite_system_is_the_maximum():
    rng = np.random.default_rng(3)
    sys = sampling.random_system(rng, shape="vee")
    x = sampling.random_thread(rng, sys, "full")
    v = sup_norm(x)
    assert v.bounded and v.sup_over_horizon == max(seminorm(x, n) for n in sys.nodes)


def test_mismatched_systems_are_rejected():
    a, b = deletion_chain(), deletion_chain()
    with pytest.raises(StructureError):
        a.unit() + b.unit()


@given(seeds)
def test_thread_arithmetic_is_coherent(seed):
    rng = np.random.default_rng(seed)
    sys = sampling.random_system(rng)
    x, y = sampling.random_thread(rng, sys), sampling.random_thread(rng, sys)
    for z in (x + y, x - y, x * y, (2 - 1j) * x, x.star(), x.commutator(y)):
        assert coherence_residual(z)[0] <= 1e-8


@given(seeds)
def test_seminorms_are_monotone_along_the_order(seed):
    rng = np.random.default_rng(seed)
    sys = sampling.random_system(rng)
    x = sampling.random_thread(rng, sys, "full")
    for a, b in sys.pairs():
        assert seminorm(x, a) <= seminorm(x, b) * (1 + 1e-12) + 1e-12


@given(seeds)
def test_representation_preserves_validity_and_norms(seed):
    rng = np.random.default_rng(seed)
    sys = sampling.random_system(rng)
    new, transport = represent(sys, sampling.random_frames(rng, sys))
    assert validate_system(new).ok
    x = sampling.random_thread(rng, sys)
    tx = transport(x)
    assert coherence_residual(tx)[0] <= 1e-8
    for n in sys.nodes:
        assert abs(seminorm(x, n) - seminorm(tx, n)) <= 1e-9 * max(1, seminorm(x, n))
