import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lawstar import sampling
from lawstar.errors import PreconditionError
from lawstar.limits import ChainSystem, ProjectiveSystem, Thread
from lawstar.matstar import AlgebraElement, FinStarAlgebra, op_norm
from lawstar.spectral import (
    PartitionSpec,
    build_family,
    integral_sum,
    mu_points,
    reconstruct,
    rescale_partition,
    spectral_projection,
    spectral_projection_via_support,
)

seeds = st.integers(0, 2**32 - 1)

DIAG01 = AlgebraElement.from_blocks([np.diag([0.0, 1.0])])


def el(*blocks):
    return AlgebraElement.from_blocks(blocks)


def same(x, y, tol=1e-10):
    return op_norm(x - y) <= tol


def eigh_projection(x, lam):
    """Oracle: LAPACK eigenvectors with eigenvalue strictly below ``lam``."""
    blocks = []
    for b in x.blocks:
        w, v = np.linalg.eigh(b)
        cols = v[:, w < lam]
        blocks.append(cols @ cols.conj().T)
    return AlgebraElement(x.algebra, blocks)


def diagonal_sum_error(t, nodes, rule):
    """Oracle for a diagonal element: each eigenvalue is replaced by its cell tag."""
    mus = mu_points(nodes, rule)
    cells = np.searchsorted(nodes, t, side="right") - 1
    return float(np.max(np.abs(t - mus[cells])))


# partitions


def test_partition_is_dyadic_and_covers_interval():
    p = PartitionSpec.for_norm(1.0, 0.25, 0.1)
    assert p.lo == -1.0 and p.hi == pytest.approx(1.1)
    assert len(p.nodes) - 1 == 16 and p.mesh <= 0.25
    finer = PartitionSpec.for_norm(1.0, 0.125, 0.1)
    assert set(p.nodes) <= set(finer.nodes)


def test_partition_needs_positive_eps_and_mesh():
    with pytest.raises(PreconditionError):
        PartitionSpec.for_norm(0.0, 0.25, 0.0)
    with pytest.raises(PreconditionError):
        PartitionSpec.for_norm(1.0, 0.0, 0.1)


def test_rescale_partition_examples():
    sys = ProjectiveSystem.single(FinStarAlgebra((2,)))
    p = PartitionSpec.for_norm(1.0, 0.25, 0.1)
    x = sys.push(el(np.diag([1.0, -0.2])))
    assert np.allclose(rescale_partition(p, x, "A"), p.nodes)
    half = sys.push(el(np.diag([0.5, 0.0])))
    nodes = rescale_partition(p, half, "A")
    assert nodes[0] == pytest.approx(-0.5) and nodes[-1] == pytest.approx(0.6)
    assert np.allclose(np.diff(nodes), np.diff(nodes)[0])


def test_unknown_mu_rule():
    with pytest.raises(PreconditionError):
        mu_points(np.array([0.0, 1.0]), "trapezoid")


# spectral projections


def test_spectral_projection_examples():
    assert same(spectral_projection(el(np.diag([1.0, 2.0])), 1.5), el(np.diag([1.0, 0.0])))
    rng = np.random.default_rng(5)
    x = sampling.random_selfadjoint(rng, FinStarAlgebra((3, 2)))
    n = op_norm(x)
    assert same(spectral_projection(x, n + 0.01), x.algebra.unit())
    assert op_norm(spectral_projection(x, -n)) == 0
    flip = el([[0.0, 1.0], [1.0, 0.0]])
    minus = el(0.5 * np.array([[1, -1], [-1, 1]]))
    assert same(spectral_projection(flip, 0.0), minus)
    assert same(spectral_projection_via_support(flip, 0.0), minus)


def test_spectral_projection_rejects_non_selfadjoint():
    with pytest.raises(PreconditionError):
        spectral_projection(el([[0.0, 1.0], [0.0, 0.0]]), 0.5)


def test_eigenvalue_near_node_is_snapped():
    x = el(np.diag([0.5 - 1e-12, 0.7]))
    assert same(spectral_projection(x, 0.5, nodes=[0.5]), el(np.zeros((2, 2))))


@given(seeds, st.floats(-3, 3))
def test_spectral_projection_matches_eigen_oracle(seed, lam):
    rng = np.random.default_rng(seed)
    x = sampling.random_selfadjoint(rng, sampling.random_algebra(rng))
    t = np.concatenate([np.linalg.eigvalsh(b) for b in x.blocks])
    if np.min(np.abs(t - lam)) < 1e-6:
        return  # too close to the spectrum for an oracle comparison
    assert same(spectral_projection(x, lam), eigh_projection(x, lam), 1e-8)


@given(seeds)
def test_thread_projection_is_coherent(seed):
    rng = np.random.default_rng(seed)
    sys = sampling.random_system(rng)
    x = sampling.random_selfadjoint_thread(rng, sys)
    lam = float(rng.uniform(-1, 1))
    e = spectral_projection(x, lam)
    for n in sys.nodes:
        assert same(e(n), spectral_projection(x(n), lam), 1e-8)


# families


def test_family_of_zero():
    fam = build_family(el(np.zeros((2, 2))), nodes=[-0.1, 0.0, 0.05, 0.1])
    ps = fam.projections[None]
    assert op_norm(ps[0]) == 0 and op_norm(ps[1]) == 0
    assert same(ps[2], el(np.eye(2))) and same(ps[3], el(np.eye(2)))
    assert fam.ok


def test_family_of_diag01_steps_at_spectrum():
    p = PartitionSpec.for_norm(1.0, 0.25, 0.1)
    fam = build_family(DIAG01, p)
    ranks = [int(round(np.trace(e.blocks[0]).real)) for e in fam.projections[None]]
    nodes = np.array(p.nodes)
    assert ranks == [int(np.sum(np.array([0.0, 1.0]) < lam)) for lam in nodes]
    assert fam.ok


@given(seeds)
def test_random_family_axioms(seed):
    rng = np.random.default_rng(seed)
    x = sampling.random_selfadjoint(rng, FinStarAlgebra((4,)), scale=float(rng.uniform(0.1, 5)))
    fam = build_family(x, PartitionSpec.for_norm(op_norm(x), 0.1, 0.1))
    assert fam.ok, {k: v.witness for k, v in fam.certificate.items() if not v.ok}
    ps = fam.projections[None]
    for e, f in zip(ps, ps[1:]):
        assert op_norm(e - e * f) <= 1e-8
    for e in ps:
        assert op_norm(e * x - x * e) <= 1e-8


@given(seeds)
def test_family_is_the_eigen_oracle_family(seed):
    # uniqueness probe: every e_lambda equals the closed-form eigenprojection
    rng = np.random.default_rng(seed)
    x = sampling.random_selfadjoint(rng, sampling.random_algebra(rng))
    p = PartitionSpec.for_norm(op_norm(x), 0.25, 0.1)
    t = np.concatenate([np.linalg.eigvalsh(b) for b in x.blocks])
    fam = build_family(x, p)
    for lam, e in zip(p.nodes, fam.projections[None]):
        if np.min(np.abs(t - lam)) > 1e-6:
            assert same(e, eigh_projection(x, lam), 1e-8)


# integral sums


def test_diag01_midpoint_error():
    p = PartitionSpec.for_norm(1.0, 0.25, 0.1)
    _, errors = integral_sum(DIAG01, p, "midpoint")
    nodes = p.rescale(1.0)
    assert errors[0].error == pytest.approx(diagonal_sum_error(np.array([0.0, 1.0]), nodes, "midpoint"))
    assert errors[0].error == pytest.approx(0.034375)
    assert errors[0].error <= 0.25


def test_left_rule_on_nodes_at_spectrum():
    eps = 0.1
    nodes = np.array([-eps, 0.0, 0.5, 1.0, 1.0 + eps])
    fam = build_family(DIAG01, nodes=nodes)
    assert fam.ok
    p = PartitionSpec(tuple(nodes), eps, 0.5)
    sigma, errors = integral_sum(DIAG01, p, "left", rescale=False)
    assert same(sigma, DIAG01)
    assert errors[0].error <= p.mesh


def test_mesh_sequence_errors_decrease():
    errors = []
    for mesh in (0.5, 0.25, 0.125):
        _, errs = integral_sum(DIAG01, PartitionSpec.for_norm(1.0, mesh, 0.1), "midpoint")
        errors.append(errs[0].error)
    assert errors == sorted(errors, reverse=True) and errors[-1] < 0.13
    assert errors == pytest.approx([0.08125, 0.034375, 0.0171875])


# reconstruction


def test_reconstruct_unit_thread():
    sys = sampling.random_system(np.random.default_rng(2))
    cert = reconstruct(sys.unit(), 0.25, 0.1)
    assert cert.ok and all(e.error <= e.delta + 1e-8 for e in cert.errors)


def test_reconstruct_harmonic_chain():
    chain = ChainSystem(1, horizon=20)
    h = Thread(chain, rule=lambda k: AlgebraElement(chain.algebra(k), [np.eye(1) / j for j in range(1, k + 1)]),
               declared_bound=1.0, monotone=True)
    cert = reconstruct(h, 0.05, 0.1)
    assert cert.ok and len(cert.errors) == 20


def test_reconstruct_refuses_unbounded_thread():
    chain = ChainSystem(1, horizon=12)
    n = Thread(chain, rule=lambda k: AlgebraElement(chain.algebra(k), [np.eye(1) * j for j in range(1, k + 1)]),
               declared_bound=10.0)
    with pytest.raises(PreconditionError):
        reconstruct(n, 0.5, 0.1)
    cert = reconstruct(n, 0.5, 0.1, per_coordinate=True)
    assert cert.per_coordinate and cert.bound_ok


@given(seeds, st.sampled_from([0.5, 0.25, 0.125]), st.sampled_from(["midpoint", "left", "right"]))
def test_reconstruction_bound(seed, mesh, rule):
    rng = np.random.default_rng(seed)
    sys = sampling.random_system(rng, max_nodes=3)
    x = sampling.random_selfadjoint_thread(rng, sys, scale=float(rng.uniform(0.2, 3)))
    cert = reconstruct(x, mesh, 0.1, rule)
    assert cert.ok
    for e in cert.errors:
        assert e.error <= e.delta + 1e-8


@given(seeds)
def test_left_rule_errors_are_monotone_in_mesh(seed):
    rng = np.random.default_rng(seed)
    sys = sampling.random_system(rng, max_nodes=3)
    x = sampling.random_selfadjoint_thread(rng, sys)
    errors = [reconstruct(x, m, 0.1, "left").max_error for m in (0.5, 0.25, 0.125, 0.0625)]
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))


def test_reconstruction_is_deterministic():
    rng = np.random.default_rng(9)
    x = sampling.random_selfadjoint_thread(rng, sampling.random_system(rng))
    a, b = reconstruct(x, 0.125, 0.1), reconstruct(x, 0.125, 0.1)
    assert [e.error for e in a.errors] == [e.error for e in b.errors]
