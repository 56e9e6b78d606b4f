"""Spectral families, partitions and the reconstruction ``x = int lambda de_lambda``.

``e_lambda(x)`` is the right support of ``(lambda 1 - x)_+``, which in an
eigenbasis of ``x`` is the indicator of the eigenvalues strictly below
``lambda``. Partitions are dyadic (``2**j`` equal cells) so that refining the
mesh target refines the partition, and every coordinate gets the affine image
of the global partition onto its own interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .annihil import right_support
from .errors import PreconditionError
from .limits import Thread, coherence_residual, sup_norm
from .matstar import (
    CLUSTER_TOL,
    AlgebraElement,
    EigenDecomposition,
    decompose_selfadjoint,
    hermitian_eigen,
    op_norm,
)

TOL = 1e-8
MU_RULES = ("midpoint", "left", "right")
SUPPORT_RESOLUTION = 1e-4


# partitions -------------------------------------------------------------------------

@dataclass(frozen=True)
class PartitionSpec:
    """Nodes ``lambda_0 < ... < lambda_m`` covering ``[-norm, norm + eps]``."""

    nodes: tuple[float, ...]
    epsilon: float
    mesh_target: float

    @classmethod
    def for_norm(cls, norm: float, mesh: float, eps: float) -> "PartitionSpec":
        """Dyadic partition: ``m = 2**ceil(log2(length / mesh))`` equal cells."""
        if eps <= 0:
            raise PreconditionError("eps must be positive")
        if mesh <= 0:
            raise PreconditionError("mesh must be positive")
        lo = -float(norm)
        length = 2 * float(norm) + eps
        m = 2 ** max(0, math.ceil(math.log2(length / mesh)))
        nodes = tuple(lo + (length * i) / m for i in range(m + 1))
        return cls(nodes, float(eps), float(mesh))

    @property
    def lo(self) -> float:
        return self.nodes[0]

    @property
    def hi(self) -> float:
        return self.nodes[-1]

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    def rescale(self, norm: float) -> np.ndarray:
        """Affine image of the nodes onto ``[-norm, norm + eps]``."""
        length = self.hi - self.lo
        target = 2 * float(norm) + self.epsilon
        return -float(norm) + (np.asarray(self.nodes) - self.lo) * (target / length)


def partition_for(x, mesh: float, eps: float) -> PartitionSpec:
    """Global partition for an element or a bounded thread."""
    if isinstance(x, Thread):
        verdict = sup_norm(x)
        if not verdict.bounded:
            raise PreconditionError(f"thread is not certified bounded ({verdict.status})")
        return PartitionSpec.for_norm(verdict.sup_over_horizon, mesh, eps)
    return PartitionSpec.for_norm(op_norm(x), mesh, eps)


def rescale_partition(partition: PartitionSpec, x: Thread, alpha) -> np.ndarray:
    """The coordinate partition of ``x`` at ``alpha``."""
    return partition.rescale(op_norm(x(alpha)))


def mu_points(nodes: np.ndarray, rule: str) -> np.ndarray:
    """Tag ``mu_n`` in ``[lambda_{n-1}, lambda_n]`` for every cell."""
    nodes = np.asarray(nodes)
    if rule == "midpoint":
        return 0.5 * (nodes[:-1] + nodes[1:])
    if rule == "left":
        return nodes[:-1].copy()
    if rule == "right":
        return nodes[1:].copy()
    raise PreconditionError(f"unknown mu rule {rule!r}; expected one of {', '.join(MU_RULES)}")


# spectral projections -------------------------------------------------------------

def _snap(t: np.ndarray, nodes) -> np.ndarray:
    """Eigenvalues within ``CLUSTER_TOL`` of a node are moved onto it."""
    t = np.array(t, dtype=float)
    nodes = np.atleast_1d(np.asarray(nodes, dtype=float))
    idx = np.clip(np.searchsorted(nodes, t), 1, max(1, len(nodes) - 1))
    for cand in (idx - 1, np.minimum(idx, len(nodes) - 1)):
        near = np.abs(t - nodes[cand]) <= CLUSTER_TOL
        t[near] = nodes[cand][near]
    return t


def _snapped(eig: EigenDecomposition, nodes) -> list[np.ndarray]:
    return [_snap(t, nodes) for t in eig.eigenvalues]


def _masks(eig: EigenDecomposition, lam: float, nodes=None, snapped=None) -> list[np.ndarray]:
    if snapped is None:
        snapped = _snapped(eig, [lam] if nodes is None else nodes)
    return [t < lam for t in snapped]


def _projection_from_masks(eig: EigenDecomposition, masks) -> AlgebraElement:
    blocks = []
    for u, m in zip(eig.unitary.blocks, masks):
        cols = u[:, m]
        blocks.append(cols @ cols.conj().T)
    return AlgebraElement(eig.algebra, blocks)


def spectral_projection(x, lam: float, nodes=None):
    """``e_lambda(x) = U 1[t < lambda] U*`` for an element or a thread.

    For a thread the same ``lambda`` is used in every coordinate and the
    result is checked for coherence before it is returned.
    """
    if isinstance(x, Thread):
        sys = x.system.finite() if x.system.is_lazy else x.system
        coords = {n: spectral_projection(x(n), lam, nodes) for n in sys.nodes}
        e = Thread(sys, coords)
        residual, pair = coherence_residual(e)
        if residual > TOL:
            raise PreconditionError(f"spectral projections incoherent at {pair} (residual {residual:.3e})")
        return e
    eig = hermitian_eigen(x)
    return _projection_from_masks(eig, _masks(eig, lam, nodes))


def spectral_projection_via_support(x: AlgebraElement, lam: float) -> AlgebraElement:
    """Second route to ``e_lambda``: ``r((lambda 1 - x)_+)`` built from supports."""
    plus, _, _ = decompose_selfadjoint(lam * x.algebra.unit() - x)
    return right_support(plus)


# families ----------------------------------------------------------------------------

@dataclass
class AxiomVerdict:
    ok: bool = True
    residual: float = 0.0
    witness: object = None

    def update(self, residual: float, witness, tol: float = TOL):
        self.residual = max(self.residual, float(residual))
        if residual > tol and self.ok:
            self.ok = False
            self.witness = witness


AXIOMS = ("monotone", "sup_is_one", "inf_is_zero", "left_continuous")


@dataclass
class SpectralFamily:
    """``e_lambda`` at every partition node of every coordinate.

    ``projections[node][i]`` is the projection at ``nodes[node][i]``; for an
    element the single coordinate is keyed ``None``. Consecutive nodes with the
    same eigenvalue selection share one matrix.
    """

    nodes: dict
    projections: dict
    certificate: dict = field(default_factory=dict)
    commutation_residual: float = 0.0
    support_residual: float = 0.0

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.certificate.values()) and self.commutation_residual <= TOL \
            and self.support_residual <= TOL


def _coordinate_family(x: AlgebraElement, nodes: np.ndarray, eig: EigenDecomposition | None = None):
    eig = hermitian_eigen(x) if eig is None else eig
    projections, keys, cache = [], [], {}
    snapped = _snapped(eig, nodes)
    for lam in nodes:
        masks = _masks(eig, lam, snapped=snapped)
        key = tuple(m.tobytes() for m in masks)
        if key not in cache:
            cache[key] = (_projection_from_masks(eig, masks), masks)
        projections.append(cache[key][0])
        keys.append(key)
    return eig, projections, keys, cache


def _probe_step(t_all: np.ndarray, t: float, norm: float) -> float:
    h = 1e-7 * max(1.0, norm)
    lower = t_all[t_all < t - CLUSTER_TOL]
    if lower.size:
        h = min(h, 0.5 * (t - lower.max()))
    return h


def _certify(x: AlgebraElement, nodes: np.ndarray, eig, projections, keys, cache, cert, witness_node):
    alg = x.algebra
    unit, norm = alg.unit(), op_norm(x)
    # every distinct projection is one; consecutive distinct ones are ordered
    for key, (p, _) in cache.items():
        cert["monotone"].update(max(op_norm(p * p - p), op_norm(p - p.star())), (witness_node, "projection"))
    for i in range(len(nodes) - 1):
        if keys[i] != keys[i + 1]:
            e, f = projections[i], projections[i + 1]
            cert["monotone"].update(op_norm(e - e * f), (witness_node, float(nodes[i]), float(nodes[i + 1])))
    cert["inf_is_zero"].update(op_norm(projections[0]), (witness_node, float(nodes[0])))
    cert["sup_is_one"].update(op_norm(projections[-1] - unit), (witness_node, float(nodes[-1])))
    # left continuity at each eigenvalue and at each node: e_t = e_{t-h}
    t_all = np.sort(np.concatenate(eig.eigenvalues)) if eig.eigenvalues else np.zeros(0)
    probes = sorted(set(float(v) for v in t_all) | set(float(v) for v in nodes))
    steps = np.array([_probe_step(t_all, lam, norm) for lam in probes])

    def selected(lams):
        # the mask rule of _masks with nodes=[lam], for every probe at once
        gap = t_all[None, :] - np.asarray(lams)[:, None]
        return (gap < 0) & (np.abs(gap) > CLUSTER_TOL)

    differs = (selected(np.array(probes) - steps) != selected(probes)).any(axis=1) if t_all.size \
        else np.zeros(len(probes), bool)
    for lam, h, moved in zip(probes, steps, differs):
        residual = 0.0  # same selection, same matrix
        if moved:
            below, at = _masks(eig, lam - h), _masks(eig, lam)
            residual = op_norm(_projection_from_masks(eig, at) - _projection_from_masks(eig, below))
        cert["left_continuous"].update(residual, (witness_node, lam))
    commute = max(op_norm(p * x - x * p) for p, _ in cache.values())
    # second route, r((lambda 1 - x)_+), once per distinct selection. The support
    # route squares (lambda - t), so it only resolves eigenvalues further than
    # about sqrt(CLUSTER_TOL) from lambda; use the node of the run furthest
    # from the spectrum and skip runs with no such node.
    support = 0.0
    best = {}
    for lam, key in zip(nodes, keys):
        gap = float(np.min(np.abs(t_all - lam))) if t_all.size else np.inf
        if key not in best or gap > best[key][1]:
            best[key] = (lam, gap)
    for key, (lam, gap) in best.items():
        if gap < SUPPORT_RESOLUTION * max(1.0, norm):
            continue
        p = cache[key][0]
        support = max(support, op_norm(p - spectral_projection_via_support(x, float(lam))))
    return commute, support


def build_family(x, partition: PartitionSpec | None = None, nodes=None) -> SpectralFamily:
    """Spectral family of ``x`` on the partition, with the axiom certificate.

    ``nodes`` overrides the partition (per coordinate for threads: a mapping
    node -> array). Threads use the global nodes in every coordinate.
    """
    cert = {name: AxiomVerdict() for name in AXIOMS}
    if isinstance(x, Thread):
        sys = x.system.finite() if x.system.is_lazy else x.system
        coords = list(sys.nodes)
        elements = {n: x(n) for n in coords}
    else:
        coords = [None]
        elements = {None: x}
    if nodes is None:
        if partition is None:
            raise PreconditionError("build_family needs a partition or explicit nodes")
        nodes = {n: np.asarray(partition.nodes) for n in coords}
    elif not isinstance(nodes, dict):
        nodes = {n: np.asarray(nodes, dtype=float) for n in coords}
    fam = SpectralFamily(nodes, {})
    commute = support = 0.0
    for n in coords:
        eig, projections, keys, cache = _coordinate_family(elements[n], nodes[n])
        fam.projections[n] = projections
        c, d = _certify(elements[n], nodes[n], eig, projections, keys, cache, cert, n)
        commute, support = max(commute, c), max(support, d)
    fam.certificate = cert
    fam.commutation_residual = commute
    fam.support_residual = support
    return fam


# integral sums -------------------------------------------------------------------------

@dataclass(frozen=True)
class CoordinateError:
    node: object
    norm: float
    delta: float
    error: float

    @property
    def ok(self) -> bool:
        return self.error <= self.delta + TOL


def _coordinate_sum(x: AlgebraElement, nodes: np.ndarray, rule: str, eig=None):
    """``sum mu_n (e_{lambda_n} - e_{lambda_{n-1}})`` for one coordinate."""
    eig = hermitian_eigen(x) if eig is None else eig
    mus = mu_points(nodes, rule)
    sigma = x.algebra.zero()
    snapped = _snapped(eig, nodes)
    prev = _masks(eig, nodes[0], snapped=snapped)
    prev_e = _projection_from_masks(eig, prev)
    for i in range(1, len(nodes)):
        masks = _masks(eig, nodes[i], snapped=snapped)
        if any((a != b).any() for a, b in zip(masks, prev)):
            e = _projection_from_masks(eig, masks)
            sigma = sigma + float(mus[i - 1]) * (e - prev_e)
            prev, prev_e = masks, e
    return sigma


def integral_sum(x, partition: PartitionSpec, mu_rule: str = "midpoint", rescale: bool = True):
    """Integral sum and the per-coordinate errors ``||x_alpha - sigma_alpha||``.

    With ``rescale`` each coordinate integrates over its own affine copy of
    the partition, so its bound is that copy's mesh ``delta_alpha``. Without it
    every coordinate uses the global nodes and ``sigma`` is a thread.
    Returns ``(sigma, errors)``; ``sigma`` is a dict of coordinates when
    rescaled partitions differ between nodes.
    """
    mu_points(np.asarray(partition.nodes[:2]), mu_rule)  # validates the rule
    if not isinstance(x, Thread):
        norm = op_norm(x)
        nodes = partition.rescale(norm) if rescale else np.asarray(partition.nodes)
        sigma = _coordinate_sum(x, nodes, mu_rule)
        delta = float(np.max(np.diff(nodes)))
        return sigma, [CoordinateError(None, norm, delta, op_norm(x - sigma))]
    sys = x.system.finite() if x.system.is_lazy else x.system
    coords, errors = {}, []
    for n in sys.nodes:
        xn = x(n)
        norm = op_norm(xn)
        nodes = partition.rescale(norm) if rescale else np.asarray(partition.nodes)
        coords[n] = _coordinate_sum(xn, nodes, mu_rule)
        errors.append(CoordinateError(n, norm, float(np.max(np.diff(nodes))), op_norm(xn - coords[n])))
    sigma = coords if rescale else Thread(sys, coords)
    return sigma, errors


# end-to-end reconstruction ----------------------------------------------------------

@dataclass
class ReconstructionCertificate:
    partition: PartitionSpec
    mu_rule: str
    errors: list
    family: SpectralFamily
    global_errors: list
    coherence_residual: float
    masa_residual: float
    per_coordinate: bool = False
    bounded: object = None

    @property
    def bound_ok(self) -> bool:
        return all(e.ok for e in self.errors)

    @property
    def max_error(self) -> float:
        return max(e.error for e in self.errors)

    @property
    def ok(self) -> bool:
        return self.bound_ok and self.family.ok and self.coherence_residual <= TOL and self.masa_residual <= TOL


def _materialize(x: Thread) -> Thread:
    if not x.system.is_lazy:
        return x
    sys = x.system.finite()
    return Thread(sys, {n: x(n) for n in sys.nodes}, label=x.label)


def reconstruct(x, mesh: float, eps: float, mu_rule: str = "midpoint",
                per_coordinate: bool = False) -> ReconstructionCertificate:
    """Partition, rescale, build the family, sum, and certify every coordinate.

    A thread must be certified bounded, since the integration interval uses
    ``sup ||x||_alpha``. With ``per_coordinate`` an unbounded thread is handled
    coordinate by coordinate (each with its own interval) and flagged as such.
    """
    from .lawstruct import masa_containing

    bounded = None
    if isinstance(x, Thread):
        bounded = sup_norm(x)
        if not bounded.bounded and not per_coordinate:
            raise PreconditionError(
                f"reconstruction needs a bounded thread (verdict {bounded.status}); "
                "request per-coordinate reconstruction instead")
        x = _materialize(x)
        norm = bounded.sup_over_horizon if bounded.bounded else max(op_norm(x(n)) for n in x.system.nodes)
    else:
        norm = op_norm(x)
    partition = PartitionSpec.for_norm(norm, mesh, eps)
    _, errors = integral_sum(x, partition, mu_rule, rescale=True)
    _, global_errors = integral_sum(x, partition, mu_rule, rescale=False)
    family = build_family(x, partition)

    coherence = 0.0
    masa = 0.0
    sub = masa_containing(x)
    if isinstance(x, Thread):
        sys = x.system
        top = sys.top()
        seen = set()
        for a in sys.nodes:
            g = sys.map(a, top)
            for p_top, p_a in zip(family.projections[top], family.projections[a]):
                if (id(p_top), id(p_a)) not in seen:
                    seen.add((id(p_top), id(p_a)))
                    coherence = max(coherence, op_norm(g(p_top) - p_a))
    for n, projections in family.projections.items():
        node = sub.parent.nodes[0] if n is None else n
        span = oracle.orthonormal_span(sub.bases[node])
        for p in {id(p): p for p in projections}.values():
            masa = max(masa, oracle.distance_to_span(p.to_vector(), span))
    return ReconstructionCertificate(partition, mu_rule, errors, family, global_errors, coherence, masa,
                                     per_coordinate and not (bounded is None or bounded.bounded), bounded)
