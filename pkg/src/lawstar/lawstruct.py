"""Locally AW* structure of a projective system.

Verifiers for the equivalence of the Baer, Kaplansky and coordinatewise AW*
conditions, the center / maximal commutative / corner subalgebras, the
projection approximation of commutative elements, suprema of orthogonal
families, central annihilators of right ideals and the bounded part.

Limit-level statements are checked the way they are proved: compute in every
coordinate, verify that the coordinates cohere, lift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import oracle
from .annihil import certify_baer, principal_dim, right_projection, right_support
from .errors import PreconditionError
from .limits import (
    COHERENCE_TOL,
    ConnectingMap,
    IndexPoset,
    ProjectiveSystem,
    Thread,
    coherence_residual,
    lift,
    sup_norm,
    validate_system,
)
from .matstar import (
    AlgebraElement,
    FinStarAlgebra,
    hermitian_eigen,
    is_projection,
    op_norm,
    trace,
)
from .projlat import Projection, leq, sup_family

TOL = 1e-8


def _finite(sys):
    return sys.finite() if sys.is_lazy else sys


@dataclass
class Verdict:
    """Outcome of one family of checks, with the worst residual seen."""

    name: str
    ok: bool = True
    residual: float = 0.0
    witness: object = None
    checks: int = 0

    def record(self, ok: bool, residual: float = 0.0, witness=None):
        self.checks += 1
        self.residual = max(self.residual, float(residual))
        if not ok and self.ok:
            self.ok = False
            self.witness = witness

    def within(self, residual: float, witness=None, tol: float = TOL):
        self.record(residual <= tol, residual, witness)


# limit-level linear algebra ---------------------------------------------------

def map_matrix(g: ConnectingMap) -> np.ndarray:
    """Matrix of ``g`` on row-major block vectors: ``vec(u b u*) = (u kron conj(u)) vec(b)``."""
    src, tgt = g.source_algebra, g.target_algebra
    src_off = np.concatenate([[0], np.cumsum([n * n for n in src.block_sizes])]).astype(int)
    out = np.zeros((tgt.dim, src.dim), complex)
    row = 0
    for j, k in enumerate(g.kept_blocks):
        n = src.block_sizes[k]
        u = g.unitary(j)
        out[row:row + n * n, src_off[k]:src_off[k + 1]] = np.eye(n * n) if u is None else np.kron(u, u.conj())
        row += n * n
    return out


def limit_kernel(sys, operators: dict) -> np.ndarray:
    """Threads ``x`` with ``M x_alpha = 0`` for every ``M`` in ``operators[alpha]``.

    Works on the product of all coordinate algebras with the coherence
    relations imposed as linear constraints, so it never uses the fact that a
    finite directed system is determined by its greatest node. Columns of the
    result are concatenated coordinate vectors in node order.
    """
    sys = _finite(sys)
    nodes = list(sys.nodes)
    dims = [sys.algebra(n).dim for n in nodes]
    offsets = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    total = int(offsets[-1])
    pos = {n: i for i, n in enumerate(nodes)}
    rows = []
    for a, b in sys.pairs():
        g = map_matrix(sys.map(a, b))
        row = np.zeros((dims[pos[a]], total), complex)
        row[:, offsets[pos[a]]:offsets[pos[a] + 1]] = np.eye(dims[pos[a]])
        row[:, offsets[pos[b]]:offsets[pos[b] + 1]] -= g
        rows.append(row)
    for n, mats in operators.items():
        for m in mats:
            row = np.zeros((m.shape[0], total), complex)
            row[:, offsets[pos[n]]:offsets[pos[n] + 1]] = m
            rows.append(row)
    if not rows:
        return np.eye(total, dtype=complex)
    return oracle.nullspace(np.vstack(rows))


def split_thread_vector(sys, vec) -> dict:
    sys = _finite(sys)
    out, pos = {}, 0
    for n in sys.nodes:
        alg = sys.algebra(n)
        out[n] = alg.from_vector(vec[pos:pos + alg.dim])
        pos += alg.dim
    return out


def limit_right_annihilator_dim(sys, S: Sequence[Thread]) -> tuple[int, np.ndarray]:
    ops = {n: [oracle.left_mult_matrix(s(n)) for s in S] for n in _finite(sys).nodes}
    basis = limit_kernel(sys, ops)
    return basis.shape[1], basis


def limit_principal_dim(sys, g: Thread) -> int:
    """Dimension of ``gA`` inside the limit, as threads fixed by ``x -> g x``."""
    ops = {}
    for n in _finite(sys).nodes:
        alg = sys.algebra(n)
        ops[n] = [oracle.left_mult_matrix(alg.unit() - g(n))]
    return limit_kernel(sys, ops).shape[1]


def lift_coordinatewise(sys, f: Callable[[object], AlgebraElement], tol: float = COHERENCE_TOL) -> tuple[Thread, float]:
    """Apply ``f(node)`` at every node, check coherence, return the thread."""
    sys = _finite(sys)
    coords = {n: f(n) for n in sys.nodes}
    thread = Thread(sys, coords)
    residual, _ = coherence_residual(thread)
    return thread, residual


# subsystems --------------------------------------------------------------------

@dataclass
class Subsystem:
    """A projective family of *-subalgebras ``B_alpha`` of ``A_alpha``.

    ``bases[alpha]`` spans ``B_alpha`` inside ``A_alpha``. When ``intrinsic`` is
    set it presents the family as a projective system of its own, and
    ``embed(alpha, y)`` carries an intrinsic coordinate into ``A_alpha``.
    Commutative kinds also record their minimal projections.
    """

    parent: ProjectiveSystem
    kind: str
    bases: dict
    intrinsic: ProjectiveSystem | None = None
    embed: Callable | None = None
    minimal_projections: dict | None = None
    degenerate: bool = False

    def dim(self, node) -> int:
        return oracle.span_dim(self.bases[node])

    def contains(self, node, x: AlgebraElement) -> float:
        """Distance from ``x`` to ``B_node`` (Frobenius, on vectors)."""
        return oracle.distance_to_span(x.to_vector(), oracle.orthonormal_span(self.bases[node]))


def _spectral_frame(x: AlgebraElement) -> list[np.ndarray]:
    return list(hermitian_eigen(x).unitary.blocks)


def _frame_projections(alg: FinStarAlgebra, frames) -> list[Projection]:
    out = []
    for b, u in enumerate(frames):
        for i in range(u.shape[1]):
            blocks = [np.zeros((m, m), complex) for m in alg.block_sizes]
            blocks[b] = np.outer(u[:, i], u[:, i].conj())
            out.append(Projection(AlgebraElement(alg, blocks), check=False))
    return out


def _masa_from_top(sys, top_frames) -> Subsystem:
    top = sys.top()
    top_alg = sys.algebra(top)
    top_proj = _frame_projections(top_alg, top_frames)
    minimal = {}
    for n in sys.nodes:
        g = sys.map(n, top)
        pushed = [Projection(g(p), check=False) for p in top_proj]
        minimal[n] = [p for p in pushed if op_norm(p) > 0.5]
    # intrinsic presentation: one M_1 summand per minimal projection
    index = {}
    for n in sys.nodes:
        g = sys.map(n, top)
        index[n] = [i for i, p in enumerate(top_proj) if op_norm(g(p)) > 0.5]
    algebras = {n: FinStarAlgebra((1,) * len(index[n])) for n in sys.nodes}
    maps = {}
    for a, b in sys.pairs():
        kept = tuple(index[b].index(i) for i in index[a])
        maps[(a, b)] = ConnectingMap(b, a, algebras[b], algebras[a], kept)
    intrinsic = ProjectiveSystem(sys.poset, algebras, maps, label="masa")

    stacks = {}
    for n in sys.nodes:
        alg = sys.algebra(n)
        stacks[n] = [np.array([p.blocks[b] for p in minimal[n]]).reshape(len(minimal[n]), m, m)
                     for b, m in enumerate(alg.block_sizes)]

    def embed(node, y):
        coeffs = np.array([c[0, 0] for c in y.blocks], dtype=complex)
        return AlgebraElement._wrap(sys.algebra(node), [np.tensordot(coeffs, st, 1) for st in stacks[node]])

    return Subsystem(sys, "masa", {n: list(minimal[n]) for n in sys.nodes}, intrinsic, embed, minimal)


def masa_containing(x) -> Subsystem:
    """Maximal commutative *-subalgebra diagonal in an eigenbasis of ``x``.

    For a thread the eigenbasis is taken at the greatest node and pushed
    down, which keeps the family coherent even when eigenvalues repeat.
    Repeated eigenvalues are refined by the order of the eigensolver output.
    """
    if isinstance(x, Thread):
        sys = _finite(x.system)
        top = sys.top()
        return _masa_from_top(sys, _spectral_frame(x(top)))
    sys = ProjectiveSystem.single(x.algebra)
    return _masa_from_top(sys, _spectral_frame(x))


def _require_selfadjoint_set(S: Sequence[AlgebraElement], tol: float = TOL):
    for i, s in enumerate(S):
        adj = s.star()
        if not any(op_norm(adj - t) <= tol * max(1.0, op_norm(s)) for t in S):
            raise PreconditionError(f"set is not self-adjoint: adjoint of element {i} is missing")


def commutant(S: Sequence[AlgebraElement], node="A") -> Subsystem:
    """``S' = {x : xs = sx for all s in S}`` for a self-adjoint set in one algebra."""
    S = list(S)
    if not S:
        raise PreconditionError("commutant of an empty set")
    _require_selfadjoint_set(S)
    alg = S[0].algebra
    basis = oracle.elements_from_columns(alg, oracle.commutant_basis(S))
    sys = ProjectiveSystem.single(alg, node)
    return Subsystem(sys, "commutant", {node: basis})


def center(sys) -> Subsystem:
    """Per node the block units; intrinsically ``C^k`` with block deletion maps."""
    sys = _finite(sys)
    bases, minimal, algebras = {}, {}, {}
    for n in sys.nodes:
        alg = sys.algebra(n)
        units = [Projection(alg.block_unit(i), check=False) for i in range(alg.num_blocks)]
        bases[n] = list(units)
        minimal[n] = units
        algebras[n] = FinStarAlgebra((1,) * alg.num_blocks)
    maps = {}
    for a, b in sys.pairs():
        g = sys.map(a, b)
        maps[(a, b)] = ConnectingMap(b, a, algebras[b], algebras[a], g.kept_blocks)
    intrinsic = ProjectiveSystem(sys.poset, algebras, maps, label="center")

    def embed(node, y):
        alg = sys.algebra(node)
        return AlgebraElement(alg, [complex(c[0, 0]) * np.eye(m) for c, m in zip(y.blocks, alg.block_sizes)])

    return Subsystem(sys, "center", bases, intrinsic, embed, minimal)


def _range_isometry(block: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (block + block.conj().T))
    return v[:, w > 0.5]


def corner(sys, e: Thread) -> Subsystem:
    """The corner ``eAe`` presented on the ranges of the ``e_alpha``.

    Each coordinate becomes ``(+)_i M_{r_i}`` with ``r_i`` the block ranks of
    ``e_alpha``; blocks of rank zero disappear and a zero projection gives the
    zero algebra (flagged degenerate).
    """
    sys = _finite(sys)
    for n in sys.nodes:
        if not is_projection(e(n)):
            raise PreconditionError(f"corner needs a projection thread; coordinate {n!r} is not one")
    residual, pair = coherence_residual(e)
    if residual > COHERENCE_TOL:
        raise PreconditionError(f"projection thread is incoherent at {pair}")
    iso, live, algebras = {}, {}, {}
    for n in sys.nodes:
        vs = [_range_isometry(b) for b in e(n).blocks]
        live[n] = [i for i, v in enumerate(vs) if v.shape[1] > 0]
        iso[n] = [vs[i] for i in live[n]]
        algebras[n] = FinStarAlgebra(tuple(v.shape[1] for v in iso[n]))
    maps = {}
    for a, b in sys.pairs():
        g = sys.map(a, b)
        kept, us = [], []
        for j_new, j in enumerate(live[a]):
            i = g.kept_blocks[j]
            i_new = live[b].index(i)
            u = g.unitary(j)
            u = np.eye(sys.algebra(a).block_sizes[j]) if u is None else u
            kept.append(i_new)
            us.append(iso[a][j_new].conj().T @ u @ iso[b][i_new])
        maps[(a, b)] = ConnectingMap(b, a, algebras[b], algebras[a], tuple(kept), tuple(us) if us else None)
    intrinsic = ProjectiveSystem(sys.poset, algebras, maps, label="corner")

    def embed(node, y):
        alg = sys.algebra(node)
        blocks = [np.zeros((m, m), complex) for m in alg.block_sizes]
        for v, i, yb in zip(iso[node], live[node], y.blocks):
            blocks[i] = v @ yb @ v.conj().T
        return AlgebraElement(alg, blocks)

    bases = {n: [embed(n, y) for y in algebras[n].basis()] for n in sys.nodes}
    degenerate = all(algebras[n].is_zero for n in sys.nodes)
    sub = Subsystem(sys, "corner", bases, intrinsic, embed, None, degenerate)
    sub.isometries = iso
    return sub


# subsystem certification ---------------------------------------------------------

@dataclass
class SubsystemReport:
    kind: str
    verdicts: dict = field(default_factory=dict)
    degenerate: bool = False

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts.values())

    def verdict(self, name) -> Verdict:
        return self.verdicts.setdefault(name, Verdict(name))


def _pairs_to_check(rng, items, limit=256):
    pairs = [(i, j) for i in range(len(items)) for j in range(len(items))]
    if len(pairs) > limit:
        pick = rng.choice(len(pairs), size=limit, replace=False)
        pairs = [pairs[k] for k in sorted(pick)]
    return pairs


def certify_subsystem(sub: Subsystem, samples: int = 4, seed: int = 0) -> SubsystemReport:
    """Closure, restricted-map coherence, per-node AW* checks, kind-specific laws."""
    rng = np.random.default_rng(seed)
    sys = sub.parent
    report = SubsystemReport(sub.kind, degenerate=sub.degenerate)
    closure = report.verdict("closure")
    restricted = report.verdict("restricted-maps")
    aw = report.verdict("aw-star")
    baer_sub = report.verdict("baer-subalgebra")
    spans = {n: oracle.orthonormal_span(sub.bases[n]) for n in sys.nodes}

    for n in sys.nodes:
        basis = sub.bases[n]
        onb = spans[n]
        for i, j in _pairs_to_check(rng, basis):
            prod = basis[i] * basis[j]
            closure.within(oracle.distance_to_span(prod.to_vector(), onb), (n, i, j))
        for i, b in enumerate(basis):
            closure.within(oracle.distance_to_span(b.star().to_vector(), onb), (n, i, "adjoint"))

    for a, b in sys.pairs():
        g = sys.map(a, b)
        for i, y in enumerate(sub.bases[b]):
            restricted.within(oracle.distance_to_span(g(y).to_vector(), spans[a]), (a, b, i))

    if sub.intrinsic is not None:
        valid = validate_system(sub.intrinsic)
        restricted.record(valid.ok, 0.0, None if valid.ok else valid.failures()[:1])
        for a, b in sys.pairs():
            gi = sub.intrinsic.map(a, b)
            g = sys.map(a, b)
            for y in sub.intrinsic.algebra(b).basis():
                restricted.within(op_norm(sub.embed(a, gi(y)) - g(sub.embed(b, y))), (a, b))
        for n in sys.nodes:
            alg = sub.intrinsic.algebra(n)
            if alg.is_zero:
                continue
            basis = list(alg.basis())
            for i, j in _pairs_to_check(rng, basis, 64):
                y, z = basis[i], basis[j]
                aw.within(op_norm(sub.embed(n, y * z) - sub.embed(n, y) * sub.embed(n, z)), (n, "embed-mult"))
                aw.within(op_norm(sub.embed(n, y.star()) - sub.embed(n, y).star()), (n, "embed-star"))
            baer = certify_baer(alg, samples, int(rng.integers(2**31)))
            aw.record(baer.ok, baer.max_residual, None if baer.ok else (n, baer.counterexamples[:1]))

    # Baer *-subalgebra: supports of elements of B_alpha, and their suprema, stay in B_alpha
    for n in sys.nodes:
        basis = sub.bases[n]
        if not basis:
            continue
        for _ in range(samples):
            size = int(rng.integers(1, 4))
            S = []
            for _ in range(size):
                coeff = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
                coeff[rng.random(len(basis)) < 0.5] = 0.0
                x = sys.algebra(n).zero()
                for c, y in zip(coeff, basis):
                    x = x + complex(c) * y
                S.append(x)
            s = sup_family([right_support(x) for x in S])
            baer_sub.within(oracle.distance_to_span(s.to_vector(), spans[n]), (n, "sup-of-supports"))

    if sub.kind in ("masa", "center"):
        comm = report.verdict("commutative")
        span_proj = report.verdict("projection-span")
        for n in sys.nodes:
            basis = sub.bases[n]
            for i, j in _pairs_to_check(rng, basis, 128):
                comm.within(op_norm(basis[i].commutator(basis[j])), (n, i, j))
            projections = sub.minimal_projections[n]
            dim = oracle.span_dim(basis)
            span_proj.record(oracle.span_dim(projections) == dim, 0.0, (n, dim))
    if sub.kind == "masa":
        maximal = report.verdict("maximal")
        for n in sys.nodes:
            basis = sub.bases[n]
            dim = oracle.span_dim(basis)
            if not basis:
                maximal.record(sys.algebra(n).is_zero, 0.0, n)
                continue
            comm_dim = oracle.commutant_basis(basis).shape[1]
            maximal.record(comm_dim == dim, 0.0, (n, comm_dim, dim))
    if sub.kind == "center":
        oracle_check = report.verdict("center-oracle")
        for n in sys.nodes:
            alg = sys.algebra(n)
            z = oracle.commutant_basis(list(alg.basis()))
            dim = oracle.span_dim(sub.bases[n])
            ok = z.shape[1] == dim == alg.num_blocks
            worst = max((oracle.distance_to_span(z[:, k], spans[n]) for k in range(z.shape[1])), default=0.0)
            oracle_check.record(ok and worst <= TOL, worst, (n, z.shape[1], dim))
    return report


# the approximation lemma -----------------------------------------------------------

@dataclass(frozen=True)
class KaplanskyResult:
    projection: object
    multiplier: object
    residual: float
    certificate_residual: float


def _kaplansky_node(minimal: Sequence[AlgebraElement], x: AlgebraElement, eps: float):
    alg = x.algebra
    coeffs = [trace(p * x) / trace(p) for p in minimal]
    approx = alg.zero()
    for c, p in zip(coeffs, minimal):
        approx = approx + c * p
    off = op_norm(x - approx)
    if off > TOL * max(1.0, op_norm(x)):
        raise PreconditionError(f"element is not in the commutative subalgebra (distance {off:.3e})")
    e, y = alg.zero(), alg.zero()
    for c, p in zip(coeffs, minimal):
        if abs(c) > eps / 2:
            e = e + p
            y = y + (1.0 / c) * p
    return Projection(e, check=False), y


def kaplansky_approx(sub: Subsystem | None, x, eps: float, node=None) -> KaplanskyResult:
    """Projection ``e`` in a commutative ``B`` with ``e = x y`` and ``||x - e x|| < eps``.

    ``e`` keeps the spectral coordinates of ``x`` larger than ``eps / 2`` in
    modulus; ``y`` inverts ``x`` there. ``x`` may be a coordinate element (at
    ``node``, default the only node) or a thread.
    """
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    if sub is None:
        sub = masa_containing(x)
    if sub.minimal_projections is None:
        raise PreconditionError("subalgebra has no recorded minimal projections")
    if isinstance(x, Thread):
        sys = sub.parent
        parts = {n: _kaplansky_node(sub.minimal_projections[n], x(n), eps) for n in sys.nodes}
        e = lift({n: p[0] for n, p in parts.items()}, sys)
        y = lift({n: p[1] for n, p in parts.items()}, sys)
        residual = max(op_norm(x(n) - e(n) * x(n)) for n in sys.nodes)
        cert = max(op_norm(e(n) - x(n) * y(n)) for n in sys.nodes)
        return KaplanskyResult(e, y, residual, cert)
    if node is None:
        node = sub.parent.nodes[0]
    e, y = _kaplansky_node(sub.minimal_projections[node], x, eps)
    return KaplanskyResult(e, y, op_norm(x - e * x), op_norm(e - x * y))


# suprema of orthogonal families ------------------------------------------------------

def coordinatewise_sup(family: Sequence[Thread]) -> tuple[Thread, float]:
    """``p_alpha = sup pi_alpha(e_lambda)`` at every node, lifted; returns coherence residual."""
    sys = family[0].system
    return lift_coordinatewise(sys, lambda n: sup_family([e(n) for e in family]))


def orthogonal_sup_laws(family: Sequence[Thread], x: Thread, sup: Thread | None = None,
                        tol: float = TOL) -> dict:
    """Annihilation and commutation pass from an orthogonal family to its supremum."""
    sys = _finite(x.system)
    nodes = sys.nodes
    ortho = max((op_norm(e(n) * f(n)) for i, e in enumerate(family) for f in family[i + 1:] for n in nodes),
                default=0.0)
    if ortho > tol:
        raise PreconditionError(f"family is not pairwise orthogonal (residual {ortho:.3e})")
    if sup is None:
        sup, _ = coordinatewise_sup(family)
    kill = max(op_norm(x(n) * e(n)) for e in family for n in nodes)
    kill_sup = max(op_norm(x(n) * sup(n)) for n in nodes)
    comm = max(op_norm(x(n) * e(n) - e(n) * x(n)) for e in family for n in nodes)
    comm_sup = max(op_norm(x(n) * sup(n) - sup(n) * x(n)) for n in nodes)
    return {
        "annihilation": {"premise": kill <= tol, "conclusion": kill_sup <= tol,
                         "ok": kill > tol or kill_sup <= tol, "residual": kill_sup},
        "commutation": {"premise": comm <= tol, "conclusion": comm_sup <= tol,
                        "ok": comm > tol or comm_sup <= tol, "residual": comm_sup},
    }


# central annihilators of right ideals ---------------------------------------------------

def ideal_annihilator_central(sys, T: Sequence[Thread]):
    """Right annihilator of the right ideal generated by ``T``, and its centrality.

    Returns ``(g, certificate)``; the certificate holds the coherence residual,
    the worst ``||g a - a g||`` over a basis of every coordinate algebra and the
    oracle dimension check of ``R(TA) = gA`` at every node.
    """
    sys = _finite(sys)

    def annihilating(n):
        alg = sys.algebra(n)
        gens = [t(n) * a for t in T for a in alg.basis()]
        return right_projection(gens)

    g, coherence = lift_coordinatewise(sys, annihilating)
    central, dims_ok = 0.0, True
    for n in sys.nodes:
        alg = sys.algebra(n)
        basis = list(alg.basis())
        for a in basis:
            central = max(central, op_norm(g(n) * a - a * g(n)))
        gens = [t(n) * a for t in T for a in basis]
        dims_ok &= oracle.right_annihilator_basis(gens).shape[1] == principal_dim(g(n))
    return g, {"coherence": coherence, "centrality": central, "oracle_dims": dims_ok,
               "ok": coherence <= TOL and central <= TOL and dims_ok}


# the equivalence verifier -----------------------------------------------------------------

@dataclass
class EquivalenceReport:
    baer: Verdict
    kaplansky_sup: Verdict
    kaplansky_masa: Verdict
    coordinatewise_aw: Verdict

    @property
    def verdicts(self) -> list[Verdict]:
        return [self.baer, self.kaplansky_sup, self.kaplansky_masa, self.coordinatewise_aw]

    @property
    def agreement(self) -> bool:
        return len({v.ok for v in self.verdicts}) == 1

    @property
    def ok(self) -> bool:
        return self.agreement and all(v.ok for v in self.verdicts)


def check_limit_annihilator(sys, S: Sequence[Thread]) -> tuple[bool, float, dict]:
    """``R_A(S) = gA`` for the coordinatewise-lifted ``g``, against the limit oracle."""
    g, coherence = lift_coordinatewise(sys, lambda n: right_projection([s(n) for s in S]))
    nodes = _finite(sys).nodes
    kill = max(op_norm(s(n) * g(n)) / max(1.0, op_norm(s(n))) for s in S for n in nodes)
    proj = max(op_norm(g(n) * g(n) - g(n)) for n in nodes)
    dim, basis = limit_right_annihilator_dim(sys, S)
    gdim = limit_principal_dim(sys, g)
    member = 0.0
    for k in range(basis.shape[1]):
        coords = split_thread_vector(sys, basis[:, k])
        member = max(member, max(op_norm(x - g(n) * x) for n, x in coords.items()))
    residual = max(coherence, kill, proj, member)
    ok = residual <= TOL and dim == gdim
    return ok, residual, {"generator": g, "oracle_dim": dim, "generator_dim": gdim}


def verify_equivalence(sys, samples: int = 10, seed: int = 0) -> EquivalenceReport:
    """Run all four characterisations of a locally AW*-algebra on one system."""
    from .sampling import (
        random_orthogonal_family,
        random_projection,
        random_selfadjoint_thread,
        random_thread,
    )

    valid = validate_system(sys)
    if not valid.ok:
        raise PreconditionError(f"system failed validation: {valid.failures()[:1]}")
    sys = _finite(sys)
    rng = np.random.default_rng(seed)
    nodes = sys.nodes
    top = sys.top()
    top_alg = sys.algebra(top)

    baer = Verdict("baer")
    for k in range(samples):
        S = [random_thread(rng, sys) for _ in range(int(rng.integers(1, 4)))]
        ok, residual, info = check_limit_annihilator(sys, S)
        baer.record(ok, residual, {"sample": k, "oracle_dim": info["oracle_dim"],
                                   "generator_dim": info["generator_dim"]})

    coord = Verdict("coordinatewise-aw")
    for n in nodes:
        rep = certify_baer(sys.algebra(n), max(2, samples // 2), int(rng.integers(2**31)))
        coord.record(rep.ok, rep.max_residual, None if rep.ok else (n, rep.counterexamples[:1]))

    sups = Verdict("kaplansky-orthogonal-sup")
    for k in range(samples):
        fam_top = random_orthogonal_family(rng, top_alg, int(rng.integers(1, 4)))
        family = [sys.push(p) for p in fam_top]
        p, coherence = coordinatewise_sup(family)
        total = family[0]
        for e in family[1:]:
            total = total + e
        upper = sys.push(sup_family(list(fam_top) + [random_projection(rng, top_alg)]))
        residual = max(
            coherence,
            max(op_norm(p(n) - total(n)) for n in nodes),
            max(op_norm(e(n) - e(n) * p(n)) for e in family for n in nodes),
            max(op_norm(p(n) - p(n) * upper(n)) for n in nodes),
        )
        sups.within(residual, {"sample": k})

    masas = Verdict("kaplansky-masa")
    for k in range(max(1, samples // 5)):
        x = random_selfadjoint_thread(rng, sys)
        sub = masa_containing(x)
        rep = certify_subsystem(sub, samples=1, seed=int(rng.integers(2**31)))
        masas.record(rep.ok, max(v.residual for v in rep.verdicts.values()),
                     None if rep.ok else {"sample": k, "failed": [v.name for v in rep.verdicts.values() if not v.ok]})
        # x is a combination of projection threads of B
        eig = hermitian_eigen(x(top))
        coeffs = np.concatenate(eig.eigenvalues)
        top_proj = _frame_projections(top_alg, eig.unitary.blocks)
        approx = sys.zero()
        for c, q in zip(coeffs, top_proj):
            approx = approx + float(c) * sys.push(q)
        masas.within(max(op_norm(x(n) - approx(n)) for n in nodes), {"sample": k, "check": "span"})

    return EquivalenceReport(baer, sups, masas, coord)


# bounded part ----------------------------------------------------------------------

@dataclass
class BoundedPartReport:
    horizon: int | None
    verdicts: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts.values())


def bounded_part(sys, horizon: int | None = None, samples: int = 10, seed: int = 0,
                 elements: Sequence[Thread] = ()) -> BoundedPartReport:
    """Certify that projections are bounded and that ``b(A)`` is Baer.

    On a finite system every thread is bounded, so ``b(A) = A`` with the max
    norm. On a chain the checks run on the prefix up to ``horizon`` and the
    given ``elements`` receive horizon-qualified boundedness verdicts.
    """
    from .sampling import random_projection_thread, random_thread

    rng = np.random.default_rng(seed)
    h = None
    base = sys
    if sys.is_lazy:
        h = sys.horizon if horizon is None else horizon
        base = sys.finite(h)
    report = BoundedPartReport(h)
    projections = report.verdicts.setdefault("projections-bounded", Verdict("projections-bounded"))
    unit_norm = sup_norm(base.unit()).sup_over_horizon
    report.verdicts.setdefault("unit-normalised", Verdict("unit-normalised")).within(abs(unit_norm - 1.0))
    for _ in range(samples):
        e = random_projection_thread(rng, base)
        v = sup_norm(e)
        projections.record(v.bounded and v.sup_over_horizon <= 1 + 1e-9, max(0.0, v.sup_over_horizon - 1.0))
    baer = report.verdicts.setdefault("bounded-part-baer", Verdict("bounded-part-baer"))
    for k in range(samples):
        S = [random_thread(rng, base) for _ in range(int(rng.integers(1, 4)))]
        ok, residual, info = check_limit_annihilator(base, S)
        g = info["generator"]
        gv = sup_norm(g)
        baer.record(ok and gv.bounded and gv.sup_over_horizon <= 1 + 1e-9, residual,
                    {"sample": k, "oracle_dim": info["oracle_dim"], "generator_dim": info["generator_dim"]})
    if elements:
        report.elements = {x.label or str(i): sup_norm(x, h) for i, x in enumerate(elements)}
    return report
