"""Projective systems of finite-dimensional C*-algebras and their threads.

A finite system is presented by a directed poset of labelled nodes, one
:class:`FinStarAlgebra` per node and a connecting map ``g[alpha, beta]`` from
the algebra at ``beta`` onto the algebra at ``alpha`` for every
``alpha <= beta``. Connecting maps delete blocks and conjugate the surviving
ones by unitaries, which makes them surjective *-homomorphisms.

Countable chains ``1 <= 2 <= ...`` are modelled lazily by :class:`ChainSystem`
and are only ever evaluated up to a horizon.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import CoherenceError, HorizonError, PreconditionError, StructureError
from .matstar import AlgebraElement, FinStarAlgebra, op_norm

Node = Hashable

COHERENCE_TOL = 1e-8
UNITARY_TOL = 1e-8


# connecting maps -------------------------------------------------------------

@dataclass(frozen=True)
class ConnectingMap:
    """``x -> (U_j x[kept_blocks[j]] U_j*)_j`` from ``source`` onto ``target``.

    ``unitaries`` is ``None`` (all identities) or one entry per target block,
    where an entry may itself be ``None``.
    """

    source: Node
    target: Node
    source_algebra: FinStarAlgebra
    target_algebra: FinStarAlgebra
    kept_blocks: tuple[int, ...]
    unitaries: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "kept_blocks", tuple(int(k) for k in self.kept_blocks))
        if self.unitaries is not None:
            us = tuple(None if u is None else np.array(u, dtype=complex) for u in self.unitaries)
            for u in us:
                if u is not None:
                    u.setflags(write=False)
            object.__setattr__(self, "unitaries", us)

    def unitary(self, j: int) -> np.ndarray | None:
        if self.unitaries is None:
            return None
        return self.unitaries[j]

    def structural_errors(self) -> list[str]:
        errors = []
        tgt, src = self.target_algebra.block_sizes, self.source_algebra.block_sizes
        if len(self.kept_blocks) != len(tgt):
            return [f"map {self.source!r}->{self.target!r}: {len(self.kept_blocks)} kept blocks "
                    f"for {len(tgt)} target blocks"]
        if len(set(self.kept_blocks)) != len(self.kept_blocks):
            errors.append(f"map {self.source!r}->{self.target!r}: kept blocks not injective")
        for j, k in enumerate(self.kept_blocks):
            if not 0 <= k < len(src):
                errors.append(f"map {self.source!r}->{self.target!r}: block {k} out of range")
                continue
            if src[k] != tgt[j]:
                errors.append(f"map {self.source!r}->{self.target!r}: block {k} has size {src[k]}, "
                              f"target block {j} has size {tgt[j]}")
        if self.unitaries is not None:
            if len(self.unitaries) != len(tgt):
                errors.append(f"map {self.source!r}->{self.target!r}: wrong number of unitaries")
            else:
                for j, u in enumerate(self.unitaries):
                    if u is None:
                        continue
                    if u.shape != (tgt[j], tgt[j]):
                        errors.append(f"map {self.source!r}->{self.target!r}: unitary {j} has shape {u.shape}")
                    elif np.linalg.norm(u.conj().T @ u - np.eye(tgt[j]), 2) > UNITARY_TOL:
                        errors.append(f"map {self.source!r}->{self.target!r}: matrix {j} is not unitary")
        return errors

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        if x.algebra.block_sizes != self.source_algebra.block_sizes:
            raise StructureError(
                f"map {self.source!r}->{self.target!r} applied to element of {x.algebra}"
            )
        blocks = []
        for j, k in enumerate(self.kept_blocks):
            b = x.blocks[k]
            u = self.unitary(j)
            blocks.append(b if u is None else u @ b @ u.conj().T)
        return AlgebraElement._wrap(self.target_algebra, blocks)

    def then(self, outer: "ConnectingMap") -> "ConnectingMap":
        """Composite ``outer o self`` (apply ``self`` first)."""
        if outer.source_algebra.block_sizes != self.target_algebra.block_sizes:
            raise StructureError("maps do not compose")
        kept, us = [], []
        for j, i in enumerate(outer.kept_blocks):
            kept.append(self.kept_blocks[i])
            inner_u, outer_u = self.unitary(i), outer.unitary(j)
            if inner_u is None:
                us.append(outer_u)
            elif outer_u is None:
                us.append(inner_u)
            else:
                us.append(outer_u @ inner_u)
        unitaries = None if all(u is None for u in us) else tuple(us)
        return ConnectingMap(self.source, outer.target, self.source_algebra,
                             outer.target_algebra, tuple(kept), unitaries)

    @classmethod
    def identity(cls, node: Node, algebra: FinStarAlgebra) -> "ConnectingMap":
        return cls(node, node, algebra, algebra, tuple(range(algebra.num_blocks)))


# index posets ------------------------------------------------------------------

class IndexPoset:
    """A finite poset given by generating pairs ``(a, b)`` meaning ``a <= b``.

    The reflexive-transitive closure is taken; antisymmetry and directedness
    are checked by :meth:`problems`, not assumed.
    """

    def __init__(self, nodes: Sequence[Node], pairs: Iterable[tuple[Node, Node]] = ()):
        self.nodes = tuple(nodes)
        if len(set(self.nodes)) != len(self.nodes):
            raise StructureError("duplicate node labels")
        index = {n: i for i, n in enumerate(self.nodes)}
        size = len(self.nodes)
        rel = np.eye(size, dtype=bool)
        self.generating_pairs = []
        for a, b in pairs:
            for n in (a, b):
                if n not in index:
                    raise StructureError(f"order pair refers to unknown node {n!r}")
            rel[index[a], index[b]] = True
            self.generating_pairs.append((a, b))
        for k in range(size):
            rel |= rel[:, [k]] & rel[[k], :]
        self._index = index
        self._rel = rel

    def leq(self, a: Node, b: Node) -> bool:
        return bool(self._rel[self._index[a], self._index[b]])

    def __contains__(self, node) -> bool:
        return node in self._index

    def pairs(self) -> list[tuple[Node, Node]]:
        """All comparable pairs ``(a, b)`` with ``a <= b`` and ``a != b``."""
        return [(a, b) for a in self.nodes for b in self.nodes if a != b and self.leq(a, b)]

    def triples(self) -> list[tuple[Node, Node, Node]]:
        return [(a, b, c) for a, b, c in itertools.product(self.nodes, repeat=3)
                if self.leq(a, b) and self.leq(b, c)]

    def upper_bounds(self, a: Node, b: Node) -> list[Node]:
        return [c for c in self.nodes if self.leq(a, c) and self.leq(b, c)]

    def top(self) -> Node:
        tops = [c for c in self.nodes if all(self.leq(a, c) for a in self.nodes)]
        if not tops:
            raise StructureError("poset has no greatest element (not directed)")
        return tops[0]

    def problems(self) -> list[tuple[str, tuple]]:
        out = []
        for a, b in itertools.combinations(self.nodes, 2):
            if self.leq(a, b) and self.leq(b, a):
                out.append(("antisymmetry", (a, b)))
            if not self.upper_bounds(a, b):
                out.append(("directedness", (a, b)))
        return out

    def cover_path(self, a: Node, b: Node) -> list[Node]:
        """Deterministic chain ``a = c_0 < ... < c_k = b`` through generating pairs."""
        succ: dict[Node, list[Node]] = {n: [] for n in self.nodes}
        for x, y in self.generating_pairs:
            if x != y:
                succ[x].append(y)
        frontier, seen = [[a]], {a}
        while frontier:
            nxt = []
            for path in frontier:
                if path[-1] == b:
                    return path
                for y in succ[path[-1]]:
                    if y not in seen and self.leq(y, b):
                        seen.add(y)
                        nxt.append(path + [y])
            frontier = nxt
        raise StructureError(f"no chain of generating pairs from {a!r} to {b!r}")


# systems -----------------------------------------------------------------------

class ProjectiveSystem:
    """Finite projective system ``{A_alpha; g[alpha, beta]}``."""

    is_lazy = False

    def __init__(self, poset: IndexPoset, algebras: Mapping[Node, FinStarAlgebra],
                 maps: Mapping[tuple[Node, Node], ConnectingMap] | None = None, label: str = ""):
        self.poset = poset
        self.label = label
        missing = [n for n in poset.nodes if n not in algebras]
        if missing:
            raise StructureError(f"no algebra for nodes {missing}")
        self._algebras = {n: algebras[n] for n in poset.nodes}
        given = dict(maps or {})
        for (a, b) in given:
            if a not in poset or b not in poset:
                raise StructureError(f"map ({a!r}, {b!r}) refers to an unknown node")
            if not poset.leq(a, b):
                raise StructureError(f"map given for incomparable pair ({a!r}, {b!r})")
        self.explicit_maps = tuple(sorted(given, key=lambda p: (poset.nodes.index(p[0]), poset.nodes.index(p[1]))))
        self._maps: dict[tuple[Node, Node], ConnectingMap] = {}
        for n in poset.nodes:
            self._maps[(n, n)] = given.get((n, n), ConnectingMap.identity(n, self._algebras[n]))
        for a, b in poset.pairs():
            if (a, b) in given:
                self._maps[(a, b)] = given[(a, b)]
        for a, b in poset.pairs():
            if (a, b) not in self._maps:
                self._maps[(a, b)] = self._derive(a, b)

    def _derive(self, a: Node, b: Node) -> ConnectingMap:
        path = self.poset.cover_path(a, b)
        composite = None
        for lo, hi in zip(path[:-1], path[1:]):
            if (lo, hi) not in self._maps:
                raise StructureError(f"no connecting map for generating pair ({lo!r}, {hi!r})")
            step = self._maps[(lo, hi)]
            composite = step if composite is None else step.then(composite)
        return composite

    @property
    def nodes(self) -> tuple:
        return self.poset.nodes

    def check_node(self, node: Node):
        if node not in self.poset:
            raise StructureError(f"unknown node {node!r}")

    def algebra(self, node: Node) -> FinStarAlgebra:
        self.check_node(node)
        return self._algebras[node]

    def leq(self, a: Node, b: Node) -> bool:
        return self.poset.leq(a, b)

    def map(self, alpha: Node, beta: Node) -> ConnectingMap:
        """``g[alpha, beta]: A_beta -> A_alpha`` for ``alpha <= beta``."""
        self.check_node(alpha)
        self.check_node(beta)
        try:
            return self._maps[(alpha, beta)]
        except KeyError:
            raise StructureError(f"{alpha!r} is not below {beta!r}") from None

    def pairs(self):
        return self.poset.pairs()

    def top(self) -> Node:
        return self.poset.top()

    def unit(self) -> "Thread":
        return Thread(self, {n: self.algebra(n).unit() for n in self.nodes})

    def zero(self) -> "Thread":
        return Thread(self, {n: self.algebra(n).zero() for n in self.nodes})

    def push(self, x_top: AlgebraElement, top: Node | None = None) -> "Thread":
        """The thread determined by its coordinate at the greatest node."""
        top = self.top() if top is None else top
        return Thread(self, {n: self.map(n, top)(x_top) for n in self.nodes})

    def finite(self) -> "ProjectiveSystem":
        return self

    @classmethod
    def single(cls, algebra: FinStarAlgebra, node: Node = "A") -> "ProjectiveSystem":
        return cls(IndexPoset([node]), {node: algebra})

    def __repr__(self):
        parts = ", ".join(f"{n!r}: {self._algebras[n]}" for n in self.nodes)
        return f"ProjectiveSystem({{{parts}}})"


class ChainSystem:
    """The chain ``1 <= 2 <= ...`` with ``A_k = M_n (+) ... (+) M_n`` (``k`` copies).

    The map ``A_k -> A_j`` keeps the first ``j`` summands. Only nodes up to
    ``horizon`` may be evaluated.
    """

    is_lazy = True

    def __init__(self, block_size: int = 1, horizon: int = 50, label: str = ""):
        if block_size < 1 or horizon < 1:
            raise StructureError("block size and horizon must be positive")
        self.block_size = int(block_size)
        self.horizon = int(horizon)
        self.label = label

    def check_node(self, node):
        if not isinstance(node, (int, np.integer)) or isinstance(node, bool) or node < 1:
            raise StructureError(f"chain nodes are positive integers, got {node!r}")
        if node > self.horizon:
            raise HorizonError(node, self.horizon)

    @property
    def nodes(self) -> tuple:
        return tuple(range(1, self.horizon + 1))

    def algebra(self, node: int) -> FinStarAlgebra:
        self.check_node(node)
        return FinStarAlgebra((self.block_size,) * int(node))

    def leq(self, a: int, b: int) -> bool:
        return a <= b

    def map(self, alpha: int, beta: int) -> ConnectingMap:
        self.check_node(alpha)
        self.check_node(beta)
        if alpha > beta:
            raise StructureError(f"{alpha!r} is not below {beta!r}")
        return ConnectingMap(beta, alpha, self.algebra(beta), self.algebra(alpha), tuple(range(alpha)))

    def pairs(self):
        return [(a, b) for a in self.nodes for b in self.nodes if a < b]

    def top(self) -> int:
        return self.horizon

    def unit(self) -> "Thread":
        return Thread(self, rule=lambda k: self.algebra(k).unit(), declared_bound=1.0,
                      monotone=True, label="unit")

    def zero(self) -> "Thread":
        return Thread(self, rule=lambda k: self.algebra(k).zero(), declared_bound=0.0,
                      monotone=True, label="zero")

    def push(self, x_top: AlgebraElement, top=None) -> "Thread":
        return self.finite().push(x_top)

    def finite(self, horizon: int | None = None) -> ProjectiveSystem:
        """Explicit finite system on the nodes ``1..horizon``."""
        h = self.horizon if horizon is None else horizon
        if h > self.horizon:
            raise HorizonError(h, self.horizon)
        nodes = list(range(1, h + 1))
        poset = IndexPoset(nodes, [(k, k + 1) for k in nodes[:-1]])
        algebras = {k: self.algebra(k) for k in nodes}
        maps = {(k, k + 1): self.map(k, k + 1) for k in nodes[:-1]}
        return ProjectiveSystem(poset, algebras, maps, label=self.label)

    def __repr__(self):
        return f"ChainSystem(block_size={self.block_size}, horizon={self.horizon})"


# threads ------------------------------------------------------------------------

class Thread:
    """A coherent family ``{x_alpha}``: an element of the projective limit.

    Either explicit coordinates (finite systems) or a pure ``rule`` mapping a
    node to its coordinate (chains). Arithmetic is coordinatewise.
    """

    def __init__(self, system, coords: Mapping[Node, AlgebraElement] | None = None,
                 rule: Callable[[Node], AlgebraElement] | None = None,
                 declared_bound: float | None = None, monotone: bool = False, label: str = ""):
        if (coords is None) == (rule is None):
            raise StructureError("a thread needs exactly one of coords or rule")
        self.system = system
        self.label = label
        self.declared_bound = declared_bound
        self.monotone = monotone
        self._rule = rule
        self._coords = None
        if coords is not None:
            self._coords = {}
            for n in system.nodes:
                if n not in coords:
                    raise StructureError(f"thread has no coordinate at {n!r}")
                x = coords[n]
                if x.algebra.block_sizes != system.algebra(n).block_sizes:
                    raise StructureError(f"coordinate at {n!r} lives in {x.algebra}, "
                                         f"expected {system.algebra(n)}")
                self._coords[n] = x

    def __call__(self, node: Node) -> AlgebraElement:
        return project(self, node)

    @property
    def coords(self) -> dict:
        return {n: self(n) for n in self.system.nodes}

    def _combine(self, other, f):
        if isinstance(other, Thread):
            if other.system is not self.system:
                raise StructureError("threads over different systems")
            if self._coords is not None and other._coords is not None:
                return Thread(self.system, {n: f(self._coords[n], other._coords[n]) for n in self.system.nodes})
            return Thread(self.system, rule=lambda k: f(self(k), other(k)))
        if self._coords is not None:
            return Thread(self.system, {n: f(x, other) for n, x in self._coords.items()})
        return Thread(self.system, rule=lambda k: f(self(k), other))

    def map(self, f) -> "Thread":
        if self._coords is not None:
            return Thread(self.system, {n: f(x) for n, x in self._coords.items()})
        return Thread(self.system, rule=lambda k: f(self(k)))

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    __matmul__ = __mul__

    def __rmul__(self, c):
        return self.map(lambda x: c * x)

    def __neg__(self):
        return self.map(lambda x: -x)

    def star(self) -> "Thread":
        return self.map(lambda x: x.star())

    def commutator(self, other: "Thread") -> "Thread":
        return self * other - other * self

    def __repr__(self):
        name = f" {self.label!r}" if self.label else ""
        return f"Thread{name}(over {self.system!r})"


def project(x: Thread, alpha: Node) -> AlgebraElement:
    """The natural projection ``pi_alpha``."""
    x.system.check_node(alpha)
    if x._coords is not None:
        return x._coords[alpha]
    value = x._rule(alpha)
    if value.algebra.block_sizes != x.system.algebra(alpha).block_sizes:
        raise StructureError(f"rule produced an element of {value.algebra} at node {alpha!r}")
    return value


def coherence_residual(x: Thread, pairs=None) -> tuple[float, tuple | None]:
    """Largest ``||x_alpha - g[alpha, beta](x_beta)||`` and the pair attaining it."""
    sys = x.system
    if pairs is None:
        pairs = sys.pairs() if not sys.is_lazy else [(k, k + 1) for k in range(1, sys.horizon)]
    worst, where = 0.0, None
    for a, b in pairs:
        xa, xb = x(a), x(b)
        r = op_norm(xa - sys.map(a, b)(xb)) / max(1.0, op_norm(xb))
        if r > worst:
            worst, where = r, (a, b)
    return worst, where


def lift(coords, system, tol: float = COHERENCE_TOL, **kwargs) -> Thread:
    """Build a thread from coordinates (or a rule), rejecting incoherent input.

    For chains only consecutive pairs up to the horizon are checked; since
    chain maps compose, that covers every comparable pair in range.
    """
    if callable(coords):
        x = Thread(system, rule=coords, **kwargs)
    else:
        x = Thread(system, dict(coords), **kwargs)
    pairs = system.pairs() if not system.is_lazy else [(k, k + 1) for k in range(1, system.horizon)]
    for a, b in pairs:
        xa, xb = x(a), x(b)
        r = op_norm(xa - system.map(a, b)(xb))
        if r > tol * max(1.0, op_norm(xb)):
            raise CoherenceError(a, b, r)
    return x


def seminorm(x: Thread, alpha: Node) -> float:
    """``||x||_alpha = ||pi_alpha(x)||``."""
    return op_norm(project(x, alpha))


# boundedness ---------------------------------------------------------------------

BOUNDED = "bounded"
EXCEEDS = "exceeds-bound"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class BoundednessVerdict:
    status: str
    sup_over_horizon: float
    horizon: int
    witness: Node | None = None

    @property
    def bounded(self) -> bool:
        return self.status == BOUNDED


def sup_norm(x: Thread, horizon: int | None = None) -> BoundednessVerdict:
    """``sup_alpha ||x||_alpha`` with an honest verdict.

    Finite systems give the exact maximum. On a chain the prefix ``1..horizon``
    is probed: a declared bound that is violated yields the first violating
    node as witness; a respected bound is certified only when the thread is
    flagged monotone beyond the horizon; anything else is inconclusive.
    """
    sys = x.system
    if not sys.is_lazy:
        values = [seminorm(x, n) for n in sys.nodes]
        return BoundednessVerdict(BOUNDED, max(values), len(values))
    h = sys.horizon if horizon is None else int(horizon)
    if h < 1:
        raise PreconditionError("horizon must be >= 1")
    sup = 0.0
    for k in range(1, h + 1):
        value = seminorm(x, k)
        sup = max(sup, value)
        if x.declared_bound is not None and value > x.declared_bound * (1 + 1e-12):
            return BoundednessVerdict(EXCEEDS, sup, k, witness=k)
    if x.declared_bound is not None and x.monotone:
        return BoundednessVerdict(BOUNDED, sup, h)
    return BoundednessVerdict(INCONCLUSIVE, sup, h)


# validation -----------------------------------------------------------------------

@dataclass
class ValidationReport:
    records: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.records)

    def failures(self) -> list[dict]:
        return [r for r in self.records if not r["ok"]]

    def add(self, check, ok, witness=None, residual=0.0):
        self.records.append({"check": check, "ok": bool(ok), "witness": witness, "residual": float(residual)})


def _homomorphism_residual(g: ConnectingMap) -> tuple[float, float]:
    """Residuals of the *-homomorphism identities on matrix units, and of ``g(1) = 1``.

    Products of units from different source blocks vanish on both sides, since
    each target block is fed by a single source block, so only same-block pairs
    are multiplied.
    """
    src = g.source_algebra
    worst = 0.0
    for k, n in enumerate(src.block_sizes):
        units = [src.matrix_unit(k, i, j) for i in range(n) for j in range(n)]
        images = [g(e) for e in units]
        for e, ge in zip(units, images):
            worst = max(worst, op_norm(g(e.star()) - ge.star()))
            for f, gf in zip(units, images):
                worst = max(worst, op_norm(g(e * f) - ge * gf))
    unit = op_norm(g(src.unit()) - g.target_algebra.unit())
    return worst, unit


def _surjective(g: ConnectingMap) -> bool:
    from .oracle import span_dim

    return span_dim(g(e) for e in g.source_algebra.basis()) == g.target_algebra.dim


def validate_system(sys, tol: float = COHERENCE_TOL, max_nodes: int = 10) -> ValidationReport:
    """Certify the poset, the maps and the composition law.

    Chains are validated on the finite prefix of at most ``max_nodes`` nodes.
    """
    report = ValidationReport()
    if sys.is_lazy:
        sys = sys.finite(min(sys.horizon, max_nodes))
    poset = sys.poset
    problems = poset.problems()
    report.add("poset-order", not any(p[0] == "antisymmetry" for p in problems),
               witness=[p[1] for p in problems if p[0] == "antisymmetry"] or None)
    report.add("poset-directed", not any(p[0] == "directedness" for p in problems),
               witness=[p[1] for p in problems if p[0] == "directedness"] or None)
    if problems:
        return report
    for n in sys.nodes:
        g = sys.map(n, n)
        errs = g.structural_errors()
        residual = 0.0 if errs else max((op_norm(g(e) - e) for e in sys.algebra(n).basis()), default=0.0)
        report.add("identity-map", not errs and residual <= tol, witness=(n, n) if errs or residual > tol else None,
                   residual=residual)
    structurally_ok = True
    for a, b in sys.pairs():
        g = sys.map(a, b)
        errs = g.structural_errors()
        if errs:
            structurally_ok = False
            report.add("map-structure", False, witness={"pair": (a, b), "errors": errs})
            continue
        hom, unit = _homomorphism_residual(g)
        report.add("map-star-homomorphism", hom <= tol and unit <= tol,
                   witness=(a, b) if hom > tol or unit > tol else None, residual=max(hom, unit))
        report.add("map-surjective", _surjective(g), witness=None if _surjective(g) else (a, b))
    if not structurally_ok:
        return report
    worst, witness = 0.0, None
    for a, b, c in poset.triples():
        if len({a, b, c}) < 2:
            continue
        lhs_map, mid_map, full = sys.map(a, b), sys.map(b, c), sys.map(a, c)
        for e in sys.algebra(c).basis():
            r = op_norm(lhs_map(mid_map(e)) - full(e))
            if r > worst:
                worst, witness = r, (a, b, c)
    report.add("composition-law", worst <= tol, witness=witness if worst > tol else None, residual=worst)
    return report


# re-presentation ------------------------------------------------------------------

def represent(sys: ProjectiveSystem, frames: Mapping[Node, Sequence[np.ndarray]]):
    """Conjugate every coordinate algebra by fixed unitaries and transport the maps.

    Returns the new system and a function sending threads (or coordinate
    elements, with their node) of ``sys`` to the new presentation.
    """

    def phi(node, x: AlgebraElement) -> AlgebraElement:
        return AlgebraElement(x.algebra, [w @ b @ w.conj().T for w, b in zip(frames[node], x.blocks)])

    maps = {}
    for a, b in sys.pairs():
        g = sys.map(a, b)
        us = []
        for j, k in enumerate(g.kept_blocks):
            u = g.unitary(j)
            u = np.eye(g.target_algebra.block_sizes[j]) if u is None else u
            us.append(frames[a][j] @ u @ frames[b][k].conj().T)
        maps[(a, b)] = ConnectingMap(b, a, g.source_algebra, g.target_algebra, g.kept_blocks, tuple(us))
    new = ProjectiveSystem(sys.poset, {n: sys.algebra(n) for n in sys.nodes}, maps, label=sys.label)

    def transport(x, node=None):
        if isinstance(x, Thread):
            return Thread(new, {n: phi(n, x(n)) for n in sys.nodes})
        return phi(node, x)

    return new, transport
