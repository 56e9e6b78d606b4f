"""The projection lattice of a finite-dimensional C*-algebra."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import oracle
from .errors import PreconditionError, StructureError
from .matstar import (
    TOL,
    AlgebraElement,
    FinStarAlgebra,
    is_projection,
    op_norm,
    projection_ranks,
    range_projection,
)


class Projection(AlgebraElement):
    """A self-adjoint idempotent, with per-block ranks computed on demand."""

    __slots__ = ("_ranks",)

    def __init__(self, element: AlgebraElement, tol: float = TOL, check: bool = True):
        if check and not is_projection(element, tol):
            raise PreconditionError("element is not a projection")
        super().__init__(element.algebra, element.blocks)
        self._ranks = None

    @property
    def ranks(self) -> tuple[int, ...]:
        if self._ranks is None:
            self._ranks = projection_ranks(self)
        return self._ranks

    @property
    def element(self) -> AlgebraElement:
        return AlgebraElement(self.algebra, self.blocks)

    def complement(self) -> "Projection":
        return Projection(self.algebra.unit() - self, check=False)

    @classmethod
    def zero(cls, algebra: FinStarAlgebra) -> "Projection":
        return cls(algebra.zero(), check=False)

    @classmethod
    def unit(cls, algebra: FinStarAlgebra) -> "Projection":
        return cls(algebra.unit(), check=False)


def as_projection(x: AlgebraElement, tol: float = TOL) -> Projection:
    return x if isinstance(x, Projection) else Projection(x, tol)


def leq(e: AlgebraElement, f: AlgebraElement, tol: float = TOL) -> bool:
    """``e <= f`` in the sense ``e = e f``."""
    e._check(f)
    return op_norm(e - e * f) <= tol


def orthogonal(e: AlgebraElement, f: AlgebraElement, tol: float = TOL) -> bool:
    e._check(f)
    return op_norm(e * f) <= tol


def _family(E: Iterable[AlgebraElement]) -> list[AlgebraElement]:
    family = list(E)
    if not family:
        raise PreconditionError("empty projection family; use the zero projection explicitly")
    alg = family[0].algebra.block_sizes
    for i, e in enumerate(family):
        if e.algebra.block_sizes != alg:
            raise StructureError(f"family member {i} lives in a different algebra")
    return family


def sup_family(E: Iterable[AlgebraElement]) -> Projection:
    """Least upper bound: the range projection of the sum of the family."""
    family = _family(E)
    total = family[0]
    for e in family[1:]:
        total = total + e
    return Projection(range_projection(total), check=False)


def inf_family(E: Iterable[AlgebraElement]) -> Projection:
    """Greatest lower bound, ``(sup of complements)`` complemented."""
    family = _family(E)
    unit = family[0].algebra.unit()
    return sup_family([unit - e for e in family]).complement()


def range_intersection(E: Sequence[AlgebraElement]) -> AlgebraElement:
    """Oracle for ``inf``: projection onto the common range, per block, via nullspaces."""
    family = _family(E)
    alg = family[0].algebra
    blocks = []
    for b, n in enumerate(alg.block_sizes):
        stacked = np.vstack([np.eye(n) - e.blocks[b] for e in family])
        basis = oracle.nullspace(stacked)
        blocks.append(basis @ basis.conj().T)
    return AlgebraElement(alg, blocks)


# lattice certification -----------------------------------------------------

@dataclass
class LatticeReport:
    algebra: FinStarAlgebra
    samples: int
    checks: int = 0
    violations: list[dict] = field(default_factory=list)
    max_orthogonal_sum_residual: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_lattice(algebra: FinStarAlgebra, samples: int = 100, seed: int = 0,
                   tol: float = 1e-8) -> LatticeReport:
    """Check the lattice laws of the projection lattice on random families."""
    from .sampling import random_orthogonal_family, random_projection

    if samples < 1:
        raise PreconditionError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    report = LatticeReport(algebra, samples)
    one = Projection.unit(algebra)
    zero = Projection.zero(algebra)

    def check(name, residual, sample):
        report.checks += 1
        if not residual <= tol:
            report.violations.append({"check": name, "sample": sample, "residual": float(residual)})

    def order_gap(e, f):
        return op_norm(e - e * f)

    for k in range(samples):
        size = int(rng.integers(1, 5))
        E = [random_projection(rng, algebra) for _ in range(size)]
        e, f, g = E[0], random_projection(rng, algebra), random_projection(rng, algebra)
        s = sup_family(E)
        i = inf_family(E)

        check("projection", max(op_norm(s * s - s), op_norm(s - s.star())), k)
        check("reflexive", order_gap(e, e), k)
        ef, efg = sup_family([e, f]), sup_family([e, f, g])
        check("transitive", order_gap(e, efg) if order_gap(e, ef) <= tol and order_gap(ef, efg) <= tol else 1.0, k)
        if order_gap(e, f) <= tol and order_gap(f, e) <= tol:
            check("antisymmetric", op_norm(e - f), k)
        for member in E:
            check("sup-upper-bound", order_gap(member, s), k)
            check("inf-lower-bound", order_gap(i, member), k)
        upper = sup_family(E + [g])
        check("sup-least", order_gap(s, upper), k)
        check("sup-below-unit", order_gap(s, one), k)
        lower = inf_family(E + [g])
        check("inf-greatest", order_gap(lower, i), k)
        check("inf-oracle", op_norm(i - range_intersection(E)), k)
        check("absorption-meet", op_norm(inf_family([e, sup_family([e, f])]) - e), k)
        check("absorption-join", op_norm(sup_family([e, inf_family([e, f])]) - e), k)
        perp = e.complement()
        check("complement-join", op_norm(sup_family([e, perp]) - one), k)
        check("complement-meet", op_norm(inf_family([e, perp]) - zero), k)
        check("de-morgan", op_norm(i - sup_family([p.complement() for p in E]).complement()), k)

        fam = random_orthogonal_family(rng, algebra, int(rng.integers(1, 4)))
        total = fam[0]
        for p in fam[1:]:
            total = total + p
        residual = op_norm(sup_family(fam) - total)
        report.max_orthogonal_sum_residual = max(report.max_orthogonal_sum_residual, residual)
        check("orthogonal-sup-is-sum", residual, k)
    return report
