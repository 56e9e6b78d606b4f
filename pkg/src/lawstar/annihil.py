"""Annihilators, annihilating projections and supports.

The fast path builds the right annihilating projection of ``S`` as the kernel
projection of ``sum s* s``; the oracle path solves ``s x = 0`` directly on the
algebra viewed as a vector space of dimension ``sum n_i**2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import oracle
from .errors import PreconditionError, StructureError
from .matstar import (
    AlgebraElement,
    FinStarAlgebra,
    op_norm,
    positive_kernel_projection,
)
from .projlat import Projection, sup_family

MEMBERSHIP_TOL = 1e-8


@dataclass(frozen=True)
class AnnihilatorResult:
    """``R(S) = gA`` (or ``L(S) = Ae``) with the dimension cross-check."""

    generator: Projection
    subspace_dim: int
    oracle_dim: int
    membership_residual: float

    @property
    def consistent(self) -> bool:
        return self.subspace_dim == self.oracle_dim and self.membership_residual <= MEMBERSHIP_TOL


def _elements(S) -> list[AlgebraElement]:
    S = list(S)
    if not S:
        raise PreconditionError("annihilators are taken of nonempty sets")
    sizes = S[0].algebra.block_sizes
    for i, s in enumerate(S):
        if s.algebra.block_sizes != sizes:
            raise StructureError(f"element {i} lives in a different algebra")
    return S


def right_projection(S: Sequence[AlgebraElement]) -> Projection:
    """Projection onto the common kernel of ``S`` (no oracle work)."""
    S = _elements(S)
    total = S[0].star() * S[0]
    for s in S[1:]:
        total = total + s.star() * s
    return Projection(positive_kernel_projection(total), check=False)


def principal_dim(g: Projection) -> int:
    """Dimension of ``gA`` (equivalently ``Ag``): ``sum rank_i * n_i``."""
    return sum(r * n for r, n in zip(g.ranks, g.algebra.block_sizes))


def right_annihilator(S: Sequence[AlgebraElement]) -> AnnihilatorResult:
    S = _elements(S)
    g = right_projection(S)
    alg = g.algebra
    basis = oracle.right_annihilator_basis(S)
    residual = 0.0
    for x in oracle.elements_from_columns(alg, basis):
        residual = max(residual, op_norm(x - g * x))
    for s in S:
        residual = max(residual, op_norm(s * g) / max(1.0, op_norm(s)))
    return AnnihilatorResult(g, principal_dim(g), basis.shape[1], residual)


def left_annihilator(S: Sequence[AlgebraElement]) -> AnnihilatorResult:
    """``L(S) = Ae`` computed as ``(R(S*))*``; checked against ``x s = 0`` directly."""
    S = _elements(S)
    e = right_projection([s.star() for s in S])
    alg = e.algebra
    basis = oracle.left_annihilator_basis(S)
    residual = 0.0
    for x in oracle.elements_from_columns(alg, basis):
        residual = max(residual, op_norm(x - x * e))
    for s in S:
        residual = max(residual, op_norm(e * s) / max(1.0, op_norm(s)))
    return AnnihilatorResult(e, principal_dim(e), basis.shape[1], residual)


def supports(x: AlgebraElement) -> tuple[Projection, Projection]:
    """Right and left supports ``(r(x), l(x))``."""
    g = right_projection([x])
    e = right_projection([x.star()])
    return g.complement(), e.complement()


def right_support(x: AlgebraElement) -> Projection:
    return right_projection([x]).complement()


# certification --------------------------------------------------------------

@dataclass
class BaerReport:
    algebra: FinStarAlgebra
    samples: int
    counterexamples: list[dict] = field(default_factory=list)
    max_residual: float = 0.0
    dims_checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def check_subset(S: Sequence[AlgebraElement], tol: float = MEMBERSHIP_TOL) -> dict:
    """All annihilator identities for one subset; returns residuals and a verdict."""
    right = right_annihilator(S)
    left = left_annihilator(S)
    g = right.generator
    supp = sup_family([right_support(s) for s in S])
    sup_residual = op_norm(g - supp.complement())
    # L(S) = (R(S*))* as subspaces: R(S*) = fA, so L(S) = A f*
    adj = right_annihilator([s.star() for s in S])
    adj_residual = op_norm(adj.generator - left.generator)
    residual = max(right.membership_residual, left.membership_residual, sup_residual, adj_residual)
    ok = (
        right.subspace_dim == right.oracle_dim
        and left.subspace_dim == left.oracle_dim
        and adj.subspace_dim == left.oracle_dim
        and residual <= tol
    )
    return {
        "ok": ok,
        "residual": residual,
        "right_dim": right.subspace_dim,
        "right_oracle_dim": right.oracle_dim,
        "left_dim": left.subspace_dim,
        "left_oracle_dim": left.oracle_dim,
        "generator": g,
    }


def certify_baer(algebra: FinStarAlgebra, samples: int = 50, seed: int = 0,
                 max_size: int = 3, subsets=None) -> BaerReport:
    """Every sampled ``R(S)`` is ``gA`` for the computed ``g``, per the oracle."""
    from .sampling import random_subset

    rng = np.random.default_rng(seed)
    if subsets is None:
        subsets = [random_subset(rng, algebra, max_size) for _ in range(samples)]
        subsets[:0] = [[algebra.zero()], [algebra.unit()]]
    report = BaerReport(algebra, len(subsets))
    for k, S in enumerate(subsets):
        result = check_subset(S)
        report.dims_checked += 1
        report.max_residual = max(report.max_residual, result["residual"])
        if not result["ok"]:
            report.counterexamples.append({
                "sample": k,
                "residual": result["residual"],
                "dims": [result["right_dim"], result["right_oracle_dim"],
                         result["left_dim"], result["left_oracle_dim"]],
            })
    return report
