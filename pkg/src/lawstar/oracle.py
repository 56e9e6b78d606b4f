"""Plain linear-algebra oracles that treat an algebra as a vector space.

Nothing here looks at eigen-decompositions or projections, so these routines
serve as an independent check on the projection-based fast paths.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .matstar import AlgebraElement, FinStarAlgebra

RANK_TOL = 1e-10


def nullspace(m: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the kernel of ``m``.

    Rank is read off a column-pivoted QR factorisation: a pivot counts when
    ``|R_ii| > tol * max(1, |R_00|)``.
    """
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    cols = m.shape[1]
    if m.shape[0] == 0 or cols == 0:
        return np.eye(cols, dtype=complex)
    _, r, piv = scipy.linalg.qr(m, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    cut = tol * max(1.0, float(diag[0]) if diag.size else 0.0)
    rank = int(np.sum(diag > cut))
    if rank == cols:
        return np.zeros((cols, 0), complex)
    basis = np.zeros((cols, cols - rank), complex)
    if rank:
        coeff = scipy.linalg.solve_triangular(r[:rank, :rank], -r[:rank, rank:])
        basis[piv[:rank]] = coeff
    basis[piv[rank:]] = np.eye(cols - rank)
    q, _ = np.linalg.qr(basis)
    return q


def rank(m: np.ndarray, tol: float = RANK_TOL) -> int:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return m.shape[1] - nullspace(m, tol).shape[1]


def left_mult_matrix(s: AlgebraElement) -> np.ndarray:
    """Matrix of ``x -> s x`` in the row-major matrix-unit basis."""
    if not s.blocks:
        return np.zeros((0, 0), complex)
    return scipy.linalg.block_diag(*[np.kron(b, np.eye(b.shape[0])) for b in s.blocks])


def right_mult_matrix(s: AlgebraElement) -> np.ndarray:
    """Matrix of ``x -> x s`` in the row-major matrix-unit basis."""
    if not s.blocks:
        return np.zeros((0, 0), complex)
    return scipy.linalg.block_diag(*[np.kron(np.eye(b.shape[0]), b.T) for b in s.blocks])


def right_annihilator_basis(elements: Sequence[AlgebraElement]) -> np.ndarray:
    """Kernel of the stacked maps ``x -> s x``, as vectors of the algebra."""
    return nullspace(np.vstack([left_mult_matrix(s) for s in elements]))


def left_annihilator_basis(elements: Sequence[AlgebraElement]) -> np.ndarray:
    """Kernel of the stacked maps ``x -> x s``."""
    return nullspace(np.vstack([right_mult_matrix(s) for s in elements]))


def commutant_basis(elements: Sequence[AlgebraElement]) -> np.ndarray:
    """Kernel of the stacked maps ``x -> s x - x s``."""
    return nullspace(np.vstack([left_mult_matrix(s) - right_mult_matrix(s) for s in elements]))


def span_matrix(elements: Iterable[AlgebraElement]) -> np.ndarray:
    vecs = [e.to_vector() for e in elements]
    if not vecs:
        return np.zeros((0, 0), complex)
    return np.column_stack(vecs)


def span_dim(elements: Iterable[AlgebraElement], tol: float = RANK_TOL) -> int:
    m = span_matrix(elements)
    if m.size == 0:
        return 0
    return rank(m.T, tol)


def orthonormal_span(elements: Iterable[AlgebraElement], tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal columns spanning the given elements (as vectors)."""
    m = span_matrix(elements)
    if m.size == 0:
        return m
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    keep = s > tol * max(1.0, float(s[0]) if s.size else 0.0)
    return u[:, keep]


def distance_to_span(vec: np.ndarray, onb: np.ndarray) -> float:
    """Euclidean distance from ``vec`` to the span of orthonormal columns."""
    vec = np.asarray(vec, dtype=complex)
    if onb.size == 0:
        return float(np.linalg.norm(vec))
    return float(np.linalg.norm(vec - onb @ (onb.conj().T @ vec)))


def elements_from_columns(algebra: FinStarAlgebra, columns: np.ndarray) -> list[AlgebraElement]:
    return [algebra.from_vector(columns[:, i]) for i in range(columns.shape[1])]
