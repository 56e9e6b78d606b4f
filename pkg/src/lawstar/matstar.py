"""Finite-dimensional C*-algebras ``M_{n_1} (+) ... (+) M_{n_k}``.

Elements are stored as tuples of dense complex blocks. Everything here is
immutable: operations return new elements and never touch their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numba
import numpy as np

from .errors import PreconditionError, StructureError

#: default absolute tolerance, applied after scaling by ``max(1, norm)``
TOL = 1e-9
#: eigenvalues closer than this are treated as one eigenspace
CLUSTER_TOL = 1e-10

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class FinStarAlgebra:
    """Signature ``(n_1, ..., n_k)`` of a direct sum of full matrix algebras.

    The empty signature is admitted only to represent the zero algebra that
    arises as the corner ``0 A 0``.
    """

    block_sizes: tuple[int, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.block_sizes)
        if any(n < 1 for n in sizes):
            raise StructureError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    @property
    def dim(self) -> int:
        """Complex vector-space dimension ``sum n_i**2``."""
        return sum(n * n for n in self.block_sizes)

    @property
    def is_zero(self) -> bool:
        return not self.block_sizes

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.zeros((n, n), complex) for n in self.block_sizes])

    def unit(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.eye(n, dtype=complex) for n in self.block_sizes])

    def scalar(self, c) -> "AlgebraElement":
        return AlgebraElement(self, [c * np.eye(n, dtype=complex) for n in self.block_sizes])

    def block_unit(self, i: int) -> "AlgebraElement":
        """Unit of the ``i``-th summand, zero elsewhere (a central projection)."""
        blocks = [np.zeros((n, n), complex) for n in self.block_sizes]
        blocks[i] = np.eye(self.block_sizes[i], dtype=complex)
        return AlgebraElement(self, blocks)

    def matrix_unit(self, block: int, row: int, col: int) -> "AlgebraElement":
        blocks = [np.zeros((n, n), complex) for n in self.block_sizes]
        blocks[block][row, col] = 1.0
        return AlgebraElement(self, blocks)

    def basis(self) -> Iterator["AlgebraElement"]:
        """Matrix units in the order used by :meth:`AlgebraElement.to_vector`."""
        for b, n in enumerate(self.block_sizes):
            for i in range(n):
                for j in range(n):
                    yield self.matrix_unit(b, i, j)

    def from_vector(self, vec) -> "AlgebraElement":
        vec = np.asarray(vec, dtype=complex).ravel()
        if vec.size != self.dim:
            raise StructureError(f"vector of length {vec.size} for algebra of dim {self.dim}")
        blocks, pos = [], 0
        for n in self.block_sizes:
            blocks.append(vec[pos:pos + n * n].reshape(n, n))
            pos += n * n
        return AlgebraElement(self, blocks)

    def from_diagonals(self, diagonals: Sequence[Sequence[complex]]) -> "AlgebraElement":
        return AlgebraElement(self, [np.diag(np.asarray(d, dtype=complex)) for d in diagonals])

    def __str__(self):
        if self.is_zero:
            return "{0}"
        return " (+) ".join(f"M{n}" for n in self.block_sizes)


class AlgebraElement:
    """An element of a :class:`FinStarAlgebra`, one dense block per summand.

    ``*`` and ``@`` both denote the algebra product; ``*`` with a number is
    scalar multiplication. The involution is :meth:`star`.
    """

    __slots__ = ("algebra", "blocks")
    __array_priority__ = 100

    def __init__(self, algebra: FinStarAlgebra, blocks):
        blocks = list(blocks)
        if len(blocks) != algebra.num_blocks:
            raise StructureError(
                f"expected {algebra.num_blocks} blocks for {algebra}, got {len(blocks)}"
            )
        frozen = []
        for i, (b, n) in enumerate(zip(blocks, algebra.block_sizes)):
            arr = np.array(b, dtype=complex)
            if arr.shape != (n, n):
                raise StructureError(f"block {i} has shape {arr.shape}, expected {(n, n)}")
            arr.setflags(write=False)
            frozen.append(arr)
        self.algebra = algebra
        self.blocks = tuple(frozen)

    @classmethod
    def _wrap(cls, algebra: FinStarAlgebra, blocks) -> "AlgebraElement":
        # fresh complex arrays from internal arithmetic: skip the copy and shape checks
        out = object.__new__(AlgebraElement)
        for b in blocks:
            b.setflags(write=False)
        out.algebra = algebra
        out.blocks = tuple(blocks)
        return out

    @classmethod
    def from_blocks(cls, blocks, label: str = "") -> "AlgebraElement":
        blocks = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in blocks]
        return cls(FinStarAlgebra(tuple(b.shape[0] for b in blocks), label), blocks)

    # arithmetic -----------------------------------------------------------

    def _check(self, other: "AlgebraElement"):
        if self.algebra.block_sizes != other.algebra.block_sizes:
            for i, (m, n) in enumerate(zip(self.algebra.block_sizes, other.algebra.block_sizes)):
                if m != n:
                    raise StructureError(f"block {i}: size {m} vs {n}")
            raise StructureError(
                f"block count mismatch: {self.algebra.num_blocks} vs {other.algebra.num_blocks}"
            )

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._check(other)
        return AlgebraElement._wrap(self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._check(other)
        return AlgebraElement._wrap(self.algebra, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return AlgebraElement._wrap(self.algebra, [-a for a in self.blocks])

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            self._check(other)
            return AlgebraElement._wrap(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])
        if np.isscalar(other):
            return AlgebraElement._wrap(self.algebra, [(other * a).astype(complex, copy=False) for a in self.blocks])
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return AlgebraElement._wrap(self.algebra, [(other * a).astype(complex, copy=False) for a in self.blocks])
        return NotImplemented

    __matmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def star(self) -> "AlgebraElement":
        return AlgebraElement._wrap(self.algebra, [np.ascontiguousarray(a.conj().T) for a in self.blocks])

    def commutator(self, other: "AlgebraElement") -> "AlgebraElement":
        return self * other - other * self

    # conversions ----------------------------------------------------------

    def to_vector(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0, complex)
        return np.concatenate([b.ravel() for b in self.blocks])

    def dense(self) -> np.ndarray:
        """Block-diagonal matrix of the element."""
        size = sum(self.algebra.block_sizes)
        out = np.zeros((size, size), complex)
        pos = 0
        for b in self.blocks:
            n = b.shape[0]
            out[pos:pos + n, pos:pos + n] = b
            pos += n
        return out

    def __repr__(self):
        return f"AlgebraElement({self.algebra}, {[b.tolist() for b in self.blocks]})"

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.algebra.block_sizes == other.algebra.block_sizes and all(
            np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks)
        )

    __hash__ = None


# norms and predicates ------------------------------------------------------

def op_norm(x: AlgebraElement) -> float:
    """C*-norm: largest singular value over all blocks."""
    best = 0.0
    for b in x.blocks:
        if b.shape[0] == 1:
            best = max(best, abs(b[0, 0]))
        elif b.any():
            best = max(best, np.linalg.svd(b, compute_uv=False)[0])
    return float(best)


def scaled(tol: float, *values: float) -> float:
    return tol * max(1.0, *values)


def is_selfadjoint(x: AlgebraElement, tol: float = TOL) -> bool:
    return op_norm(x - x.star()) <= scaled(tol, op_norm(x))


def is_projection(x: AlgebraElement, tol: float = TOL) -> bool:
    s = scaled(tol, op_norm(x))
    return op_norm(x - x.star()) <= s and op_norm(x * x - x) <= s


def _require_selfadjoint(x: AlgebraElement, tol: float = TOL):
    residual = op_norm(x - x.star())
    if residual > scaled(tol, op_norm(x)):
        raise PreconditionError(f"element is not self-adjoint (||x - x*|| = {residual:.3e})")


# eigen-decomposition -------------------------------------------------------

@numba.njit(cache=True)
def _jacobi_sweeps(a, v, threshold, max_sweeps):
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j].real ** 2 + a[i, j].imag ** 2
        if math.sqrt(off) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # G = [[c, s], [-s conj(phase), c conj(phase)]] acting on columns p, q
                sb = s * phase.conjugate()
                cb = c * phase.conjugate()
                for k in range(n):
                    x, y = a[k, p], a[k, q]
                    a[k, p] = c * x - sb * y
                    a[k, q] = s * x + cb * y
                for k in range(n):
                    x, y = a[p, k], a[q, k]
                    a[p, k] = c * x - sb.conjugate() * y
                    a[q, k] = s * x + cb.conjugate() * y
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    x, y = v[k, p], v[k, q]
                    v[k, p] = c * x - sb * y
                    v[k, q] = s * x + cb * y


def jacobi_eigh(a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi diagonalisation of a Hermitian matrix.

    Returns ascending eigenvalues and a unitary whose columns are the
    matching eigenvectors. Pivots are visited in row-major order and the
    final sort is stable, so the output is a deterministic function of the
    input bits. Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||a||_F)``.
    """
    a = np.array(a, dtype=complex)
    a = 0.5 * (a + a.conj().T)
    v = np.eye(a.shape[0], dtype=complex)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))
    _jacobi_sweeps(a, v, threshold, max_sweeps)
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], np.ascontiguousarray(v[:, order])


@dataclass(frozen=True)
class EigenDecomposition:
    """``x = U diag(t) U*`` blockwise, eigenvalues ascending per block."""

    eigenvalues: tuple[np.ndarray, ...]
    unitary: AlgebraElement

    @property
    def algebra(self) -> FinStarAlgebra:
        return self.unitary.algebra

    def function(self, f) -> AlgebraElement:
        """Apply ``f`` (vectorised over an eigenvalue array) to the spectrum."""
        blocks = []
        for t, u in zip(self.eigenvalues, self.unitary.blocks):
            blocks.append((u * np.asarray(f(t), dtype=complex)) @ u.conj().T)
        return AlgebraElement(self.algebra, blocks)

    def reconstruct(self) -> AlgebraElement:
        return self.function(lambda t: t)

    def indicator(self, mask) -> AlgebraElement:
        """Projection onto the eigenvectors selected by ``mask(t) -> bool array``."""
        return self.function(lambda t: np.asarray(mask(t), dtype=float))

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(t))) for t in self.eigenvalues if t.size), default=0.0)


def hermitian_eigen(x: AlgebraElement, tol: float = TOL) -> EigenDecomposition:
    """Blockwise Jacobi eigen-decomposition of a self-adjoint element."""
    _require_selfadjoint(x, tol)
    values, vectors = [], []
    for b in x.blocks:
        w, v = jacobi_eigh(b)
        w.setflags(write=False)
        values.append(w)
        vectors.append(v)
    return EigenDecomposition(tuple(values), AlgebraElement(x.algebra, vectors))


def cluster(values: np.ndarray, tol: float = CLUSTER_TOL) -> list[tuple[int, int]]:
    """Split sorted values into ``[start, stop)`` runs with gaps ``<= tol``."""
    runs = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            runs.append((start, i))
            start = i
    return runs


def decompose_selfadjoint(a: AlgebraElement, tol: float = TOL):
    """Return ``(a_plus, a_minus, abs_a)`` with ``a = a_plus - a_minus``."""
    eig = hermitian_eigen(a, tol)
    plus = eig.function(lambda t: np.maximum(t, 0.0))
    minus = eig.function(lambda t: np.maximum(-t, 0.0))
    return plus, minus, plus + minus


def positive_kernel_projection(h: AlgebraElement, tol: float = CLUSTER_TOL) -> AlgebraElement:
    """Projection onto the kernel of a positive element.

    Eigenvalues below ``tol * max(1, largest)`` count as zero.
    """
    eig = hermitian_eigen(h)
    cut = scaled(tol, eig.max_abs())
    return eig.indicator(lambda t: t <= cut)


def range_projection(h: AlgebraElement, tol: float = CLUSTER_TOL) -> AlgebraElement:
    """Projection onto the range of a positive element."""
    eig = hermitian_eigen(h)
    cut = scaled(tol, eig.max_abs())
    return eig.indicator(lambda t: t > cut)


def projection_ranks(e: AlgebraElement) -> tuple[int, ...]:
    """Per-block ranks, counted as eigenvalues clustered at 1."""
    eig = hermitian_eigen(e)
    return tuple(int(np.sum(np.abs(t - 1.0) <= 0.5)) for t in eig.eigenvalues)


def trace(x: AlgebraElement) -> complex:
    return complex(sum(np.trace(b) for b in x.blocks))
