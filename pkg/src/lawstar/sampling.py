"""Seeded random instances: algebras, elements, projections, systems.

All generators take an explicit ``numpy.random.Generator`` so that a run is
reproducible from its seed alone.
"""

from __future__ import annotations

import numpy as np

from .matstar import AlgebraElement, FinStarAlgebra


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian, phases fixed."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_algebra(rng: np.random.Generator, max_blocks: int = 3, max_size: int = 4,
                   max_dim: int | None = None) -> FinStarAlgebra:
    while True:
        k = int(rng.integers(1, max_blocks + 1))
        sizes = tuple(int(n) for n in rng.integers(1, max_size + 1, size=k))
        alg = FinStarAlgebra(sizes)
        if max_dim is None or alg.dim <= max_dim:
            return alg


def _gaussian(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def random_element(rng: np.random.Generator, alg: FinStarAlgebra, kind: str | None = None) -> AlgebraElement:
    """Random element; ``kind`` is one of full, lowrank, sparse, zero, projection.

    Without ``kind`` a mix is drawn so that annihilators are often nontrivial.
    """
    if kind is None:
        kind = rng.choice(["full", "lowrank", "lowrank", "sparse", "projection", "zero"],
                          p=[0.15, 0.3, 0.2, 0.2, 0.1, 0.05])
    if kind == "zero":
        return alg.zero()
    if kind == "projection":
        return random_projection(rng, alg)
    blocks = []
    for n in alg.block_sizes:
        if kind == "full":
            blocks.append(_gaussian(rng, n))
        elif kind == "lowrank":
            r = int(rng.integers(0, n + 1))
            blocks.append(_gaussian(rng, n, r) @ _gaussian(rng, r, n))
        elif kind == "sparse":
            b = np.zeros((n, n), complex)
            if rng.random() < 0.6:
                mask = rng.random((n, n)) < 0.4
                b[mask] = _gaussian(rng, n)[mask]
            blocks.append(b)
        else:
            raise ValueError(f"unknown element kind {kind!r}")
    return AlgebraElement(alg, blocks)


def random_selfadjoint(rng: np.random.Generator, alg: FinStarAlgebra, scale: float = 1.0) -> AlgebraElement:
    blocks = []
    for n in alg.block_sizes:
        z = _gaussian(rng, n)
        blocks.append(scale * 0.5 * (z + z.conj().T))
    return AlgebraElement(alg, blocks)


def random_projection(rng: np.random.Generator, alg: FinStarAlgebra, ranks=None,
                      diagonal: bool | None = None):
    """Random projection; a third of the time aligned with the standard basis."""
    from .projlat import Projection

    if diagonal is None:
        diagonal = rng.random() < 0.35
    blocks = []
    for b, n in enumerate(alg.block_sizes):
        r = int(rng.integers(0, n + 1)) if ranks is None else ranks[b]
        if diagonal:
            d = np.zeros(n)
            d[rng.permutation(n)[:r]] = 1.0
            blocks.append(np.diag(d).astype(complex))
        else:
            u = random_unitary(rng, n)[:, :r]
            blocks.append(u @ u.conj().T)
    return Projection(AlgebraElement(alg, blocks), check=False)


def random_orthogonal_family(rng: np.random.Generator, alg: FinStarAlgebra, count: int,
                             frames=None):
    """``count`` pairwise orthogonal projections cut from one random frame per block."""
    from .projlat import Projection

    pieces = [[] for _ in range(count)]
    for b, n in enumerate(alg.block_sizes):
        u = random_unitary(rng, n) if frames is None else frames[b]
        labels = rng.integers(0, count + 1, size=n)  # label == count: column unused
        for j in range(count):
            cols = u[:, labels == j]
            pieces[j].append(cols @ cols.conj().T)
    return [Projection(AlgebraElement(alg, p), check=False) for p in pieces]


def random_subset(rng: np.random.Generator, alg: FinStarAlgebra, max_size: int = 3) -> list[AlgebraElement]:
    size = int(rng.integers(1, max_size + 1))
    return [random_element(rng, alg) for _ in range(size)]


def random_masa_element(rng: np.random.Generator, alg: FinStarAlgebra, frames=None,
                        small: float = 0.3):
    """Normal element ``sum c_i p_i`` over a random maximal commutative subalgebra.

    Returns the element and the list of minimal projections ``p_i``. A fraction
    ``small`` of the coefficients are tiny or zero so that spectral cuts bite.
    """
    from .projlat import Projection

    projections, blocks = [], []
    for b, n in enumerate(alg.block_sizes):
        u = random_unitary(rng, n) if frames is None else frames[b]
        coeffs = rng.normal(size=n) + 1j * rng.normal(size=n)
        shrink = rng.random(n) < small
        coeffs[shrink] *= rng.choice([0.0, 1e-3, 1e-2], size=int(shrink.sum()))
        blocks.append((u * coeffs) @ u.conj().T)
        for i in range(n):
            pb = [np.zeros((m, m), complex) for m in alg.block_sizes]
            pb[b] = np.outer(u[:, i], u[:, i].conj())
            projections.append(Projection(AlgebraElement(alg, pb), check=False))
    return AlgebraElement(alg, blocks), projections


SHAPES = ("single", "chain", "vee", "diamond", "tree")


def _shape_order(shape: str, size: int):
    """Node labels (top last) and generating pairs for a poset shape."""
    if shape == "single":
        return ["n0"], []
    if shape == "chain":
        nodes = [f"n{i}" for i in range(size)]
        return nodes, [(nodes[i], nodes[i + 1]) for i in range(size - 1)]
    if shape == "vee":
        return ["n0", "n1", "n2"], [("n0", "n2"), ("n1", "n2")]
    if shape == "diamond":
        return ["n0", "n1", "n2", "n3"], [("n0", "n1"), ("n0", "n2"), ("n1", "n3"), ("n2", "n3")]
    if shape == "tree":
        return ["n0", "n1", "n2", "n3"], [("n0", "n1"), ("n1", "n3"), ("n2", "n3")]
    raise ValueError(f"unknown shape {shape!r}")


def random_system(rng: np.random.Generator, max_nodes: int = 4, max_blocks: int = 3,
                  max_size: int = 4, shape: str | None = None):
    """Random valid projective system with block-deletion/unitary maps.

    Every node keeps a subset of the top node's blocks, in a random order and
    in a random unitary frame; subsets shrink downwards, so the composition
    law holds by construction.
    """
    from .limits import ConnectingMap, IndexPoset, ProjectiveSystem

    if shape is None:
        allowed = [s for s in SHAPES if s in ("single", "chain") or max_nodes >= (3 if s == "vee" else 4)]
        shape = str(rng.choice(allowed))
    size = int(rng.integers(2, max_nodes + 1)) if shape == "chain" and max_nodes >= 2 else 1
    nodes, pairs = _shape_order(shape, size)
    top = nodes[-1]
    top_alg = random_algebra(rng, max_blocks, max_size)
    kept = {top: list(range(top_alg.num_blocks))}
    frames = {top: [np.eye(n, dtype=complex) for n in top_alg.block_sizes]}
    parents = {n: [b for a, b in pairs if a == n] for n in nodes}
    core = int(rng.integers(top_alg.num_blocks))  # kept everywhere: no empty intersections
    for n in reversed(nodes[:-1]):
        allowed = set(kept[parents[n][0]])
        for p in parents[n][1:]:
            allowed &= set(kept[p])
        others = sorted(allowed - {core})
        count = int(rng.integers(0, len(others) + 1))
        chosen = [core] + [int(i) for i in rng.permutation(others)[:count]]
        chosen = [chosen[i] for i in rng.permutation(len(chosen))]
        kept[n] = chosen
        frames[n] = [random_unitary(rng, top_alg.block_sizes[i]) for i in chosen]
    algebras = {n: FinStarAlgebra(tuple(top_alg.block_sizes[i] for i in kept[n])) for n in nodes}
    maps = {}
    for a, b in pairs:
        idx, us = [], []
        for j, t in enumerate(kept[a]):
            i = kept[b].index(t)
            idx.append(i)
            us.append(frames[a][j] @ frames[b][i].conj().T)
        maps[(a, b)] = ConnectingMap(b, a, algebras[b], algebras[a], tuple(idx), tuple(us))
    return ProjectiveSystem(IndexPoset(nodes, pairs), algebras, maps, label=f"random-{shape}")


def random_thread(rng: np.random.Generator, system, kind: str | None = None):
    return system.push(random_element(rng, system.algebra(system.top()), kind))


def random_selfadjoint_thread(rng: np.random.Generator, system, scale: float = 1.0):
    return system.push(random_selfadjoint(rng, system.algebra(system.top()), scale))


def random_projection_thread(rng: np.random.Generator, system):
    return system.push(random_projection(rng, system.algebra(system.top())))


def random_frames(rng: np.random.Generator, system):
    return {n: [random_unitary(rng, m) for m in system.algebra(n).block_sizes] for n in system.nodes}
