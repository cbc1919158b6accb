"""Seeded test-instance generators.

Every generator takes an unsigned 64-bit ``seed`` and draws from its own
stream, so equal ``(seed, parameters)`` give bit-identical output.

Random stream: Philox4x64-10 with key ``(seed, 0)`` and counter starting
at zero (``numpy.random.Philox(key=seed)``). Uniform doubles are the top 53
bits of each 64-bit output times ``2**-53``. Standard normals come in pairs
from Box-Muller: ``sqrt(-2 ln(1 - u1)) * (cos, sin)(2 pi u2)``. Complex
Gaussian entries take their real part from the first value of a pair and
imaginary part from the second, filled row-major.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .operators import as_matrix, dagger, operator_norm
from .partition import ProjectivePartition, validate_partition

UINT64_MAX = 2**64 - 1


def stream(seed: int) -> np.random.Generator:
    seed = int(seed)
    if not 0 <= seed <= UINT64_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed))


def _box_muller(rng: np.random.Generator, pairs: int) -> tuple[np.ndarray, np.ndarray]:
    u = rng.random(2 * pairs).reshape(pairs, 2)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    return radius * np.cos(angle), radius * np.sin(angle)


def complex_gaussian(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Matrix of i.i.d. standard complex normals, ``E|z|^2 = 1``."""
    re, im = _box_muller(rng, rows * cols)
    return ((re + 1j * im) / np.sqrt(2.0)).reshape(rows, cols)


def _haar(rng: np.random.Generator, dim: int) -> np.ndarray:
    Q, R = np.linalg.qr(complex_gaussian(rng, dim, dim))
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def haar_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return _haar(stream(seed), dim)


def random_partition(dim: int, block_sizes: Sequence[int], seed: int) -> ProjectivePartition:
    """Coordinate-block projectors rotated by a Haar unitary."""
    sizes = [int(s) for s in block_sizes]
    if any(s < 1 for s in sizes) or sum(sizes) != dim:
        raise ValueError(f"block sizes {sizes} must be positive and sum to dim {dim}")
    V = haar_unitary(dim, seed)
    projectors = []
    start = 0
    for s in sizes:
        cols = V[:, start : start + s]
        projectors.append(cols @ dagger(cols))
        start += s
    return validate_partition(projectors, tol=1e-12)


def block_preserving_unitary(partition: ProjectivePartition, permutation: Sequence[int], seed: int) -> np.ndarray:
    """Unitary with ``U P_mu U^dagger = P_sigma(mu)`` exactly.

    ``permutation[mu]`` is ``sigma(mu)``; it may only pair blocks of equal
    rank. Each block's support is mapped isometrically onto its target's
    support and then scrambled by a Haar unitary inside the target block.
    """
    sigma = [int(s) for s in permutation]
    m = partition.m
    if sorted(sigma) != list(range(m)):
        raise ValueError(f"{sigma} is not a permutation of 0..{m - 1}")
    for mu, nu in enumerate(sigma):
        if partition.ranks[mu] != partition.ranks[nu]:
            raise ValueError(
                f"permutation sends block {mu} (rank {partition.ranks[mu]}) "
                f"to block {nu} (rank {partition.ranks[nu]})"
            )
    rng = stream(seed)
    U = np.zeros((partition.dim, partition.dim), dtype=np.complex128)
    for mu, nu in enumerate(sigma):
        src, dst = partition.support_basis(mu), partition.support_basis(nu)
        W = _haar(rng, partition.ranks[nu])
        U += dst @ W @ dagger(src)
    return U


def random_density(dim: int, seed: int) -> np.ndarray:
    """``G G^dagger / Tr[G G^dagger]`` for a seeded complex Gaussian ``G``."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    G = complex_gaussian(stream(seed), dim, dim)
    rho = G @ dagger(G)
    return rho / np.trace(rho).real


def random_hermitian(dim: int, seed: int) -> np.ndarray:
    """Seeded Hermitian matrix scaled to unit operator norm."""
    G = complex_gaussian(stream(seed), dim, dim)
    K = (G + dagger(G)) / 2
    return K / operator_norm(K)


def perturb_unitary(U, delta: float, seed: int) -> np.ndarray:
    """``U exp(i delta K)`` for a seeded Hermitian ``K`` with ``||K|| = 1``."""
    U = as_matrix(U)
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta}")
    if delta == 0:
        return U.copy()
    w, V = np.linalg.eigh(random_hermitian(U.shape[0], seed))
    return U @ (V * np.exp(1j * delta * w)) @ dagger(V)
