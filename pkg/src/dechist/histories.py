"""Histories over a fixed partition and their decoherence functional.

A history of length ``k`` is a tuple ``(a_1, ..., a_k)`` of partition
indices, ``a_1`` being the earliest time. Whenever all ``m**k`` histories are
enumerated they appear in lexicographic order with ``a_k`` varying fastest,
so history ``h`` sits at row ``sum_j h[j] * m**(k-1-j)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .operators import DEFAULT_TOL, InvalidOperandError, as_matrix, dagger, matrix_power, require
from .partition import ProjectivePartition

DEFAULT_CAP = 4096

History = tuple[int, ...]


class EnumerationCapError(RuntimeError):
    """``m**k`` histories exceed the configured enumeration cap."""

    def __init__(self, m: int, k: int, cap: int):
        super().__init__(f"m**k = {m}**{k} = {m**k} histories exceeds cap {cap}")
        self.m, self.k, self.cap = m, k, cap
        self.count = m**k


def all_histories(m: int, k: int) -> list[History]:
    return list(itertools.product(range(m), repeat=k))


def history_index(h: Sequence[int], m: int) -> int:
    idx = 0
    for a in h:
        idx = idx * m + a
    return idx


def check_history(h: Sequence[int], partition: ProjectivePartition) -> History:
    h = tuple(int(a) for a in h)
    if not h:
        raise InvalidOperandError("history must have length >= 1")
    bad = [a for a in h if not 0 <= a < partition.m]
    if bad:
        raise InvalidOperandError(f"history index {bad[0]} out of range for {partition.m} projectors")
    return h


def _check_dims(U: np.ndarray, partition: ProjectivePartition) -> None:
    if U.shape[0] != partition.dim:
        raise InvalidOperandError(f"dimension mismatch: unitary {U.shape[0]} vs partition {partition.dim}")


def class_operator(U, partition: ProjectivePartition, h: Sequence[int]) -> np.ndarray:
    """``C_h = U^{dagger k} P_{a_k} U P_{a_{k-1}} U ... P_{a_1} U``."""
    U = as_matrix(U)
    _check_dims(U, partition)
    h = check_history(h, partition)
    C = np.eye(U.shape[0], dtype=np.complex128)
    for a in h:
        C = partition[a] @ U @ C
    return dagger(matrix_power(U, len(h))) @ C


def decoherence_functional(U, rho, partition: ProjectivePartition, h_a: Sequence[int], h_b: Sequence[int]) -> complex:
    """Single entry ``Tr[C_a rho C_b^dagger]``, evaluated directly."""
    if len(h_a) != len(h_b):
        raise InvalidOperandError(f"history lengths differ: {len(h_a)} vs {len(h_b)}")
    rho = as_matrix(rho)
    Ca = class_operator(U, partition, h_a)
    Cb = class_operator(U, partition, h_b)
    if rho.shape != Ca.shape:
        raise InvalidOperandError(f"dimension mismatch: state {rho.shape[0]} vs {Ca.shape[0]}")
    return complex(np.trace(Ca @ rho @ dagger(Cb)))


@dataclass(frozen=True, eq=False)
class DecoherenceMatrix:
    """All ``D[h_a, h_b]`` for histories of length ``k`` over ``m`` projectors."""

    k: int
    m: int
    entries: np.ndarray

    @property
    def histories(self) -> list[History]:
        return all_histories(self.m, self.k)

    def __getitem__(self, pair: tuple[Sequence[int], Sequence[int]]) -> complex:
        h_a, h_b = pair
        return complex(self.entries[history_index(h_a, self.m), history_index(h_b, self.m)])

    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.entries).real.copy()

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0))

    def max_off_diagonal(self) -> tuple[float, tuple[History, History] | None]:
        """Largest ``|D[h_a, h_b]|`` with ``h_a != h_b`` and the pair attaining it."""
        n = self.entries.shape[0]
        if n < 2:
            return 0.0, None
        mags = np.abs(self.entries)
        np.fill_diagonal(mags, -1.0)
        top = float(mags.max())
        # first pair in enumeration order among roundoff-level ties
        flat = int(np.argmax(mags >= top * (1 - 1e-9)))
        i, j = divmod(flat, n)
        hs = self.histories
        return float(mags[i, j]), (hs[i], hs[j])


def _state_factor(rho: np.ndarray) -> np.ndarray:
    """``L`` with ``rho = L L^dagger`` (tiny negative eigenvalues clipped)."""
    w, V = np.linalg.eigh((rho + dagger(rho)) / 2)
    keep = w > 0
    return V[:, keep] * np.sqrt(w[keep])


def decoherence_matrix(
    U, rho, partition: ProjectivePartition, k: int, cap: int = DEFAULT_CAP, tol: float = DEFAULT_TOL
) -> DecoherenceMatrix:
    """Full decoherence matrix for all histories of length ``k``.

    Uses ``rho = L L^dagger`` so that ``D = Psi Psi^dagger`` where row ``h``
    of ``Psi`` is ``C_h L`` flattened. The branch operators ``C_h L`` are
    grown one time step at a time for all histories at once. The leading
    ``U^{dagger k}`` of the class operator is unitary and cancels in every
    entry, so it is omitted.
    """
    U = require(U, "unitary", max(tol, 1e-8))
    rho = require(rho, "density", max(tol, 1e-8))
    _check_dims(U, partition)
    if rho.shape[0] != partition.dim:
        raise InvalidOperandError(f"dimension mismatch: state {rho.shape[0]} vs partition {partition.dim}")
    if k < 1:
        raise InvalidOperandError(f"history length must be >= 1, got {k}")
    m = partition.m
    if m**k > cap:
        raise EnumerationCapError(m, k, cap)

    # step operators P_mu U, shape (m, d, d)
    steps = partition.stack @ U
    branches = _state_factor(rho)[None, :, :]
    for _ in range(k):
        # (n, d, r) -> (n, m, d, r): new index varies fastest
        branches = np.einsum("mij,njr->nmir", steps, branches).reshape(-1, *branches.shape[1:])
    psi = branches.reshape(branches.shape[0], -1)
    D = psi @ psi.conj().T
    return DecoherenceMatrix(k, m, D)


@dataclass(frozen=True)
class DecoherenceCheck:
    """Verdict of a medium-decoherence check for one state and one ``k``."""

    decoherent: bool
    defect: float
    witness: tuple[History, History] | None
    tol: float

    def __bool__(self) -> bool:
        return self.decoherent


def check_decoherence_matrix(matrix: DecoherenceMatrix, tol: float = DEFAULT_TOL) -> DecoherenceCheck:
    defect, pair = matrix.max_off_diagonal()
    return DecoherenceCheck(defect <= tol, defect, pair, tol)


def check_medium_decoherence(
    U, rho, partition: ProjectivePartition, k: int, tol: float = DEFAULT_TOL, cap: int = DEFAULT_CAP
) -> DecoherenceCheck:
    """True iff every off-diagonal ``|D[h_a, h_b]|`` is at most ``tol``.

    The witness is the maximizing pair ``(h_a, h_b)``; of the two symmetric
    copies the one with the smaller ``h_a`` row is reported.
    """
    return check_decoherence_matrix(decoherence_matrix(U, rho, partition, k, cap), tol)


def history_probabilities(U, rho, partition: ProjectivePartition, k: int, cap: int = DEFAULT_CAP) -> dict[History, float]:
    """Diagonal of the decoherence matrix keyed by history.

    These sum to one regardless, but only mean probabilities when
    :func:`check_medium_decoherence` passes for the same inputs.
    """
    D = decoherence_matrix(U, rho, partition, k, cap)
    return dict(zip(D.histories, D.diagonal().tolist()))


def coarse_grain(matrix: DecoherenceMatrix, keep: Iterable[int]) -> DecoherenceMatrix:
    """Sum out every time position not in ``keep`` (1-based).

    Discarded indices are summed independently on the ``h_a`` and ``h_b``
    sides, which turns the projectors at those times into identities.
    """
    keep = sorted(set(int(t) for t in keep))
    if not keep:
        raise ValueError("keep must name at least one time position")
    if keep[0] < 1 or keep[-1] > matrix.k:
        raise ValueError(f"time positions must lie in 1..{matrix.k}, got {keep}")
    k, m = matrix.k, matrix.m
    T = matrix.entries.reshape((m,) * (2 * k))
    drop = [t - 1 for t in range(1, k + 1) if t not in keep]
    T = T.sum(axis=tuple(drop) + tuple(k + t for t in drop))
    n = m ** len(keep)
    return DecoherenceMatrix(len(keep), m, T.reshape(n, n))
