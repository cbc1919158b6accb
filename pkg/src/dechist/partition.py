"""Projective partitions, the states they induce, and block-diagonality."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .operators import DEFAULT_TOL, InvalidOperandError, as_matrix, dagger, operator_norm


class PartitionError(ValueError):
    """A candidate partition violates one of its defining invariants.

    ``defects`` maps every checked invariant to its magnitude, so callers can
    report more than the first failure.
    """

    def __init__(self, message: str, invariant: str, defect: float, defects: dict[str, float]):
        super().__init__(message)
        self.invariant = invariant
        self.defect = defect
        self.defects = defects


@dataclass(frozen=True, eq=False)
class ProjectivePartition:
    """Ordered, validated set of orthogonal projectors summing to identity.

    Build through :func:`validate_partition`; the constructor trusts its input.
    """

    projectors: tuple[np.ndarray, ...]
    ranks: tuple[int, ...]
    tol: float = DEFAULT_TOL
    _bases: tuple[np.ndarray, ...] = field(default=(), repr=False)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def m(self) -> int:
        return len(self.projectors)

    def __len__(self) -> int:
        return len(self.projectors)

    def __getitem__(self, mu: int) -> np.ndarray:
        return self.projectors[mu]

    def __iter__(self):
        return iter(self.projectors)

    @property
    def stack(self) -> np.ndarray:
        """Projectors as one ``(m, dim, dim)`` array."""
        return np.stack(self.projectors)

    def support_basis(self, mu: int) -> np.ndarray:
        """Orthonormal columns spanning ``supp(P_mu)``, shape ``(dim, rank)``."""
        return self._bases[mu]


def partition_defects(projectors: Sequence[np.ndarray]) -> dict[str, float]:
    """Worst-case defects of every invariant a partition must satisfy."""
    Ps = [as_matrix(P) for P in projectors]
    d = Ps[0].shape[0]
    eye = np.eye(d)
    herm = max(operator_norm(P - dagger(P)) for P in Ps)
    ortho = 0.0
    for i, P in enumerate(Ps):
        for j, Q in enumerate(Ps):
            target = P if i == j else 0.0
            ortho = max(ortho, operator_norm(P @ Q - target))
    complete = operator_norm(sum(Ps) - eye)
    traces = [np.trace(P).real for P in Ps]
    rank = max(abs(t - round(t)) for t in traces)
    empty = max(0.0, 1.0 - min(traces))
    return {
        "hermiticity": herm,
        "orthogonality": ortho,
        "completeness": complete,
        "integer_rank": rank,
        "nonzero_rank": empty,
    }


def validate_partition(projectors: Sequence, tol: float = DEFAULT_TOL) -> ProjectivePartition:
    """Validate ``projectors`` and return them as a :class:`ProjectivePartition`.

    Raises :class:`PartitionError` naming the first violated invariant (the
    error also carries all defect magnitudes) and
    :class:`~dechist.operators.InvalidOperandError` on shape problems.
    """
    Ps = [as_matrix(P) for P in projectors]
    if len(Ps) < 2:
        raise PartitionError(
            f"a partition needs at least 2 members, got {len(Ps)}", "size", float(len(Ps)), {}
        )
    dims = {P.shape[0] for P in Ps}
    if len(dims) != 1:
        raise InvalidOperandError(f"projectors have mixed dimensions {sorted(dims)}")

    defects = partition_defects(Ps)
    for name, d in defects.items():
        if d > tol:
            raise PartitionError(
                f"{name} defect {d:.3e} exceeds tolerance {tol:g}", name, d, defects
            )

    ranks = tuple(int(round(np.trace(P).real)) for P in Ps)
    bases = []
    for P, r in zip(Ps, ranks):
        w, V = np.linalg.eigh((P + dagger(P)) / 2)
        # eigenvalues of a projector are 0 or 1; split halfway
        bases.append(V[:, w >= 0.5][:, -r:] if r else V[:, :0])
    return ProjectivePartition(tuple(Ps), ranks, tol, tuple(bases))


def diagonal_partition(dim: int, blocks: Sequence[Sequence[int]], tol: float = DEFAULT_TOL) -> ProjectivePartition:
    """Partition of coordinate projectors onto the given index sets."""
    projectors = []
    for block in blocks:
        P = np.zeros((dim, dim), dtype=np.complex128)
        for i in block:
            if not 0 <= i < dim:
                raise InvalidOperandError(f"block index {i} out of range for dim {dim}")
            P[i, i] = 1.0
        projectors.append(P)
    return validate_partition(projectors, tol)


def grain_type(partition: ProjectivePartition) -> str:
    """``"fine"`` when every projector is rank one, ``"coarse"`` otherwise."""
    return "fine" if all(r == 1 for r in partition.ranks) else "coarse"


def partition_states(partition: ProjectivePartition) -> list[np.ndarray]:
    """The normalized projectors ``P_nu / Tr P_nu``, one per member."""
    return [P / r for P, r in zip(partition.projectors, partition.ranks)]


def dephase(rho, partition: ProjectivePartition) -> np.ndarray:
    """Block-diagonal part ``sum_mu P_mu rho P_mu``."""
    rho = as_matrix(rho)
    if rho.shape[0] != partition.dim:
        raise InvalidOperandError(f"dimension mismatch: {rho.shape[0]} vs partition dim {partition.dim}")
    return sum(P @ rho @ P for P in partition.projectors)


def classicality_defect(rho, partition: ProjectivePartition) -> float:
    """Operator norm of the off-block-diagonal part of ``rho``."""
    rho = as_matrix(rho)
    return operator_norm(rho - dephase(rho, partition))


def is_classical_state(rho, partition: ProjectivePartition, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    defect = classicality_defect(rho, partition)
    return defect <= tol, defect


def classical_spanning_set(partition: ProjectivePartition) -> list[np.ndarray]:
    """Hermitian basis of the block-diagonal operators.

    For each block with support basis ``e_1..e_r``: the diagonal projectors
    ``|e_i><e_i|`` plus, for ``i < j``, the symmetric and antisymmetric
    combinations ``|e_i><e_j| + h.c.`` and ``-i|e_i><e_j| + h.c.``. The total
    count is ``sum_mu rank_mu**2``.
    """
    basis = []
    for mu in range(partition.m):
        B = partition.support_basis(mu)
        r = B.shape[1]
        for i in range(r):
            ei = B[:, i : i + 1]
            basis.append(ei @ dagger(ei))
            for j in range(i + 1, r):
                ej = B[:, j : j + 1]
                outer = ei @ dagger(ej)
                basis.append(outer + dagger(outer))
                basis.append(-1j * outer + dagger(-1j * outer))
    return basis
