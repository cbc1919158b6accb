"""Finite-truncation checks of the decoherence conditions.

The statements being checked quantify over all history lengths ``k`` or all
powers ``n``; every check here stops at ``k_max``/``n_max`` and says so in its
report. A passing report means "no violation found up to the truncation",
not a proof.

Defects are classified against two thresholds: at or below ``tol_accept``
counts as zero, above ``tol_violate`` counts as a violation, and anything in
between is reported as ``"inconclusive"``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Union

import numpy as np

from .generators import random_density, stream
from .histories import DEFAULT_CAP, EnumerationCapError, check_medium_decoherence
from .operators import as_matrix, commutator, dagger, operator_norm
from .partition import ProjectivePartition, classical_spanning_set, dephase, partition_states

TOL_ACCEPT = 1e-10
TOL_VIOLATE = 1e-6
K_MAX = 4
N_MAX = 12
Q_MAX = 1000
EPSILON = 0.1
SAMPLE_COUNT = 10

Verdict = Union[bool, str]
INCONCLUSIVE = "inconclusive"


def classify(defect: float, tol_accept: float = TOL_ACCEPT, tol_violate: float = TOL_VIOLATE) -> Verdict:
    if defect <= tol_accept:
        return True
    if defect > tol_violate:
        return False
    return INCONCLUSIVE


def combine(verdicts: Iterable[Verdict]) -> Verdict:
    """False beats inconclusive beats True."""
    verdicts = list(verdicts)
    if any(v is False for v in verdicts):
        return False
    if any(v == INCONCLUSIVE for v in verdicts):
        return INCONCLUSIVE
    return True


@dataclass
class ConditionReport:
    condition: str
    verdict: Verdict
    defect: float
    witness: dict[str, Any] = field(default_factory=dict)
    truncation: dict[str, Any] = field(default_factory=dict)

    @property
    def summary(self) -> str:
        bounds = ", ".join(
            f"{key}={self.truncation[key]}" for key in ("k_max", "n_max") if self.truncation.get(key) is not None
        )
        if self.verdict is True:
            return f"no violation found up to ({bounds})" if bounds else "holds"
        if self.verdict is False:
            return f"violated at {self.witness}"
        return f"defect between tolerance bands at {self.witness}"

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _truncation(tol_accept, tol_violate, k_max=None, n_max=None, **extra) -> dict[str, Any]:
    out = {"k_max": k_max, "n_max": n_max, "tol_accept": tol_accept, "tol_violate": tol_violate}
    out.update(extra)
    return out


class _Worst:
    """Track the largest defect and where it occurred; first wins on ties."""

    def __init__(self):
        self.defect = 0.0
        self.witness: dict[str, Any] = {}

    def offer(self, defect: float, **witness) -> None:
        if not self.witness or defect > self.defect * (1 + 1e-9) + 1e-300:
            self.defect = float(defect)
            self.witness = witness


def _conjugated(U: np.ndarray, partition: ProjectivePartition, n_max: int):
    """Yield ``(n, [U^n P_mu U^dagger n for mu])`` for ``n = 1..n_max``."""
    Un = np.eye(U.shape[0], dtype=np.complex128)
    for n in range(1, n_max + 1):
        Un = U @ Un
        yield n, [Un @ P @ dagger(Un) for P in partition.projectors]


def check_commutativity(
    U, partition: ProjectivePartition, n_max: int = N_MAX, *, tol_accept=TOL_ACCEPT, tol_violate=TOL_VIOLATE
) -> ConditionReport:
    """Largest ``||[U^n P_mu' U^dagger n, P_mu'']||`` over ``n <= n_max``."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    U = as_matrix(U)
    worst = _Worst()
    m = partition.m
    # cross pairs first: a nonzero [Q_mu, P_mu] always has a cross-pair partner
    pairs = [(a, b) for a in range(m) for b in range(m) if a != b] + [(a, a) for a in range(m)]
    for n, evolved in _conjugated(U, partition, n_max):
        for mu1, mu2 in pairs:
            defect = operator_norm(commutator(evolved[mu1], partition[mu2]))
            worst.offer(defect, mu_prime=mu1, mu_double_prime=mu2, n=n)
    return ConditionReport(
        "commutativity",
        classify(worst.defect, tol_accept, tol_violate),
        worst.defect,
        worst.witness,
        _truncation(tol_accept, tol_violate, n_max=n_max),
    )


def check_single_iteration(
    U, partition: ProjectivePartition, *, tol_accept=TOL_ACCEPT, tol_violate=TOL_VIOLATE
) -> ConditionReport:
    """Commutativity at ``n = 1`` only: the necessary single-step criterion."""
    report = check_commutativity(U, partition, 1, tol_accept=tol_accept, tol_violate=tol_violate)
    report.condition = "single_iteration"
    return report


def check_sandwich(
    U, partition: ProjectivePartition, n_max: int = N_MAX, *, tol_accept=TOL_ACCEPT, tol_violate=TOL_VIOLATE
) -> ConditionReport:
    """Largest ``||P_mu' (U^n P_mu0 U^dagger n) P_mu''||`` with ``mu' != mu''``."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    U = as_matrix(U)
    worst = _Worst()
    Ps = partition.projectors
    for n, evolved in _conjugated(U, partition, n_max):
        for mu0, Q in enumerate(evolved):
            for mu1, P1 in enumerate(Ps):
                for mu2, P2 in enumerate(Ps):
                    if mu1 != mu2:
                        worst.offer(
                            operator_norm(P1 @ Q @ P2), mu0=mu0, mu_prime=mu1, mu_double_prime=mu2, n=n
                        )
    return ConditionReport(
        "sandwich",
        classify(worst.defect, tol_accept, tol_violate),
        worst.defect,
        worst.witness,
        _truncation(tol_accept, tol_violate, n_max=n_max),
    )


def check_classicality_preservation(
    U, partition: ProjectivePartition, *, tol_accept=TOL_ACCEPT, tol_violate=TOL_VIOLATE
) -> ConditionReport:
    """Does ``U (.) U^dagger`` keep every block-diagonal operator block-diagonal?

    Checking a Hermitian basis of the block-diagonal operators suffices by
    linearity.
    """
    U = as_matrix(U)
    worst = _Worst()
    for i, E in enumerate(classical_spanning_set(partition)):
        F = U @ E @ dagger(U)
        worst.offer(operator_norm(F - dephase(F, partition)), basis_element=i)
    return ConditionReport(
        "classicality_preservation",
        classify(worst.defect, tol_accept, tol_violate),
        worst.defect,
        worst.witness,
        _truncation(tol_accept, tol_violate),
    )


def _decoherence_sweep(
    condition: str,
    U,
    partition: ProjectivePartition,
    states: list[tuple[str, int, np.ndarray]],
    k_max: int,
    tol_accept: float,
    tol_violate: float,
    cap: int,
) -> ConditionReport:
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    worst = _Worst()
    k_reached = 0
    cap_hit = False
    for k in range(1, k_max + 1):
        try:
            for phase, idx, rho in states:
                check = check_medium_decoherence(U, rho, partition, k, tol_accept, cap)
                witness = {"phase": phase, "state": idx, "k": k}
                if check.witness is not None:
                    witness["histories"] = [list(check.witness[0]), list(check.witness[1])]
                worst.offer(check.defect, **witness)
        except EnumerationCapError:
            cap_hit = True
            break
        k_reached = k
    return ConditionReport(
        condition,
        classify(worst.defect, tol_accept, tol_violate),
        worst.defect,
        worst.witness,
        _truncation(tol_accept, tol_violate, k_max=k_max, k_reached=k_reached, cap=cap, cap_hit=cap_hit),
    )


def check_medium_decoherence_report(
    U,
    rho,
    partition: ProjectivePartition,
    k_max: int = K_MAX,
    *,
    tol_accept=TOL_ACCEPT,
    tol_violate=TOL_VIOLATE,
    cap=DEFAULT_CAP,
) -> ConditionReport:
    """Medium decoherence of one given state for every ``k <= k_max``."""
    states = [("given", 0, as_matrix(rho))]
    return _decoherence_sweep("medium_decoherence", U, partition, states, k_max, tol_accept, tol_violate, cap)


def check_partition_state_decoherence(
    U,
    partition: ProjectivePartition,
    k_max: int = K_MAX,
    *,
    tol_accept=TOL_ACCEPT,
    tol_violate=TOL_VIOLATE,
    cap=DEFAULT_CAP,
) -> ConditionReport:
    """Medium decoherence for every partition state and every ``k <= k_max``.

    If ``m**k`` passes ``cap`` the sweep stops; ``truncation["k_reached"]``
    and ``truncation["cap_hit"]`` record where.
    """
    states = [("partition_state", i, rho) for i, rho in enumerate(partition_states(partition))]
    return _decoherence_sweep(
        "partition_state_decoherence", U, partition, states, k_max, tol_accept, tol_violate, cap
    )


def check_all_state_decoherence(
    U,
    partition: ProjectivePartition,
    k_max: int = K_MAX,
    sample_count: int = SAMPLE_COUNT,
    seed: int = 0,
    *,
    tol_accept=TOL_ACCEPT,
    tol_violate=TOL_VIOLATE,
    cap=DEFAULT_CAP,
) -> ConditionReport:
    """Medium decoherence over a sampled stand-in for all states.

    Tested states, in order: every partition state, ``sample_count`` dephased
    random states, then ``sample_count`` random full-rank states.
    """
    if sample_count < 1:
        raise ValueError(f"sample_count must be >= 1, got {sample_count}")
    dim = partition.dim
    seeds = stream(seed).integers(0, 2**63, size=2 * sample_count).tolist()
    states = [("partition_state", i, rho) for i, rho in enumerate(partition_states(partition))]
    states += [
        ("dephased_random", i, dephase(random_density(dim, s), partition))
        for i, s in enumerate(seeds[:sample_count])
    ]
    states += [("random", i, random_density(dim, s)) for i, s in enumerate(seeds[sample_count:])]
    report = _decoherence_sweep(
        "all_state_decoherence", U, partition, states, k_max, tol_accept, tol_violate, cap
    )
    report.truncation.update(sample_count=sample_count, seed=seed)
    return report


@dataclass(frozen=True)
class RecurrenceResult:
    """Smallest ``q <= q_max`` with ``||U^q - 1|| < epsilon``, if any.

    When ``q`` is None, ``defect`` is the smallest value seen in the scan.
    """

    q: int | None
    defect: float
    epsilon: float
    q_max: int

    @property
    def found(self) -> bool:
        return self.q is not None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def recurrence_defects(U, q_max: int) -> np.ndarray:
    """``||U^q - 1||`` for ``q = 1..q_max`` from the eigenphases of ``U``."""
    theta = np.angle(np.linalg.eigvals(as_matrix(U)))
    qs = np.arange(1, q_max + 1)[:, None]
    return np.max(np.abs(np.exp(1j * qs * theta[None, :]) - 1.0), axis=1)


def find_recurrence_time(U, epsilon: float = EPSILON, q_max: int = Q_MAX) -> RecurrenceResult:
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if q_max < 1:
        raise ValueError(f"q_max must be >= 1, got {q_max}")
    defects = recurrence_defects(U, q_max)
    hits = np.flatnonzero(defects < epsilon)
    if hits.size:
        i = int(hits[0])
        return RecurrenceResult(i + 1, float(defects[i]), epsilon, q_max)
    return RecurrenceResult(None, float(defects.min()), epsilon, q_max)


@dataclass
class FullReport:
    """Every condition report for one ``(U, partition)`` plus cross-checks.

    ``warnings`` lists disagreements between conditions that the theory says
    are equivalent; at finite truncation some of these are expected.
    """

    reports: list[ConditionReport]
    recurrence: RecurrenceResult
    warnings: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.reports)

    def __getitem__(self, condition: str) -> ConditionReport:
        for r in self.reports:
            if r.condition == condition:
                return r
        raise KeyError(condition)

    @property
    def verdict(self) -> Verdict:
        return combine(r.verdict for r in self.reports)

    def to_dict(self) -> dict[str, Any]:
        return {
            "reports": [r.to_dict() for r in self.reports],
            "recurrence": self.recurrence.to_dict(),
            "warnings": list(self.warnings),
        }


def full_report(
    U,
    partition: ProjectivePartition,
    k_max: int = K_MAX,
    n_max: int = N_MAX,
    seed: int = 0,
    *,
    tol_accept=TOL_ACCEPT,
    tol_violate=TOL_VIOLATE,
    sample_count: int = SAMPLE_COUNT,
    epsilon: float = EPSILON,
    q_max: int = Q_MAX,
    cap: int = DEFAULT_CAP,
) -> FullReport:
    tols = {"tol_accept": tol_accept, "tol_violate": tol_violate}
    U = as_matrix(U)
    comm = check_commutativity(U, partition, n_max, **tols)
    sand = check_sandwich(U, partition, n_max, **tols)
    reports = [
        comm,
        check_single_iteration(U, partition, **tols),
        sand,
        check_classicality_preservation(U, partition, **tols),
        check_partition_state_decoherence(U, partition, k_max, cap=cap, **tols),
        check_all_state_decoherence(U, partition, k_max, sample_count, seed, cap=cap, **tols),
    ]
    full = FullReport(reports, find_recurrence_time(U, epsilon, q_max))

    if comm.verdict != sand.verdict:
        full.warnings.append(
            f"sandwich verdict {sand.verdict} disagrees with commutativity verdict {comm.verdict}"
        )
    part = full["partition_state_decoherence"]
    alls = full["all_state_decoherence"]
    if part.verdict is False and comm.verdict is True:
        full.warnings.append(
            f"partition-state decoherence fails but commutativity holds up to n_max={n_max}: "
            "the violating power lies beyond the truncation"
        )
    if alls.verdict is True and part.verdict is False:
        full.warnings.append("all-state decoherence passes while partition-state decoherence fails")
    if comm.verdict is True and alls.verdict is False:
        full.warnings.append(
            f"commutativity holds up to n_max={n_max} but all-state decoherence fails up to k_max={k_max}"
        )
    for r in (part, alls):
        if r.truncation.get("cap_hit"):
            full.warnings.append(
                f"{r.condition} stopped at k={r.truncation['k_reached']} by the enumeration cap {cap}"
            )
    return full
