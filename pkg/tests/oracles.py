"""Brute-force reference computations, independent of the library's fast paths.

Run as a script to regenerate ``fixtures/necessity_oracle.json``.
"""

from __future__ import annotations

import itertools
import json
import sys
from pathlib import Path

import numpy as np

FIXTURE = Path(__file__).parent / "fixtures" / "necessity_oracle.json"
NECESSITY_SEED_BASE = 4000
NECESSITY_CASES = 50


def heisenberg_class_operator(U, projectors, h):
    """Product of ``U^{dagger j} P_{a_j} U^j`` factors, latest time leftmost."""
    U = np.asarray(U, dtype=complex)
    C = np.eye(U.shape[0], dtype=complex)
    for j, a in enumerate(h, start=1):
        Uj = np.linalg.matrix_power(U, j)
        C = (Uj.conj().T @ projectors[a] @ Uj) @ C
    return C


def brute_force_functional(U, rho, projectors, k):
    """Every ``Tr[C_a rho C_b^dagger]`` by explicit loops, lexicographic order."""
    hs = list(itertools.product(range(len(projectors)), repeat=k))
    Cs = [heisenberg_class_operator(U, projectors, h) for h in hs]
    n = len(hs)
    D = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            D[i, j] = np.trace(Cs[i] @ rho @ Cs[j].conj().T)
    return D


def identity_insertion_functional(U, rho, projectors, k, keep):
    """Functional of length-``k`` chains with identities at times not in ``keep``."""
    d = U.shape[0]
    keep = sorted(keep)
    hs = list(itertools.product(range(len(projectors)), repeat=len(keep)))

    def chain(h):
        ops = [np.eye(d)] * k
        for t, a in zip(keep, h):
            ops[t - 1] = projectors[a]
        C = np.eye(d, dtype=complex)
        for P in ops:
            C = P @ U @ C
        return C

    Cs = [chain(h) for h in hs]
    return np.array([[np.trace(a @ rho @ b.conj().T) for b in Cs] for a in Cs])


def max_off_diagonal(D):
    M = np.abs(D).copy()
    np.fill_diagonal(M, 0.0)
    return float(M.max())


def necessity_cases():
    """The seeded Haar suite: (case, dim, unitary seed, partition seed)."""
    for case in range(NECESSITY_CASES):
        dim = 2 + case % 3
        yield case, dim, NECESSITY_SEED_BASE + 2 * case, NECESSITY_SEED_BASE + 2 * case + 1


def build_necessity_fixture(k_max=4, tol=1e-10):
    from dechist.conditions import check_single_iteration
    from dechist.generators import haar_unitary, random_partition
    from dechist.partition import partition_states

    records = []
    for case, dim, useed, pseed in necessity_cases():
        U = haar_unitary(dim, useed)
        part = random_partition(dim, [1] * dim, pseed)
        Ps = list(part.projectors)
        worst, witness = 0.0, None
        for k in range(1, k_max + 1):
            for nu, rho in enumerate(partition_states(part)):
                defect = max_off_diagonal(brute_force_functional(U, rho, Ps, k))
                if defect > worst:
                    worst, witness = defect, {"state": nu, "k": k}
        records.append(
            {
                "case": case,
                "dim": dim,
                "unitary_seed": useed,
                "partition_seed": pseed,
                "single_iteration_defect": check_single_iteration(U, part).defect,
                "oracle_defect": worst,
                "oracle_decoherent": worst <= tol,
                "oracle_witness": witness,
            }
        )
    return {"k_max": k_max, "tol": tol, "cases": records}


if __name__ == "__main__":
    data = build_necessity_fixture()
    FIXTURE.parent.mkdir(exist_ok=True)
    FIXTURE.write_text(json.dumps(data, indent=1) + "\n")
    print(f"wrote {len(data['cases'])} cases to {FIXTURE}", file=sys.stderr)
