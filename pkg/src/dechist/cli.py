"""Command-line front end.

Exit codes: 0 pass, 1 fail, 2 parse/input error, 3 inconclusive,
4 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np

from . import conditions as cond
from . import io
from .generators import block_preserving_unitary, haar_unitary, random_density, random_partition
from .histories import DEFAULT_CAP, check_decoherence_matrix, decoherence_matrix
from .operators import KINDS, InvalidOperandError, validate
from .partition import PartitionError, grain_type


class ExitCode(IntEnum):
    PASS = 0
    FAIL = 1
    PARSE = 2
    INCONCLUSIVE = 3
    CAP = 4


class UsageError(Exception):
    """Bad input or parameters; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    tol_accept: float = cond.TOL_ACCEPT
    tol_violate: float = cond.TOL_VIOLATE
    k_max: int = cond.K_MAX
    n_max: int = cond.N_MAX
    q_max: int = cond.Q_MAX
    epsilon: float = cond.EPSILON
    seed: int = 0
    cap: int = DEFAULT_CAP
    format: str = "text"

    def __post_init__(self):
        if not 0 <= self.tol_accept <= self.tol_violate:
            raise UsageError(f"need 0 <= tol-accept <= tol-violate, got {self.tol_accept}, {self.tol_violate}")
        for name in ("k_max", "n_max", "q_max", "cap"):
            if getattr(self, name) < 1:
                raise UsageError(f"--{name.replace('_', '')} must be >= 1")
        if self.epsilon <= 0:
            raise UsageError("--epsilon must be positive")

    @property
    def tols(self) -> dict[str, float]:
        return {"tol_accept": self.tol_accept, "tol_violate": self.tol_violate}

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        return cls(
            tol_accept=args.tol_accept,
            tol_violate=args.tol_violate,
            k_max=args.kmax,
            n_max=args.nmax,
            q_max=args.qmax,
            epsilon=args.epsilon,
            seed=args.seed,
            cap=args.cap,
            format=args.format,
        )


def _fmt(x: float) -> str:
    return f"{x:.2e}"


def _verdict_code(verdict) -> ExitCode:
    if verdict is True:
        return ExitCode.PASS
    if verdict is False:
        return ExitCode.FAIL
    return ExitCode.INCONCLUSIVE


def _verdict_text(verdict) -> str:
    if verdict is True:
        return "PASS"
    return "FAIL" if verdict is False else "INCONCLUSIVE"


def _print_reports(reports: Sequence[cond.ConditionReport], config: RunConfig) -> None:
    if config.format == "json":
        print(json.dumps([r.to_dict() for r in reports], indent=2))
        return
    for r in reports:
        print(f"{r.condition:28s} {_verdict_text(r.verdict):12s} defect={_fmt(r.defect)}  {r.summary}")


def _load_unitary(path: str, config: RunConfig) -> np.ndarray:
    U = io.load_matrix(path)
    report = validate(U, "unitary", max(config.tol_accept, 1e-8))
    if not report.valid:
        raise UsageError(f"{path}: not unitary (defect {_fmt(report.defect)})")
    return U


def _load_partition(path: str, config: RunConfig):
    try:
        return io.load_partition(path, max(config.tol_accept, 1e-10))
    except PartitionError as exc:
        raise UsageError(f"{path}: invalid partition: {exc}") from exc


def cmd_validate(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    tol = config.tol_accept
    worst = ExitCode.PASS
    for path in args.files:
        try:
            obj = io.read_json(path)
            if isinstance(obj, dict) and ("matrices" in obj or "blocks" in obj):
                try:
                    part = io.partition_from_dict(obj, tol, path)
                    print(f"{path}: valid {grain_type(part)}-grained partition, m={part.m}, ranks={list(part.ranks)}")
                except PartitionError as exc:
                    details = ", ".join(f"{k} defect {_fmt(v)}" for k, v in exc.defects.items() if v > tol)
                    print(f"{path}: INVALID partition: {details or exc}")
                    worst = max(worst, ExitCode.FAIL)
                continue
            if isinstance(obj, dict) and "k" in obj and "m" in obj:
                D = io.decoherence_from_dict(obj, path)
                herm = D.hermiticity_defect()
                norm = abs(D.diagonal().sum() - 1.0)
                ok = herm <= tol and norm <= max(tol, 1e-10)
                print(f"{path}: {'valid' if ok else 'INVALID'} decoherence matrix k={D.k} m={D.m}, "
                      f"hermiticity defect {_fmt(herm)}, normalization defect {_fmt(norm)}")
                worst = max(worst, ExitCode.PASS if ok else ExitCode.FAIL)
                continue
            M = io.matrix_from_dict(obj, path)
            kind = args.kind or io.matrix_kind(obj)
            kinds = [kind] if kind else list(KINDS)
            results = {k: validate(M, k, tol) for k in kinds}
            passing = [k for k, r in results.items() if r.valid]
            if passing:
                print(f"{path}: valid {'/'.join(passing)} (dim {M.shape[0]})")
            else:
                detail = "; ".join(f"{k}: {r.failed} defect {_fmt(r.defect)}" for k, r in results.items())
                print(f"{path}: INVALID {detail}")
                worst = max(worst, ExitCode.FAIL)
        except io.FormatError as exc:
            print(f"parse error: {exc}", file=sys.stderr)
            worst = ExitCode.PARSE
    return worst


def _check_cap(m: int, config: RunConfig) -> ExitCode | None:
    if m**config.k_max > config.cap:
        print(f"enumeration cap exceeded: m**k = {m}**{config.k_max} = {m ** config.k_max} > {config.cap}",
              file=sys.stderr)
        return ExitCode.CAP
    return None


def cmd_decohere(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    U = _load_unitary(args.unitary, config)
    part = _load_partition(args.partition, config)
    capped = _check_cap(part.m, config)
    if capped is not None:
        return capped
    if args.rho:
        rho = io.load_matrix(args.rho)
        if not validate(rho, "density", max(config.tol_accept, 1e-8)).valid:
            raise UsageError(f"{args.rho}: not a density operator")
        report = cond.check_medium_decoherence_report(U, rho, part, config.k_max, cap=config.cap, **config.tols)
        if args.dump_matrix or args.dump_probabilities:
            D = decoherence_matrix(U, rho, part, config.k_max, config.cap)
            if args.dump_matrix:
                io.write_json(args.dump_matrix, io.decoherence_to_dict(D))
            if args.dump_probabilities:
                io.write_json(args.dump_probabilities,
                              io.probabilities_to_dict(dict(zip(D.histories, D.diagonal().tolist()))))
    else:
        if args.dump_matrix or args.dump_probabilities:
            raise UsageError("--dump-matrix/--dump-probabilities need --rho")
        report = cond.check_partition_state_decoherence(U, part, config.k_max, cap=config.cap, **config.tols)
    _print_reports([report], config)
    return _verdict_code(report.verdict)


def cmd_check_matrix(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    D = io.load_decoherence(args.file)
    check = check_decoherence_matrix(D, config.tol_accept)
    verdict = cond.classify(check.defect, config.tol_accept, config.tol_violate)
    witness = {"histories": [list(h) for h in check.witness]} if check.witness else {}
    report = cond.ConditionReport("medium_decoherence", verdict, check.defect, witness,
                                  {"k_max": D.k, "n_max": None, **config.tols})
    _print_reports([report], config)
    return _verdict_code(verdict)


def cmd_conditions(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    U = _load_unitary(args.unitary, config)
    part = _load_partition(args.partition, config)
    capped = _check_cap(part.m, config)
    if capped is not None:
        return capped
    full = cond.full_report(
        U, part, config.k_max, config.n_max, config.seed,
        epsilon=config.epsilon, q_max=config.q_max, cap=config.cap, **config.tols,
    )
    _print_reports(full.reports, config)
    if config.format == "text":
        rec = full.recurrence
        print(f"{'recurrence':28s} q={rec.q if rec.found else 'not found'} defect={_fmt(rec.defect)} "
              f"(epsilon={rec.epsilon}, q_max={rec.q_max})")
    for w in full.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return _verdict_code(full.verdict)


def cmd_recurrence(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    U = _load_unitary(args.unitary, config)
    rec = cond.find_recurrence_time(U, config.epsilon, config.q_max)
    if config.format == "json":
        print(json.dumps(rec.to_dict(), indent=2))
    elif rec.found:
        print(f"q = {rec.q}, defect = {_fmt(rec.defect)} (epsilon = {rec.epsilon})")
    else:
        print(f"not found <= q_max = {rec.q_max} (smallest defect {_fmt(rec.defect)}, epsilon = {rec.epsilon})")
    return ExitCode.PASS if rec.found else ExitCode.FAIL


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def cmd_generate(args: argparse.Namespace, config: RunConfig) -> ExitCode:
    seed = config.seed
    try:
        if args.kind == "haar":
            obj = io.matrix_to_dict(haar_unitary(args.dim, seed), "unitary")
        elif args.kind == "density":
            obj = io.matrix_to_dict(random_density(args.dim, seed), "density")
        elif args.kind == "partition":
            blocks = _int_list(args.blocks) if args.blocks else [1] * args.dim
            obj = io.partition_to_dict(random_partition(args.dim, blocks, seed))
        else:
            if not args.partition:
                raise UsageError("block-preserving needs --partition FILE")
            part = _load_partition(args.partition, config)
            perm = _int_list(args.permutation) if args.permutation else list(range(part.m))
            obj = io.matrix_to_dict(block_preserving_unitary(part, perm, seed), "unitary")
    except (ValueError, InvalidOperandError) as exc:
        raise UsageError(str(exc)) from exc
    if args.out:
        io.write_json(args.out, obj)
    else:
        print(json.dumps(obj))
    return ExitCode.PASS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-accept", type=float, default=cond.TOL_ACCEPT)
    common.add_argument("--tol-violate", type=float, default=cond.TOL_VIOLATE)
    common.add_argument("--kmax", type=int, default=cond.K_MAX)
    common.add_argument("--nmax", type=int, default=cond.N_MAX)
    common.add_argument("--qmax", type=int, default=cond.Q_MAX)
    common.add_argument("--epsilon", type=float, default=cond.EPSILON)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max number of histories m**k")
    common.add_argument("--format", choices=("text", "json"), default="text")

    parser = argparse.ArgumentParser(prog="dechist", description="Decoherent-histories condition checker")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="validate matrix/partition/decoherence files")
    p.add_argument("files", nargs="+")
    p.add_argument("--as", dest="kind", choices=KINDS, help="validate bare matrices as this kind")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decohere", parents=[common], help="medium decoherence up to --kmax")
    p.add_argument("unitary")
    p.add_argument("partition")
    p.add_argument("--rho", help="initial state; default sweeps all partition states")
    p.add_argument("--dump-matrix", help="write the decoherence matrix at k = --kmax (needs --rho)")
    p.add_argument("--dump-probabilities", help="write the history probabilities at k = --kmax (needs --rho)")
    p.set_defaults(func=cmd_decohere)

    p = sub.add_parser("check-matrix", parents=[common], help="re-check a dumped decoherence matrix")
    p.add_argument("file")
    p.set_defaults(func=cmd_check_matrix)

    p = sub.add_parser("conditions", parents=[common], help="run the full condition battery")
    p.add_argument("unitary")
    p.add_argument("partition")
    p.set_defaults(func=cmd_conditions)

    p = sub.add_parser("recurrence", parents=[common], help="smallest q with ||U^q - 1|| < epsilon")
    p.add_argument("unitary")
    p.set_defaults(func=cmd_recurrence)

    p = sub.add_parser("generate", parents=[common], help="write a seeded instance file")
    p.add_argument("kind", choices=("haar", "partition", "block-preserving", "density"))
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--blocks", help="comma-separated block sizes, e.g. 2,1")
    p.add_argument("--partition", help="partition file (block-preserving)")
    p.add_argument("--permutation", help="comma-separated sigma(mu), e.g. 1,0")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_args(args)
        return int(args.func(args, config))
    except io.FormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
    except (UsageError, InvalidOperandError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return int(ExitCode.PARSE)


if __name__ == "__main__":
    sys.exit(main())
