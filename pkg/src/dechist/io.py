"""JSON file formats for matrices, partitions, decoherence matrices and reports.

Matrix:      {"dim": d, "re": [[...]], "im": [[...]]}   (optional "kind")
Partition:   {"matrices": [matrix, ...]}  or  {"dim": d, "blocks": [[i, ...], ...]}
Decoherence: {"k": k, "m": m, "order": "lex-alpha1-major", "re": [[...]], "im": [[...]]}
Probability: {"histories": [[a1, ...], ...], "p": [...]}
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .histories import DecoherenceMatrix
from .operators import KINDS, InvalidOperandError
from .partition import ProjectivePartition, diagonal_partition, validate_partition

ORDER = "lex-alpha1-major"


class FormatError(ValueError):
    """Malformed file content; ``where`` locates the problem."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


def _real_grid(rows: Any, n_rows: int, n_cols: int, where: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != n_rows:
        raise FormatError(f"expected {n_rows} rows", where)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n_cols:
            raise FormatError(f"row {i} is ragged (expected {n_cols} entries)", where)
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise FormatError(f"entry [{i}][{j}] is not a finite number: {x!r}", where)
    return np.array(rows, dtype=float).reshape(n_rows, n_cols)


def _dim(obj: dict, where: str) -> int:
    d = obj.get("dim")
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise FormatError(f"'dim' must be a positive integer, got {d!r}", where)
    return d


def matrix_from_dict(obj: Any, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise FormatError("expected an object with dim/re/im", where)
    missing = {"dim", "re", "im"} - obj.keys()
    if missing:
        raise FormatError(f"missing keys {sorted(missing)}", where)
    d = _dim(obj, where)
    re = _real_grid(obj["re"], d, d, f"{where}.re")
    im = _real_grid(obj["im"], d, d, f"{where}.im")
    return re + 1j * im


def matrix_to_dict(A, kind: str | None = None) -> dict[str, Any]:
    A = np.asarray(A, dtype=np.complex128)
    out: dict[str, Any] = {"dim": int(A.shape[0]), "re": A.real.tolist(), "im": A.imag.tolist()}
    if kind is not None:
        out["kind"] = kind
    return out


def matrix_kind(obj: dict) -> str | None:
    kind = obj.get("kind")
    if kind is not None and kind not in KINDS:
        raise FormatError(f"unknown kind {kind!r}")
    return kind


def partition_from_dict(obj: Any, tol: float, where: str = "partition") -> ProjectivePartition:
    """Parse and validate a partition; shape problems raise :class:`FormatError`."""
    if not isinstance(obj, dict):
        raise FormatError("expected an object", where)
    if "matrices" in obj:
        mats = obj["matrices"]
        if not isinstance(mats, list) or not mats:
            raise FormatError("'matrices' must be a non-empty list", where)
        projectors = [matrix_from_dict(M, f"{where}.matrices[{i}]") for i, M in enumerate(mats)]
        if len({P.shape for P in projectors}) != 1:
            raise FormatError("matrices have mixed dimensions", where)
        return validate_partition(projectors, tol)
    if "blocks" in obj:
        d = _dim(obj, where)
        blocks = obj["blocks"]
        if not isinstance(blocks, list) or not all(isinstance(b, list) for b in blocks):
            raise FormatError("'blocks' must be a list of index lists", where)
        for b in blocks:
            for i in b:
                if isinstance(i, bool) or not isinstance(i, int) or not 0 <= i < d:
                    raise FormatError(f"block index {i!r} out of range for dim {d}", where)
        try:
            return diagonal_partition(d, blocks, tol)
        except InvalidOperandError as exc:
            raise FormatError(str(exc), where) from exc
    raise FormatError("expected 'matrices' or 'dim'+'blocks'", where)


def partition_to_dict(partition: ProjectivePartition) -> dict[str, Any]:
    return {"matrices": [matrix_to_dict(P, "projector") for P in partition.projectors]}


def decoherence_to_dict(D: DecoherenceMatrix) -> dict[str, Any]:
    return {"k": D.k, "m": D.m, "order": ORDER, "re": D.entries.real.tolist(), "im": D.entries.imag.tolist()}


def decoherence_from_dict(obj: Any, where: str = "decoherence") -> DecoherenceMatrix:
    if not isinstance(obj, dict):
        raise FormatError("expected an object", where)
    if obj.get("order", ORDER) != ORDER:
        raise FormatError(f"unsupported order {obj.get('order')!r}", where)
    k, m = obj.get("k"), obj.get("m")
    if not all(isinstance(x, int) and not isinstance(x, bool) and x >= 1 for x in (k, m)):
        raise FormatError("'k' and 'm' must be positive integers", where)
    n = m**k
    re = _real_grid(obj.get("re"), n, n, f"{where}.re")
    im = _real_grid(obj.get("im"), n, n, f"{where}.im")
    return DecoherenceMatrix(k, m, re + 1j * im)


def probabilities_to_dict(table: dict[tuple[int, ...], float]) -> dict[str, Any]:
    return {"histories": [list(h) for h in table], "p": list(table.values())}


def probabilities_from_dict(obj: Any) -> dict[tuple[int, ...], float]:
    if not isinstance(obj, dict) or len(obj.get("histories", [])) != len(obj.get("p", [None])):
        raise FormatError("expected matching 'histories' and 'p' lists", "probabilities")
    return {tuple(h): float(p) for h, p in zip(obj["histories"], obj["p"])}


def read_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", str(path)) from exc
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror}", str(path)) from exc


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def load_matrix(path: str | Path) -> np.ndarray:
    return matrix_from_dict(read_json(path), str(path))


def load_partition(path: str | Path, tol: float) -> ProjectivePartition:
    return partition_from_dict(read_json(path), tol, str(path))


def load_decoherence(path: str | Path) -> DecoherenceMatrix:
    return decoherence_from_dict(read_json(path), str(path))
