"""JSON serialisation of lattices and matrices.

A lattice file holds ``{"ambient_dim": n, "rank": d, "basis": rows}`` where
``rows`` are the n rows of the n x d basis matrix B.  Cells may be numbers or
decimal strings.
"""

from __future__ import annotations

import json
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from .errors import DegenerateBasisError
from .lattice import LatticeBasis


def _cell(v) -> float:
    if isinstance(v, bool):
        raise DegenerateBasisError("boolean basis entry")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(Decimal(v.strip()))
        except InvalidOperation as exc:
            raise DegenerateBasisError(f"cannot parse basis entry {v!r}") from exc
    raise DegenerateBasisError(f"unsupported basis entry {v!r}")


def lattice_from_dict(obj: dict) -> LatticeBasis:
    try:
        n, d, rows = int(obj["ambient_dim"]), int(obj["rank"]), obj["basis"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DegenerateBasisError("lattice JSON needs ambient_dim, rank and basis") from exc
    if d == 0:
        return LatticeBasis.trivial(n)
    if len(rows) != n or any(len(r) != d for r in rows):
        raise DegenerateBasisError(f"basis must have {n} rows of {d} entries")
    return LatticeBasis(np.array([[_cell(v) for v in r] for r in rows], dtype=float))


def lattice_to_dict(basis: LatticeBasis) -> dict:
    return {
        "ambient_dim": basis.ambient_dim,
        "rank": basis.rank,
        "basis": basis.columns.tolist() if basis.rank else [[] for _ in range(basis.ambient_dim)],
    }


def load_lattice(path: str | Path) -> LatticeBasis:
    with open(path, encoding="utf-8") as fh:
        return lattice_from_dict(json.load(fh))


def save_lattice(basis: LatticeBasis, path: str | Path) -> None:
    Path(path).write_text(json.dumps(lattice_to_dict(basis), indent=2) + "\n", encoding="utf-8")


def save_matrix(M: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(json.dumps({"matrix": np.asarray(M).tolist()}, indent=2) + "\n", encoding="utf-8")
