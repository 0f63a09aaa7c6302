"""Plain-text dump of a :class:`StandardLp` in an MPS-like layout.

Example::

    NAME P3
    META kind P3
    META omega0 0
    META fully_degenerate 1
    META block lambda 0 2
    ROWS
     N OBJ
     E R0
    COLUMNS
     C0 OBJ 1.0
     C0 R0 -3.0
    RHS
     RHS R0 0.0
    BOUNDS
     FR BND C0
    ENDATA

Numbers are written with ``repr`` so a dump round-trips exactly. Zero
matrix entries are omitted. Lines starting with ``*`` are comments.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .lp import FormulationMeta, Kind, StandardLp

_SECTIONS = ("ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA")


def _ints(values) -> str:
    return " ".join(str(int(v)) for v in values)


def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def dump_lp(lp: StandardLp) -> str:
    meta = lp.meta
    lines = [f"NAME {meta.kind.value}", f"META kind {meta.kind.value}"]
    if meta.omega0_index is not None:
        lines.append(f"META omega0 {meta.omega0_index}")
    lines.append(f"META fully_degenerate {int(meta.fully_degenerate)}")
    for name, start, stop in meta.layout:
        lines.append(f"META block {name} {start} {stop}")
    if meta.other_outcomes:
        lines.append(f"META other_outcomes {_ints(meta.other_outcomes)}")
    if meta.initial_basis is not None:
        lines.append(f"META initial_basis {_ints(meta.initial_basis)}")
    if meta.row_signs:
        lines.append(f"META row_signs {_floats(meta.row_signs)}")
    if meta.r:
        lines.append(f"META r {_floats(meta.r)}")

    lines += ["ROWS", " N OBJ"]
    lines += [f" E R{i}" for i in range(lp.m)]
    lines.append("COLUMNS")
    for j in range(lp.n):
        lines.append(f" C{j} OBJ {float(lp.c[j])!r}")
        for i in np.flatnonzero(lp.A[:, j]):
            lines.append(f" C{j} R{i} {float(lp.A[i, j])!r}")
    lines.append("RHS")
    lines += [f" RHS R{i} {float(lp.b[i])!r}" for i in range(lp.m)]
    if meta.free_columns:
        lines.append("BOUNDS")
        lines += [f" FR BND C{j}" for j in meta.free_columns]
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def _index(token: str, prefix: str, line_no: int) -> int:
    if not token.startswith(prefix) or not token[len(prefix):].isdigit():
        raise InvalidInputError(f"line {line_no}: expected {prefix}<index>, got {token!r}")
    return int(token[len(prefix):])


def parse_lp(text: str) -> StandardLp:
    """Inverse of :func:`dump_lp`."""
    meta: dict = {"kind": Kind.GENERIC, "omega0": None, "fully_degenerate": False, "layout": []}
    n_rows = 0
    entries: list[tuple[int, int, float]] = []
    cost: dict[int, float] = {}
    rhs: dict[int, float] = {}
    free: list[int] = []
    section = None
    n_cols = 0
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("*"):
            continue
        parts = line.split()
        try:
            if parts[0] == "NAME":
                continue
            if parts[0] == "META":
                key, args = parts[1], parts[2:]
                if key == "kind":
                    meta["kind"] = Kind(args[0])
                elif key == "omega0":
                    meta["omega0"] = int(args[0])
                elif key == "fully_degenerate":
                    meta["fully_degenerate"] = bool(int(args[0]))
                elif key == "block":
                    meta["layout"].append((args[0], int(args[1]), int(args[2])))
                elif key in ("other_outcomes", "initial_basis"):
                    meta[key] = tuple(int(a) for a in args)
                elif key in ("row_signs", "r"):
                    meta[key] = tuple(float(a) for a in args)
                else:
                    raise InvalidInputError(f"line {line_no}: unknown META key {key!r}")
                continue
            if len(parts) == 1 and parts[0] in _SECTIONS:
                section = parts[0]
                if section == "ENDATA":
                    break
                continue
            if section == "ROWS":
                if parts[0] == "E":
                    if _index(parts[1], "R", line_no) != n_rows:
                        raise InvalidInputError(f"line {line_no}: rows must be numbered in order")
                    n_rows += 1
                elif parts[0] != "N":
                    raise InvalidInputError(f"line {line_no}: only E rows are supported")
            elif section == "COLUMNS":
                j = _index(parts[0], "C", line_no)
                n_cols = max(n_cols, j + 1)
                value = float(parts[2])
                if parts[1] == "OBJ":
                    cost[j] = value
                else:
                    entries.append((_index(parts[1], "R", line_no), j, value))
            elif section == "RHS":
                rhs[_index(parts[1], "R", line_no)] = float(parts[2])
            elif section == "BOUNDS":
                if parts[0] != "FR":
                    raise InvalidInputError(f"line {line_no}: only FR bounds are supported")
                free.append(_index(parts[2], "C", line_no))
            else:
                raise InvalidInputError(f"line {line_no}: data outside a section")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, InvalidInputError):
                raise
            raise InvalidInputError(f"line {line_no}: cannot parse {raw!r}") from exc
    if section != "ENDATA":
        raise InvalidInputError("missing ENDATA")

    A = np.zeros((n_rows, n_cols))
    for i, j, value in entries:
        if i >= n_rows:
            raise InvalidInputError(f"row R{i} was not declared")
        A[i, j] = value
    c = np.array([cost.get(j, 0.0) for j in range(n_cols)])
    b = np.array([rhs.get(i, 0.0) for i in range(n_rows)])
    fm = FormulationMeta(
        meta["kind"], meta["omega0"], tuple(meta["layout"]),
        fully_degenerate=meta["fully_degenerate"],
        other_outcomes=meta.get("other_outcomes", ()),
        initial_basis=meta.get("initial_basis"),
        row_signs=meta.get("row_signs", ()),
        r=meta.get("r", ()),
        free_columns=tuple(free),
    )
    return StandardLp(A, b, c, fm)


def load_lp(path: str | Path) -> StandardLp:
    return parse_lp(Path(path).read_text())
