"""Tables emitted by the command-line tools and the JSON fixture readers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .config import ConfigError


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"table {self.name}: expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


def format_number(v, precision: int) -> str:
    """Fixed significant-digit rendering; ``-0`` prints as ``0``."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0.0:
            v = 0.0
        return f"{v:.{precision}g}"
    return str(v)


def _json_value(v, precision: int):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not np.isfinite(v):
            return str(v)
        return float(format_number(v, precision))
    return v


def write_csv(tables: Iterable[Table], out: TextIO, precision: int) -> None:
    first = True
    for t in tables:
        if not first:
            out.write("\n")
        first = False
        out.write(f"# table: {t.name}\n")
        out.write(",".join(t.columns) + "\n")
        for row in t.rows:
            out.write(",".join(format_number(v, precision) for v in row) + "\n")


def write_json(command: str, tables: Iterable[Table], out: TextIO, precision: int) -> None:
    doc = {"command": command,
           "tables": {t.name: {"columns": t.columns,
                               "rows": [[_json_value(v, precision) for v in r] for r in t.rows]}
                      for t in tables}}
    json.dump(doc, out, indent=2, sort_keys=True)
    out.write("\n")


def parse_complex(data, name: str, ndim: int = 2, square: bool = True) -> np.ndarray:
    """Array of ``ndim`` dimensions whose leaves are ``[re, im]`` pairs or plain reals."""
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: not a numeric array ({exc})") from exc
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        arr = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim != ndim:
        raise ConfigError(f"{name}: expected a {ndim}D array of numbers or [re, im] pairs")
    if ndim == 2 and square and arr.shape[0] != arr.shape[1]:
        raise ConfigError(f"{name}: matrix must be square, got shape {arr.shape}")
    return np.asarray(arr, dtype=complex)


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return data
