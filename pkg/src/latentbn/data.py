"""Mixed continuous/ordinal/binary datasets and their on-disk format.

A dataset is a headered CSV of values plus a sidecar types file with one
``column,kind[,levels]`` line per column. Ordinal columns take integer
levels 1..K, binary columns take {0, 1}, continuous columns are floats
written with shortest round-trip formatting so re-reading is lossless.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

KINDS = ("continuous", "ordinal", "binary")


@dataclass(frozen=True)
class Column:
    kind: str
    values: np.ndarray
    levels: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown column kind {self.kind!r}")
        arr = np.asarray(self.values)
        if arr.ndim != 1:
            raise ValueError("column values must be one-dimensional")
        if self.kind == "continuous":
            arr = arr.astype(np.float64)
            if self.levels is not None:
                raise ValueError("continuous columns do not declare levels")
            if not np.all(np.isfinite(arr)):
                raise ValueError("continuous values must be finite")
        else:
            if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
                raise ValueError(f"{self.kind} values must be integers")
            arr = arr.astype(np.int64)
            if self.kind == "binary":
                if self.levels not in (None, 2):
                    raise ValueError("binary columns have exactly 2 levels")
                object.__setattr__(self, "levels", 2)
                if arr.size and not np.all((arr == 0) | (arr == 1)):
                    raise ValueError("binary values must be 0 or 1")
            else:
                if self.levels is None or int(self.levels) < 2:
                    raise ValueError("ordinal columns need levels >= 2")
                object.__setattr__(self, "levels", int(self.levels))
                if arr.size and (arr.min() < 1 or arr.max() > self.levels):
                    raise ValueError(
                        f"ordinal values must lie in 1..{self.levels}"
                    )
        object.__setattr__(self, "values", arr)
        arr.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class MixedDataset:
    columns: tuple[Column, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        if len(self.columns) != len(self.labels):
            raise ValueError("labels and columns must align")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("column labels must be unique")
        if not self.columns:
            raise ValueError("dataset needs at least one column")
        lengths = {c.n for c in self.columns}
        if len(lengths) != 1:
            raise ValueError("all columns must share the sample size")

    @property
    def n(self) -> int:
        return self.columns[0].n

    @property
    def p(self) -> int:
        return len(self.columns)

    def column_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no column named {label!r}") from None

    def take_rows(self, rows: np.ndarray) -> "MixedDataset":
        cols = tuple(
            Column(c.kind, c.values[rows], c.levels) for c in self.columns
        )
        return MixedDataset(cols, self.labels)


def _format_value(col: Column, v) -> str:
    if col.kind == "continuous":
        return repr(float(v))
    return str(int(v))


def write_dataset(ds: MixedDataset, data_path: str | Path, types_path: str | Path) -> None:
    data_path, types_path = Path(data_path), Path(types_path)
    with data_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ds.labels)
        for r in range(ds.n):
            writer.writerow(
                _format_value(col, col.values[r]) for col in ds.columns
            )
    lines = []
    for label, col in zip(ds.labels, ds.columns):
        if col.kind == "ordinal":
            lines.append(f"{label},ordinal,{col.levels}")
        else:
            lines.append(f"{label},{col.kind}")
    types_path.write_text("\n".join(lines) + "\n")


def read_types(types_path: str | Path) -> list[tuple[str, str, int | None]]:
    out = []
    for ln, raw in enumerate(Path(types_path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [x.strip() for x in line.split(",")]
        if len(parts) == 2:
            label, kind = parts
            levels = None
        elif len(parts) == 3:
            label, kind = parts[0], parts[1]
            try:
                levels = int(parts[2])
            except ValueError:
                raise ValueError(f"{types_path}:{ln}: bad level count {parts[2]!r}")
        else:
            raise ValueError(f"{types_path}:{ln}: expected 'column,kind[,levels]'")
        if kind not in KINDS:
            raise ValueError(f"{types_path}:{ln}: unknown kind {kind!r}")
        out.append((label, kind, levels))
    if not out:
        raise ValueError(f"{types_path}: no column declarations")
    return out


def read_dataset(data_path: str | Path, types_path: str | Path) -> MixedDataset:
    declared = read_types(types_path)
    with Path(data_path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{data_path}: empty file")
    header, body = rows[0], rows[1:]
    labels = [label for label, _, _ in declared]
    if header != labels:
        raise ValueError(
            f"{data_path}: header {header} does not match types sidecar {labels}"
        )
    raw = np.empty((len(body), len(labels)), dtype=np.float64)
    for r, row in enumerate(body):
        if len(row) != len(labels):
            raise ValueError(f"{data_path}: row {r + 2} has {len(row)} fields")
        raw[r] = [float(x) for x in row]
    cols = tuple(
        Column(kind, raw[:, k], levels)
        for k, (_, kind, levels) in enumerate(declared)
    )
    return MixedDataset(cols, tuple(labels))
