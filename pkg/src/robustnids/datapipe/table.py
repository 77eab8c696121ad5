"""Raw CSV ingestion against a declared column schema."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

COLUMN_KINDS = ("numeric", "categorical", "label")


class SchemaError(ValueError):
    """Schema file or schema/header mismatch problems."""


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in COLUMN_KINDS:
            raise SchemaError(f"unknown column kind {self.kind!r} for {self.name!r}")


@dataclass
class RawRecordTable:
    """Pre-encoding record table: numeric cells are floats, the rest are strings.

    Rows whose numeric cells failed to parse were dropped at ingest time and
    are accounted for in ``dropped_row_count``.
    """

    columns: list[ColumnSpec]
    rows: list[tuple]
    dropped_row_count: int = 0
    label_column: str = field(init=False)

    def __post_init__(self):
        labels = [c.name for c in self.columns if c.kind == "label"]
        if len(labels) != 1:
            raise SchemaError(f"expected exactly one label column, found {labels}")
        self.label_column = labels[0]
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} values, expected {width}")

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def column_values(self, name: str) -> list:
        idx = [c.name for c in self.columns].index(name)
        return [row[idx] for row in self.rows]


def load_schema(path) -> list[ColumnSpec]:
    """Read a schema file: CSV lines of (column name, kind), '#' comments allowed."""
    path = Path(path)
    specs = []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parsed = next(csv.reader([stripped]))
            if len(parsed) != 2:
                raise SchemaError(f"{path}:{lineno}: expected 'name,kind', got {stripped!r}")
            specs.append(ColumnSpec(parsed[0].strip(), parsed[1].strip()))
    if not specs:
        raise SchemaError(f"{path}: empty schema")
    return specs


def ingest_csv(path, schema: list[ColumnSpec]) -> RawRecordTable:
    """Parse a headered CSV into a RawRecordTable.

    Column order follows the CSV header. Rows with unparseable or non-finite
    numeric cells are dropped and counted.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    by_name = {c.name: c for c in schema}
    if not any(c.kind == "label" for c in schema):
        raise SchemaError("schema declares no label column")

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, no header row") from None
        unknown = [h for h in header if h not in by_name]
        missing = [n for n in by_name if n not in header]
        if unknown or missing:
            raise SchemaError(
                f"{path}: header/schema mismatch (unknown columns {unknown}, missing {missing})"
            )
        columns = [by_name[h] for h in header]
        if not any(c.kind == "label" for c in columns):
            raise SchemaError(f"{path}: no label column in header")

        numeric_idx = [i for i, c in enumerate(columns) if c.kind == "numeric"]
        rows = []
        dropped = 0
        for raw in reader:
            if len(raw) != len(columns):
                dropped += 1
                continue
            row = [cell.strip() for cell in raw]
            ok = True
            for i in numeric_idx:
                try:
                    v = float(row[i])
                except ValueError:
                    ok = False
                    break
                if not math.isfinite(v):
                    ok = False
                    break
                row[i] = v
            if ok:
                rows.append(tuple(row))
            else:
                dropped += 1

    return RawRecordTable(columns=columns, rows=rows, dropped_row_count=dropped)
