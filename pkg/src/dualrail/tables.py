"""Tabular output: fixed, typed columns written as CSV or JSON.

CSV floats are written with repr so they parse back exactly. Missing values
are empty cells in CSV and null in JSON. The JSON document is
``{"experiment", "columns", "rows", "meta"}`` with rows as lists in column
order, mirroring the CSV.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

TYPES = {"str": str, "float": float, "int": int}


@dataclass
class Table:
    experiment: str
    columns: list          # [(name, type_name)]
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return [c for c, _ in self.columns]

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, expected {len(self.columns)}")
        row = []
        for v, (name, typ) in zip(values, self.columns):
            row.append(None if v is None else TYPES[typ](v))
        self.rows.append(row)

    def column(self, name: str) -> list:
        i = self.names.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.names)
        for r in self.rows:
            w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in r])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"experiment": self.experiment, "columns": [[c, t] for c, t in self.columns],
               "rows": self.rows, "meta": self.meta}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def dumps(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")


def _parse(cell: str, typ: str):
    if cell == "":
        return None
    return TYPES[typ](cell)


def from_csv(text: str, experiment: str, columns: list) -> Table:
    """Parse CSV produced by :meth:`Table.to_csv` given its column schema."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != [c for c, _ in columns]:
        raise ValueError(f"unexpected header {header}")
    t = Table(experiment, list(columns))
    for row in reader:
        t.rows.append([_parse(cell, typ) for cell, (_, typ) in zip(row, columns)])
    return t


def from_json(text: str) -> Table:
    doc = json.loads(text)
    return Table(doc["experiment"], [tuple(c) for c in doc["columns"]], doc["rows"], doc["meta"])
