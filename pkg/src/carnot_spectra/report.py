"""Small tabular report container with deterministic CSV output."""

from __future__ import annotations

import csv
import io
import math

import numpy as np


def _fmt(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+}j"
    return str(v)


class ReportTable:
    """Rows of named values with a fixed column order."""

    def __init__(self, columns):
        self.columns = list(columns)
        self.rows = []

    def add(self, row: dict):
        extra = set(row) - set(self.columns)
        if extra:
            raise KeyError(f"unknown report columns {sorted(extra)}")
        self.rows.append(dict(row))

    def column(self, name):
        return [r.get(name) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r.get(c, "")) for c in self.columns])
        return buf.getvalue()

    def __len__(self):
        return len(self.rows)

    def __repr__(self):
        return f"ReportTable({len(self.rows)} rows, columns={self.columns})"
