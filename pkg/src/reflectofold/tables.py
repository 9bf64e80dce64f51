"""Labelled adjacency matrices: export and label-aligned comparison."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .labels import FacetLabel


@dataclass(frozen=True)
class LabeledMatrix:
    rows: tuple  # FacetLabel per row/column
    cells: tuple  # tuple of tuples; int, or str for an underlined general angle

    @property
    def size(self) -> int:
        return len(self.rows)

    def index(self, label) -> int:
        if isinstance(label, str):
            label = FacetLabel.parse(label)
        return self.rows.index(label)

    def entry(self, a, b):
        return self.cells[self.index(a)][self.index(b)]

    def is_symmetric(self) -> bool:
        n = self.size
        return all(self.cells[i][j] == self.cells[j][i] for i in range(n) for j in range(n))

    def reordered(self, order) -> "LabeledMatrix":
        idx = [self.index(x) for x in order]
        return LabeledMatrix(
            tuple(self.rows[i] for i in idx),
            tuple(tuple(self.cells[i][j] for j in idx) for i in idx),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + [str(r) for r in self.rows])
        for r, row in zip(self.rows, self.cells):
            w.writerow([str(r)] + [str(x) for x in row])
        return buf.getvalue()

    def to_text(self) -> str:
        names = [str(r) for r in self.rows]
        width = max([len(n) for n in names] + [1])
        colw = max([len(str(x)) for row in self.cells for x in row] + [1])
        lines = []
        for name, row in zip(names, self.cells):
            cells = " ".join(("." if x == 0 else str(x)).rjust(colw) for x in row)
            lines.append(f"{name.ljust(width)} | {cells}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"rows": [str(r) for r in self.rows], "matrix": [list(r) for r in self.cells]}


@dataclass(frozen=True)
class CellDiff:
    row: str
    col: str
    expected: object
    actual: object

    def __str__(self) -> str:
        return f"({self.row}, {self.col}): expected {self.expected}, got {self.actual}"


def diff_matrices(actual: LabeledMatrix, expected: LabeledMatrix) -> list:
    """Cell differences after aligning rows by label.

    Labels present on one side only are reported with ``None`` on the other.
    """
    out = []
    a_rows, e_rows = set(actual.rows), set(expected.rows)
    for lab in expected.rows:
        if lab not in a_rows:
            out.append(CellDiff(str(lab), "*", "row", None))
    for lab in actual.rows:
        if lab not in e_rows:
            out.append(CellDiff(str(lab), "*", None, "row"))
    common = [r for r in expected.rows if r in a_rows]
    for r in common:
        for c in common:
            e, a = expected.entry(r, c), actual.entry(r, c)
            if e != a:
                out.append(CellDiff(str(r), str(c), e, a))
    return out
