"""Transcribed reference tables, facet lists and class lists.

``golden.json`` is a literal transcription and carries a checksum.  Cells
where the printed tables contradict each other are listed separately in
``errata.json`` together with the evidence; the pipeline reports them as
known errata instead of silently editing the transcription.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from importlib import resources

from .labels import FacetLabel, LabelSyntaxError
from .tables import LabeledMatrix

ENV_VAR = "REFLECTOFOLD_GOLDEN"
STATE_TABLES = tuple(f"t{i}" for i in range(9))
SCHEME_TABLES = ("tr1", "tr2", "tr3", "tr4")
SCHEME_OF_TABLE = {"tr1": "R_T", "tr2": "R_half", "tr3": "R_quarter", "tr4": "R_HW"}


class GoldenError(ValueError):
    pass


def checksum(doc: dict) -> str:
    body = {k: v for k, v in doc.items() if k != "sha256"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class Erratum:
    kind: str  # "cell" or "i1"
    where: str  # table id or polytope name
    type: int | None
    row: FacetLabel | None
    col: FacetLabel | None
    printed: object
    corrected: object
    evidence: str

    def key(self) -> tuple:
        return (self.kind, self.where, self.type, self.row, self.col)

    def __str__(self) -> str:
        if self.kind == "i1":
            return f"{self.where}: printed list has {self.printed!r}; {self.evidence}"
        return (
            f"{self.where} type {self.type} ({self.row}, {self.col}): printed {self.printed}, "
            f"computed {self.corrected}; {self.evidence}"
        )


@dataclass(frozen=True)
class GoldenTables:
    i1: dict  # "P0".. -> tuple of FacetLabel
    tables: dict  # (table id, type) -> LabeledMatrix
    schemes: dict  # scheme name -> {"table", "classes", "corners"}
    errata: tuple
    sha256: str
    source: str

    def table(self, tid: str, t: int) -> LabeledMatrix:
        try:
            return self.tables[(tid, t)]
        except KeyError:
            raise GoldenError(f"no golden table {tid} type {t}") from None

    def erratum(self, kind, where, t=None, row=None, col=None):
        """The erratum for a cell (either orientation) or a facet list."""
        for e in self.errata:
            if e.key() in ((kind, where, t, row, col), (kind, where, t, col, row)):
                return e
        return None

    def with_entry(self, tid: str, t: int, i: int, j: int, value) -> "GoldenTables":
        """Copy with one cell replaced; used by the fault-injection hook."""
        m = self.table(tid, t)
        cells = [list(r) for r in m.cells]
        cells[i][j] = value
        tables = dict(self.tables)
        tables[(tid, t)] = LabeledMatrix(m.rows, tuple(tuple(r) for r in cells))
        return GoldenTables(self.i1, tables, self.schemes, self.errata, self.sha256, self.source)


def _parse(text: str, where: str) -> FacetLabel:
    try:
        return FacetLabel.parse(text)
    except LabelSyntaxError as exc:
        raise GoldenError(f"{where}: {exc}") from None


def _read(path: str | None, name: str) -> tuple:
    if path:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh), path
    ref = resources.files("reflectofold") / "data" / name
    return json.loads(ref.read_text(encoding="utf-8")), f"<package>/data/{name}"


def load_errata(doc: list) -> tuple:
    out = []
    for k, e in enumerate(doc):
        where = f"errata[{k}]"
        if e["kind"] == "cell":
            out.append(
                Erratum(
                    "cell", e["table"], int(e["type"]), _parse(e["row"], where), _parse(e["col"], where),
                    e["printed"], e["computed"], e["evidence"],
                )
            )
        elif e["kind"] == "i1":
            out.append(Erratum("i1", e["polytope"], None, None, None, e["printed"], None, e["evidence"]))
        else:
            raise GoldenError(f"{where}: unknown kind {e['kind']!r}")
    return tuple(out)


def load_golden(path: str | None = None, errata_path: str | None = None) -> GoldenTables:
    """Load and validate the golden data.

    ``path`` defaults to $REFLECTOFOLD_GOLDEN, then the packaged copy.
    Validation: checksum, parseable labels, unit diagonal, entries in
    {0, 1, 2, 3, ...} and symmetry except at cells listed as errata.
    """
    doc, source = _read(path or os.environ.get(ENV_VAR), "golden.json")
    if doc.get("sha256") != checksum(doc):
        raise GoldenError(f"{source}: checksum mismatch")
    errata_doc, _ = _read(errata_path, "errata.json")
    errata = load_errata(errata_doc)
    asym_ok = {(e.where, e.type, e.row, e.col) for e in errata if e.kind == "cell"}

    i1 = {p: tuple(_parse(x, f"i1.{p}") for x in labels) for p, labels in doc["i1"].items()}
    tables = {}
    for tid, per_type in doc["tables"].items():
        for t, body in per_type.items():
            where = f"{tid}.{t}"
            rows = tuple(_parse(r, where) for r in body["rows"])
            if len(set(rows)) != len(rows):
                raise GoldenError(f"{where}: duplicate row labels")
            cells = tuple(tuple(r) for r in body["matrix"])
            n = len(rows)
            if len(cells) != n or any(len(r) != n for r in cells):
                raise GoldenError(f"{where}: matrix is not {n}x{n}")
            for i in range(n):
                if cells[i][i] != 1:
                    raise GoldenError(f"{where}: diagonal entry at {rows[i]} is {cells[i][i]}")
                for j in range(n):
                    x = cells[i][j]
                    if not isinstance(x, int) or x < 0 or (x == 1 and i != j):
                        raise GoldenError(f"{where}: bad entry {x!r} at ({rows[i]}, {rows[j]})")
                    if x != cells[j][i]:
                        key = (tid, int(t))
                        if key + (rows[i], rows[j]) not in asym_ok and key + (rows[j], rows[i]) not in asym_ok:
                            raise GoldenError(f"{where}: asymmetric at ({rows[i]}, {rows[j]})")
            tables[(tid, int(t))] = LabeledMatrix(rows, cells)
    schemes = {}
    for name, body in doc["schemes"].items():
        schemes[name] = {
            "table": body["table"],
            "classes": tuple(
                frozenset(_parse(x, f"schemes.{name}.classes") for x in c) for c in body["classes"]
            ),
            "corners": tuple(
                (frozenset((_parse(a, name), _parse(b, name))), int(k)) for a, b, k in body["corners"]
            ),
        }
    return GoldenTables(i1, tables, schemes, errata, doc["sha256"], source)
