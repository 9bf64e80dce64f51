"""Incremental bookkeeping of facets, adjacency graphs and link pictures.

A :class:`PolytopeState` carries the facet list (I1), the labelled adjacency
graphs of the two compact types (I2) and the link tessellation with the
compact labels drawn in each tile (I3).  :func:`double` updates all three
from the previous state alone; :func:`verify_against_oracle` recomputes I1
and I2 from scratch out of the tessellation and compares.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import cached_property

from .coxeter import DIAGRAM_D, AngleLabel, CoxeterMatrix, check_seed_conditions
from .labels import FacetLabel
from .linkgeom import (
    LabeledGraph,
    LinkTessellation,
    _edges,
    base_link,
    compact_adjacency,
    compact_facet_classes,
    dihedral_angle,
    face_picture,
    reflect_double,
    tessellation_json,
)
from .tables import LabeledMatrix

CANONICAL_SEQUENCE = ("5", "2", "4_5", "4", "1", "6", "6_5", "1_2")


class DoublingError(ValueError):
    pass


@dataclass(frozen=True)
class IncidenceList:
    owner: FacetLabel
    entries: frozenset  # (FacetLabel, AngleLabel)

    def angle_to(self, other) -> AngleLabel | None:
        for lab, ang in self.entries:
            if lab == other:
                return ang
        return None


@dataclass(frozen=True)
class PolytopeState:
    seed: CoxeterMatrix
    i1: tuple
    graphs: tuple  # ((type, LabeledGraph), ...)
    i3: LinkTessellation
    tile_labels: tuple  # ((tile word, (label per compact type)), ...)

    @property
    def history(self) -> tuple:
        return self.i3.history

    @property
    def n(self) -> int:
        return len(self.history)

    @cached_property
    def compact_types(self) -> tuple:
        return self.i3.compact_types

    def graph(self, t: int) -> LabeledGraph:
        return dict(self.graphs)[t]

    @property
    def i2_3(self) -> LabeledGraph:
        return self.graph(3)

    @property
    def i2_7(self) -> LabeledGraph:
        return self.graph(7)

    def is_compact(self, label: FacetLabel) -> bool:
        return label.type in self.compact_types

    @cached_property
    def labels_of_tile(self) -> dict:
        return {w: dict(zip(self.compact_types, labs)) for w, labs in self.tile_labels}

    @cached_property
    def _facet_edges(self) -> dict:
        link = self.i3
        out = {}
        for f in link.facets:
            es = set()
            for w, b in f.faces:
                es.update(_edges(link.tiles[link.tile_index[w]].faces[b]))
            out[f.label] = es
        return out

    def picture_labels(self, f: FacetLabel) -> set:
        """Compact labels drawn in the picture of the link facet ``f``."""
        facet = self.i3.facet(f)
        out = set()
        for w, _ in facet.faces:
            out.update(self.labels_of_tile[w].values())
        return out

    def meets(self, a: FacetLabel, f: FacetLabel) -> bool:
        """Whether facet ``a`` meets the non-compact facet ``f``, read off I3."""
        if self.is_compact(a):
            return a in self.picture_labels(f)
        return a != f and bool(self._facet_edges[a] & self._facet_edges[f])

    def key(self) -> str:
        return serialize_state(self)


def _graph(vertices, edges) -> LabeledGraph:
    return LabeledGraph(tuple(vertices), dict(edges), {e: 1 for e in edges})


def initial_state(m: CoxeterMatrix = DIAGRAM_D) -> PolytopeState:
    report = check_seed_conditions(m)
    if not report.passed:
        raise DoublingError(f"seed conditions fail: {report.to_text()}")
    link = base_link(m)
    i1 = tuple(FacetLabel(v) for v in m.nodes)
    compact = link.compact_types
    graphs = tuple((t, _graph([FacetLabel(t)], {})) for t in compact)
    tile_labels = (((), tuple(FacetLabel(t) for t in compact)),)
    return PolytopeState(m, i1, graphs, link, tile_labels)


def incidence_list(s: PolytopeState, a) -> IncidenceList:
    if isinstance(a, str):
        a = FacetLabel.parse(a)
    if a not in s.i1:
        raise KeyError(f"{a} is not a facet of P_{s.n}")
    m = s.seed
    entries = set()
    noncompact = [g for g in s.i1 if not s.is_compact(g)]
    if not s.is_compact(a):
        fa = s.i3.facet(a)
        for g in noncompact:
            if s.meets(g, a):
                q = dihedral_angle(fa.plane, s.i3.facet(g).plane)
                entries.add((g, AngleLabel.from_fraction(q)))
        for g in sorted(s.picture_labels(a), key=lambda x: x.sort_key):
            entries.add((g, m.label(g.type, a.type)))
    else:
        for g in noncompact:
            if s.meets(a, g):
                entries.add((g, m.label(a.type, g.type)))
        for g, lab in s.graph(a.type).neighbors(a).items():
            entries.add((g, lab))
        for labs in s.labels_of_tile.values():
            if labs[a.type] == a:
                for t, other in labs.items():
                    if t != a.type:
                        entries.add((other, m.label(a.type, t)))
    return IncidenceList(a, frozenset(entries))


def is_admissible_facet(s: PolytopeState, f: FacetLabel) -> bool:
    return all(lab.is_even_submultiple for _, lab in incidence_list(s, f).entries)


def double(s: PolytopeState, f) -> PolytopeState:
    if isinstance(f, str):
        f = FacetLabel.parse(f)
    if f not in s.i1:
        raise DoublingError(f"{f} is not a facet of P_{s.n}")
    if s.is_compact(f):
        raise DoublingError(f"{f} is compact; only non-compact facets can be doubled")
    if not is_admissible_facet(s, f):
        raise DoublingError(f"{f} is not admissible")
    m = s.seed

    duplicated = set()
    i1 = []
    for g in s.i1:
        if g == f:
            continue
        keep = s.meets(g, f) and (g.type == f.type or m.m(g.type, f.type) == 2)
        i1.append(g)
        if not keep:
            duplicated.add(g)
            i1.append(g.prepend(f))

    def r(x):
        return x.prepend(f) if x in duplicated else x

    graphs = []
    for t, g in s.graphs:
        edges = {}
        for e, lab in g.edges.items():
            a, b = sorted(e, key=lambda x: x.sort_key)
            edges[e] = lab
            if a in duplicated or b in duplicated:
                edges[frozenset((r(a), r(b)))] = lab
        mtf = m.m(t, f.type)
        for a in g.vertices:
            if a in duplicated and s.meets(a, f) and mtf != 2:
                if mtf % 2:
                    raise DoublingError(f"odd label {mtf} between types {t} and {f.type}")
                edges[frozenset((a, r(a)))] = AngleLabel.submultiple(mtf // 2)
        verts = [x for x in i1 if x.type == t]
        graphs.append((t, _graph(verts, edges)))

    link = reflect_double(s.i3, f)
    tile_labels = list(s.tile_labels)
    for w, labs in s.tile_labels:
        tile_labels.append(((f,) + w, tuple(r(x) for x in labs)))
    return PolytopeState(m, tuple(i1), tuple(graphs), link, tuple(tile_labels))


def canonical_sequence(m: CoxeterMatrix = DIAGRAM_D) -> list:
    if m != DIAGRAM_D:
        raise DoublingError("the canonical doubling sequence is defined for diagram D only")
    states = [initial_state(m)]
    for f in CANONICAL_SEQUENCE:
        states.append(double(states[-1], f))
    return states


def random_sequence(rng: random.Random, length: int, m: CoxeterMatrix = DIAGRAM_D) -> list:
    """Random admissible doubling sequence starting at P_0."""
    states = [initial_state(m)]
    for _ in range(length):
        s = states[-1]
        choices = [g for g in s.i1 if not s.is_compact(g) and is_admissible_facet(s, g)]
        states.append(double(s, rng.choice(choices)))
    return states


def adjacency_matrix(s: PolytopeState, t: int) -> LabeledMatrix:
    g = s.graph(t)
    rows = g.vertices
    cells = []
    for a in rows:
        nb = g.neighbors(a)
        cells.append(tuple(1 if a == b else (nb[b].k if b in nb else 0) for b in rows))
    return LabeledMatrix(tuple(rows), tuple(cells))


@dataclass(frozen=True)
class OracleReport:
    ok: bool
    divergence: str | None = None

    def __str__(self) -> str:
        return "success" if self.ok else f"divergence: {self.divergence}"


def verify_against_oracle(s: PolytopeState) -> OracleReport:
    link = s.i3
    classes = compact_facet_classes(link)
    oracle_i1 = {f.label for f in link.facets} | set(classes.members)
    mine = set(s.i1)
    if len(mine) != len(s.i1):
        return OracleReport(False, "duplicate labels in I1")
    for lab in sorted(mine - oracle_i1, key=lambda x: x.sort_key):
        return OracleReport(False, f"I1 lists {lab}, absent from the tessellation")
    for lab in sorted(oracle_i1 - mine, key=lambda x: x.sort_key):
        return OracleReport(False, f"tessellation has {lab}, missing from I1")
    for t, g in s.graphs:
        if set(g.vertices) != set(classes.labels(t)):
            return OracleReport(False, f"type-{t} graph vertices differ")
        oracle = compact_adjacency(link, t, classes)
        for e in sorted(set(g.edges) | set(oracle.edges), key=lambda e: sorted(x.sort_key for x in e)):
            mine_lab, their = g.edges.get(e), oracle.edges.get(e)
            if mine_lab != their:
                a, b = sorted(e, key=lambda x: x.sort_key)
                return OracleReport(
                    False, f"type-{t} edge ({a}, {b}): incremental {mine_lab}, oracle {their}"
                )
    for w, labs in s.labels_of_tile.items():
        for t, lab in labs.items():
            if classes.of(w, t) != lab:
                return OracleReport(False, f"tile {list(map(str, w))} type {t}: {lab} vs {classes.of(w, t)}")
    return OracleReport(True)


def serialize_state(s: PolytopeState) -> str:
    doc = {
        "i1": [str(x) for x in s.i1],
        "i2": {
            str(t): sorted(
                [sorted(str(x) for x in e) + [str(lab)] for e, lab in g.edges.items()]
            )
            for t, g in s.graphs
        },
        "i3": tessellation_json(s.i3),
    }
    return json.dumps(doc, sort_keys=True)


def state_picture(s: PolytopeState, f):
    """Face picture of ``f`` with the incremental (I3) labels."""
    labels = {w: tuple(labs) for w, labs in s.tile_labels}
    return face_picture(s.i3, f, labels)
