"""Gluing schemes on the doubled polytopes and the resulting reflectofolds.

A scheme pairs regions of the non-compact facets by isometries given as
words in facet reflections.  Compact facets crossing a glued wall either
continue (their angles sum to pi) and merge, or form a corner whose angle
is the sum of the two angles at the wall.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .coxeter import AngleLabel
from .doubling import PolytopeState
from .labels import FacetLabel, LabelSyntaxError, _Parser
from .linkgeom import Isometry3, compose, is_tessellation_symmetry, qstr
from .tables import LabeledMatrix
from .unionfind import UnionFind

PARTS = ("full", "upper", "lower")


class SchemeError(ValueError):
    """Malformed scheme input; the message names the offending location."""


# ------------------------------------------------------------------ words


@dataclass(frozen=True)
class Reflection:
    facet: FacetLabel

    def __str__(self) -> str:
        return f"r{self.facet}"


@dataclass(frozen=True)
class Translation:
    vector: tuple

    def __str__(self) -> str:
        return "t(" + ",".join(qstr(x) for x in self.vector) + ")"


def parse_word(items, where: str = "word") -> tuple:
    """Parse a list of word strings such as ``["r6", "(r1 r2)^2"]``.

    Letters are applied right to left, so ``["r1", "r6", "r5"]`` is
    r1 o r6 o r5.  ``t(a,b,c)`` denotes a translation.
    """
    if isinstance(items, str):
        items = [items]
    out = []
    for k, item in enumerate(items):
        try:
            letters, pos = _parse_seq(item, 0)
        except (LabelSyntaxError, ValueError) as exc:
            raise SchemeError(f"{where}[{k}]: {exc}") from None
        if pos != len(item):
            raise SchemeError(f"{where}[{k}]: unexpected {item[pos:]!r} at column {pos + 1}")
        out.extend(letters)
    return tuple(out)


def _skip(text, pos):
    while pos < len(text) and text[pos] in " \t∘*·":
        pos += 1
    return pos


def _parse_seq(text, pos):
    out = []
    pos = _skip(text, pos)
    while pos < len(text) and text[pos] != ")":
        ch = text[pos]
        if ch == "r":
            p = _Parser(text)
            p.pos = pos + 1
            out.append(Reflection(p.label()))
            pos = p.pos
        elif text.startswith("t(", pos):
            end = text.index(")", pos)
            vec = tuple(Fraction(x.strip()) for x in text[pos + 2:end].split(","))
            if len(vec) != 3:
                raise ValueError(f"translation needs 3 coordinates at column {pos + 1}")
            out.append(Translation(vec))
            pos = end + 1
        elif ch == "(":
            inner, pos = _parse_seq(text, pos + 1)
            if pos >= len(text) or text[pos] != ")":
                raise ValueError(f"missing ')' at column {pos + 1}")
            pos += 1
            power = 1
            if pos < len(text) and text[pos] == "^":
                start = pos = pos + 1
                while pos < len(text) and text[pos].isdigit():
                    pos += 1
                if start == pos:
                    raise ValueError(f"expected exponent at column {pos + 1}")
                power = int(text[start:pos])
            out.extend(inner * power)
        else:
            raise ValueError(f"unexpected {ch!r} at column {pos + 1}")
        pos = _skip(text, pos)
    return out, pos


def word_str(word) -> str:
    return "∘".join(str(x) for x in word) if word else "id"


def word_isometry(s: PolytopeState, word) -> Isometry3:
    maps = []
    for letter in word:
        if isinstance(letter, Translation):
            maps.append(Isometry3.translation_by(letter.vector))
        else:
            plane = s.i3.plane_of.get(letter.facet)
            if plane is None:
                raise SchemeError(f"no facet plane named {letter.facet}")
            maps.append(plane.reflection())
    return compose(*maps)


def inverse_word(word) -> tuple:
    out = []
    for letter in reversed(word):
        if isinstance(letter, Translation):
            out.append(Translation(tuple(-x for x in letter.vector)))
        else:
            out.append(letter)
    return tuple(out)


# ---------------------------------------------------------------- schemes


@dataclass(frozen=True)
class FaceRegion:
    facet: FacetLabel
    part: str = "full"

    def __post_init__(self):
        if self.part not in PARTS:
            raise SchemeError(f"region must be one of {PARTS}, got {self.part!r}")

    def __str__(self) -> str:
        return str(self.facet) + {"full": "", "upper": "^U", "lower": "^D"}[self.part]


@dataclass(frozen=True)
class Pairing:
    source: FaceRegion
    target: FaceRegion
    word: tuple

    def inverted(self) -> "Pairing":
        return Pairing(self.target, self.source, inverse_word(self.word))

    def __str__(self) -> str:
        return f"{self.source} -> {self.target} by {word_str(self.word)}"


@dataclass(frozen=True)
class GluingScheme:
    name: str
    base: str  # "P0" ... "P8"
    pairings: tuple

    @property
    def base_index(self) -> int:
        return int(self.base[1:])

    def inverted(self) -> "GluingScheme":
        return GluingScheme(self.name, self.base, tuple(p.inverted() for p in self.pairings))

    def to_json(self) -> dict:
        def region(r):
            return {"facet": str(r.facet), "region": r.part}

        return {
            "name": self.name,
            "base": self.base,
            "pairings": [
                {"source": region(p.source), "target": region(p.target), "word": [str(x) for x in p.word]}
                for p in self.pairings
            ],
        }


def _reg(facet, part="full"):
    return FaceRegion(FacetLabel.parse(facet), part)


def _w(*names):
    return tuple(Reflection(FacetLabel.parse(n)) for n in names)


def builtin_gluings() -> dict:
    common = (
        Pairing(_reg("6_{4_5}"), _reg("6_{6,4_5}"), _w("6")),
        Pairing(_reg("6_{4,5}"), _reg("6_{6_5,4,5}"), _w("6_5")),
    )
    half_twist = _w("6", "1", "2", "1", "2")
    return {
        "R_T": GluingScheme("R_T", "P7", common + (Pairing(_reg("1_2"), _reg("1_{1,2}"), _w("1")),)),
        "R_half": GluingScheme(
            "R_half", "P7", common + (Pairing(_reg("1_2"), _reg("1_{1,2}"), _w("1", "6", "6_5")),)
        ),
        "R_quarter": GluingScheme(
            "R_quarter", "P7", common + (Pairing(_reg("1_2"), _reg("1_{1,2}"), _w("1", "6", "5")),)
        ),
        "R_HW": GluingScheme(
            "R_HW",
            "P8",
            (
                Pairing(_reg("1_{1,2}"), _reg("1_{1_2,1,2}"), _w("1_2")),
                Pairing(_reg("6_{4_5}"), _reg("6_{6,4_5}"), _w("1_2", "6_5", "6")),
                Pairing(_reg("6_{4,5}", "upper"), _reg("6_{4,5}", "lower"), half_twist),
                Pairing(_reg("6_{6_5,4,5}", "upper"), _reg("6_{6_5,4,5}", "lower"), half_twist),
            ),
        ),
    }


def parse_scheme(doc, name: str = "scheme") -> GluingScheme:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemeError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SchemeError("scheme must be a JSON object")
    base = doc.get("base")
    if not isinstance(base, str) or len(base) != 2 or base[0] != "P" or not base[1].isdigit():
        raise SchemeError(f"base: expected 'P0'..'P8', got {base!r}")
    pairings = []
    raw = doc.get("pairings")
    if not isinstance(raw, list):
        raise SchemeError("pairings: expected a list")
    for k, p in enumerate(raw):
        where = f"pairings[{k}]"
        try:
            regions = []
            for side in ("source", "target"):
                r = p[side]
                try:
                    label = FacetLabel.parse(r["facet"])
                except LabelSyntaxError as exc:
                    raise SchemeError(f"{where}.{side}.facet: {exc}") from None
                regions.append(FaceRegion(label, r.get("region", "full")))
            word = parse_word(p["word"], f"{where}.word")
        except (KeyError, TypeError) as exc:
            raise SchemeError(f"{where}: missing or malformed field {exc}") from None
        pairings.append(Pairing(regions[0], regions[1], word))
    return GluingScheme(doc.get("name", name), base, tuple(pairings))


# ------------------------------------------------------------- validation


def _intrinsic_axes(plane):
    k = [i for i, x in enumerate(plane.normal) if x]
    if len(k) != 1:
        return None
    return tuple(i for i in range(3) if i != k[0])


@dataclass(frozen=True)
class Region:
    facet: FacetLabel
    part: str
    corners: frozenset  # 3D points
    faces: tuple  # (tile index, type, vertex key)


def region_of(s: PolytopeState, r: FaceRegion) -> Region:
    link = s.i3
    facet = link.facet(r.facet)
    axes = _intrinsic_axes(facet.plane)
    if axes is None:
        raise SchemeError(f"facet {r.facet} is not axis-aligned; only rectangles can be glued")
    pts = {v for w, b in facet.faces for v in link.tiles[link.tile_index[w]].faces[b]}
    u, v = axes
    u0, u1 = min(p[u] for p in pts), max(p[u] for p in pts)
    v0, v1 = min(p[v] for p in pts), max(p[v] for p in pts)
    mid = (v0 + v1) / 2
    if r.part == "upper":
        v0 = mid
    elif r.part == "lower":
        v1 = mid
    inside = [p for p in pts if u0 <= p[u] <= u1 and v0 <= p[v] <= v1]
    corners = frozenset(
        p for p in inside if p[u] in (u0, u1) and p[v] in (v0, v1)
    )
    if len(corners) != 4:
        raise SchemeError(f"region {r} is not a rectangle of tile vertices")
    faces = []
    for w, b in facet.faces:
        i = link.tile_index[w]
        poly = link.tiles[i].faces[b]
        if all(u0 <= p[u] <= u1 and v0 <= p[v] <= v1 for p in poly):
            faces.append((i, b, frozenset(poly)))
    return Region(r.facet, r.part, corners, tuple(faces))


@dataclass
class PairingCheck:
    pairing: Pairing
    region_ok: bool = True
    symmetry_ok: bool = True
    pattern_ok: bool = True
    matches: list = field(default_factory=list)  # ((tile, type), (tile, type))
    messages: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.region_ok and self.symmetry_ok and self.pattern_ok


@dataclass
class GluingReport:
    scheme: GluingScheme
    checks: list
    coverage_ok: bool
    messages: list

    @property
    def geometry_ok(self) -> bool:
        """Every pairing maps its source region onto its target; coverage may be partial."""
        return all(c.region_ok for c in self.checks)

    @property
    def valid(self) -> bool:
        return self.coverage_ok and all(c.ok for c in self.checks)

    def violations(self) -> list:
        out = list(self.messages)
        for c in self.checks:
            out.extend(f"{c.pairing}: {m}" for m in c.messages)
        return out

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "geometry_ok": self.geometry_ok,
            "coverage_ok": self.coverage_ok,
            "pairings": [
                {
                    "pairing": str(c.pairing),
                    "region_ok": c.region_ok,
                    "symmetry_ok": c.symmetry_ok,
                    "pattern_ok": c.pattern_ok,
                }
                for c in self.checks
            ],
            "violations": self.violations(),
        }


def validate_gluing(s: PolytopeState, g: GluingScheme) -> GluingReport:
    if g.base_index != s.n:
        raise SchemeError(f"scheme targets {g.base} but the state is P{s.n}")
    mode = "ambient" if s.n >= 8 else "box"
    checks = []
    for p in g.pairings:
        c = PairingCheck(p)
        checks.append(c)
        try:
            src, tgt = region_of(s, p.source), region_of(s, p.target)
            phi = word_isometry(s, p.word)
        except (SchemeError, KeyError) as exc:
            c.region_ok = False
            c.messages.append(str(exc))
            continue
        if {phi(x) for x in src.corners} != set(tgt.corners):
            c.region_ok = False
            c.messages.append("isometry does not map the source region onto the target region")
        else:
            by_key = {key: (i, b) for i, b, key in tgt.faces}
            for i, b, key in src.faces:
                image = frozenset(phi(x) for x in key)
                if image not in by_key:
                    c.region_ok = False
                    c.messages.append("source tile face has no matching target tile face")
                    break
                c.matches.append(((i, b), by_key[image]))
                if by_key[image][1] != b:
                    c.pattern_ok = False
            if not c.pattern_ok:
                c.messages.append("face map does not preserve tile face types")
        if not is_tessellation_symmetry(s.i3, phi, mode):
            c.symmetry_ok = False
            c.messages.append(f"isometry is not a symmetry of the tessellation ({mode} mode)")
    # coverage of the non-compact facets
    messages = []
    covered: dict = {}
    for p in g.pairings:
        for r in (p.source, p.target):
            covered.setdefault(r.facet, []).append(r.part)
    coverage_ok = True
    for f in s.i3.facets:
        parts = sorted(covered.pop(f.label, []))
        if parts not in (["full"], ["lower", "upper"]):
            coverage_ok = False
            messages.append(f"facet {f.label} covered as {parts or 'nothing'}")
    for lab in covered:
        coverage_ok = False
        messages.append(f"{lab} is not a non-compact facet of P{s.n}")
    return GluingReport(g, checks, coverage_ok, messages)


# ---------------------------------------------------------- reflectofolds


@dataclass(frozen=True)
class Corner:
    type: int
    a: FacetLabel
    b: FacetLabel
    label: AngleLabel | None  # None when the angle exceeds pi
    angle: Fraction

    @property
    def pair(self) -> frozenset:
        return frozenset((self.a, self.b))


@dataclass(frozen=True)
class Violation:
    kind: str  # EF | AC | angle
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


@dataclass
class ReflectofoldState:
    state: PolytopeState
    scheme: GluingScheme
    validation: GluingReport
    class_of: dict  # compact facet of P -> facet of R
    classes: dict  # type -> tuple of member tuples (ordered by class name)
    corners: tuple  # glued corners, deduplicated, in class names
    g3t: tuple  # multigraph edges (u, v, AngleLabel | None, angle)
    g7t: tuple
    angle_violations: tuple

    def graph(self, t: int) -> tuple:
        return self.g3t if t == 3 else self.g7t

    def facets(self, t: int) -> list:
        return [min(m, key=lambda x: x.sort_key) for m in self.classes[t]]

    def partition(self, t: int = 3) -> set:
        return {frozenset(m) for m in self.classes[t]}


def facet_classes(s: PolytopeState, g: GluingScheme) -> ReflectofoldState:
    report = validate_gluing(s, g)
    if not report.geometry_ok:
        raise SchemeError("pairing geometry invalid: " + "; ".join(report.violations()))
    m = s.seed
    labels = {s.i3.tile_index[w]: dict(zip(s.compact_types, labs)) for w, labs in s.tile_labels}
    compact = [x for x in s.i1 if s.is_compact(x)]
    uf = UnionFind(compact)
    raw = []
    for c in report.checks:
        for (i, a), (j, b) in c.matches:
            for t in s.compact_types:
                angle = Fraction(1, m.m(t, a)) + Fraction(1, m.m(t, b))
                lu, lv = labels[i][t], labels[j][t]
                if angle == 1:
                    uf.union(lu, lv)
                else:
                    raw.append((t, lu, lv, angle))
    order = {x: k for k, x in enumerate(s.i1)}
    groups = {}
    for grp in uf.groups():
        name = min(grp, key=lambda x: x.sort_key)
        groups[name] = tuple(sorted(grp, key=lambda x: order[x]))
    class_of = {x: name for name, grp in groups.items() for x in grp}
    classes = {
        t: tuple(groups[n] for n in sorted((n for n in groups if n.type == t), key=lambda x: order[x]))
        for t in s.compact_types
    }
    corners, seen, violations = [], set(), []
    for t, lu, lv, angle in raw:
        a, b = sorted((class_of[lu], class_of[lv]), key=lambda x: x.sort_key)
        label = AngleLabel.from_fraction(angle) if angle < 1 else None
        key = (t, a, b, angle)
        if key in seen:
            continue
        seen.add(key)
        corners.append(Corner(t, a, b, label, angle))
        if label is None or label.kind != "submultiple":
            violations.append(
                Violation("angle", f"corner {a} ∩ {b} has angle {qstr(angle)}π, not π/k")
            )
    graphs = {}
    for t in s.compact_types:
        edges = []
        for e, lab in s.graph(t).edges.items():
            u, v = sorted((class_of[x] for x in e), key=lambda x: x.sort_key)
            edges.append((u, v, lab, lab.fraction()))
        for c in corners:
            if c.type == t:
                edges.append((c.a, c.b, c.label, c.angle))
        graphs[t] = tuple(edges)
    return ReflectofoldState(
        s, g, report, class_of, classes, tuple(corners), graphs.get(3, ()), graphs.get(7, ()), tuple(violations)
    )


def corner_graphs(s: PolytopeState, g: GluingScheme) -> tuple:
    rs = facet_classes(s, g)
    return rs.g3t, rs.g7t


@dataclass(frozen=True)
class DevelopabilityReport:
    developable: bool
    violations: tuple

    def to_json(self) -> dict:
        return {"developable": self.developable, "violations": [str(v) for v in self.violations]}


def check_developability(rs: ReflectofoldState) -> DevelopabilityReport:
    out = list(rs.angle_violations)
    for t in (3, 7):
        labels: dict = {}
        for u, v, lab, angle in rs.graph(t):
            if u == v:
                out.append(Violation("EF", f"type-{t} facet {u} has a corner with itself (angle {qstr(angle)}π)"))
            else:
                labels.setdefault(frozenset((u, v)), set()).add(angle)
        for pair, angles in labels.items():
            if len(angles) > 1:
                names = " and ".join(sorted(map(str, pair)))
                out.append(Violation("AC", f"corners between {names} have angles {sorted(map(qstr, angles))}"))
    m = rs.state.seed
    types = rs.state.compact_types
    for x in types:
        for y in types:
            if x < y:
                lab = m.label(x, y)
                if lab != AngleLabel.submultiple(2):
                    out.append(Violation("AC", f"type-({x},{y}) corners have angle {lab}, not π/2"))
    return DevelopabilityReport(not out, tuple(out))


def _cell(edges):
    angles = sorted({a for _, _, _, a in edges})
    if len(angles) == 1 and angles[0].numerator == 1 and angles[0].denominator >= 2:
        return angles[0].denominator
    return "_" + "|".join(qstr(a) for a in angles) + "_"


def adjacency_matrix_R(rs: ReflectofoldState, t: int) -> LabeledMatrix:
    rows = rs.facets(t)
    by_pair: dict = {}
    for e in rs.graph(t):
        by_pair.setdefault(frozenset((e[0], e[1])), []).append(e)
    cells = []
    for a in rows:
        row = []
        for b in rows:
            if a == b:
                row.append(1)
            else:
                es = by_pair.get(frozenset((a, b)))
                row.append(_cell(es) if es else 0)
        cells.append(tuple(row))
    return LabeledMatrix(tuple(rows), tuple(cells))


@dataclass(frozen=True)
class CoxeterPresentation:
    generators: tuple
    relators: tuple  # (f, g, k) meaning (fg)^k; f == g, k == 1 encodes f^2

    def __str__(self) -> str:
        gens = ", ".join(map(str, self.generators))
        rels = []
        for f, g, k in self.relators:
            rels.append(f"({f})^2" if f == g else f"({f} {g})^{k}")
        return f"< {gens} | {', '.join(rels)} >"

    def to_json(self) -> dict:
        return {
            "generators": [str(x) for x in self.generators],
            "relators": [[str(f), str(g), 2 if f == g else k] for f, g, k in self.relators],
        }


def coxeter_presentation(rs: ReflectofoldState) -> CoxeterPresentation:
    dev = check_developability(rs)
    if not dev.developable:
        raise SchemeError("the reflectofold is not developable; G_R is undefined")
    gens = []
    for t in rs.state.compact_types:
        gens.extend(rs.facets(t))
    rels = [(f, f, 1) for f in gens]
    pairs: dict = {}
    for t in rs.state.compact_types:
        for u, v, lab, _ in rs.graph(t):
            pairs[frozenset((u, v))] = lab.k
    types = rs.state.compact_types
    for _, labs in rs.state.tile_labels:
        named = [rs.class_of[x] for x in labs]
        for x in range(len(types)):
            for y in range(x + 1, len(types)):
                k = rs.state.seed.m(types[x], types[y])
                pairs[frozenset((named[x], named[y]))] = k
    gen_order = {g: k for k, g in enumerate(gens)}
    for pair, k in sorted(pairs.items(), key=lambda kv: sorted(gen_order[x] for x in kv[0])):
        f, g = sorted(pair, key=lambda x: gen_order[x])
        rels.append((f, g, k))
    return CoxeterPresentation(tuple(gens), tuple(rels))
