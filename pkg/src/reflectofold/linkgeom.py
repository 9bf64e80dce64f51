"""Exact model of the horospherical link: a region tiled by labelled prisms.

Every tile is the image of the base prism under an isometry built from
reflections in facet planes.  All coordinates are ``Fraction``.  The
brute-force routines here (fan walks, compact classes, face pictures) serve
as the independent oracle for the incremental bookkeeping in ``doubling``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd

from .coxeter import DIAGRAM_D, AngleLabel, CoxeterMatrix
from .labels import FacetLabel
from .unionfind import UnionFind

F0, F1 = Fraction(0), Fraction(1)


class TessellationError(RuntimeError):
    """Raised when the tessellation violates a structural invariant."""


# ------------------------------------------------------------ linear algebra


def _vec(*xs):
    return tuple(Fraction(x) for x in xs)


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def mat_mul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)) for i in range(3)
    )


def mat_vec(a, v):
    return tuple(dot(row, v) for row in a)


def transpose(a):
    return tuple(tuple(a[j][i] for j in range(3)) for i in range(3))


def det3(a):
    return (
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    )


IDENTITY = tuple(tuple(F1 if i == j else F0 for j in range(3)) for i in range(3))


def qstr(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Isometry3:
    linear: tuple
    translation: tuple

    def __post_init__(self):
        object.__setattr__(self, "linear", tuple(tuple(Fraction(x) for x in r) for r in self.linear))
        object.__setattr__(self, "translation", tuple(Fraction(x) for x in self.translation))

    @classmethod
    def identity(cls) -> "Isometry3":
        return cls(IDENTITY, (0, 0, 0))

    @classmethod
    def translation_by(cls, v) -> "Isometry3":
        return cls(IDENTITY, v)

    def __call__(self, p):
        a, t = self.linear, self.translation
        return (dot(a[0], p) + t[0], dot(a[1], p) + t[1], dot(a[2], p) + t[2])

    def __matmul__(self, other: "Isometry3") -> "Isometry3":
        """Composition ``self o other`` (other applied first)."""
        return Isometry3(
            mat_mul(self.linear, other.linear),
            tuple(x + y for x, y in zip(mat_vec(self.linear, other.translation), self.translation)),
        )

    def inverse(self) -> "Isometry3":
        at = transpose(self.linear)
        return Isometry3(at, tuple(-x for x in mat_vec(at, self.translation)))

    @property
    def det(self) -> Fraction:
        return det3(self.linear)

    def is_orthogonal(self) -> bool:
        return mat_mul(transpose(self.linear), self.linear) == IDENTITY

    def to_json(self) -> dict:
        return {
            "matrix": [[qstr(x) for x in row] for row in self.linear],
            "translation": [qstr(x) for x in self.translation],
        }

    def __str__(self) -> str:
        rows = "; ".join(" ".join(qstr(x) for x in r) for r in self.linear)
        return f"[{rows}] + ({', '.join(qstr(x) for x in self.translation)})"


def compose(*maps: Isometry3) -> Isometry3:
    """Left-to-right composition: ``compose(f, g, h) = f o g o h``."""
    out = Isometry3.identity()
    for g in maps:
        out = out @ g
    return out


@dataclass(frozen=True)
class Plane:
    """The half-space ``normal . x <= offset``; the normal points outward."""

    normal: tuple
    offset: Fraction

    @classmethod
    def make(cls, normal, offset) -> "Plane":
        normal = tuple(Fraction(x) for x in normal)
        den = 1
        for x in normal:
            den = den * x.denominator // gcd(den, x.denominator)
        ints = [int(x * den) for x in normal]
        g = 0
        for x in ints:
            g = gcd(g, abs(x))
        if g == 0:
            raise ValueError("zero normal")
        scale = Fraction(den, g)
        return cls(tuple(x // g for x in ints), Fraction(offset) * scale)

    def value(self, p) -> Fraction:
        return dot(self.normal, p) - self.offset

    def contains(self, p) -> bool:
        return self.value(p) == 0

    @property
    def key(self) -> tuple:
        """Orientation-free identity of the plane."""
        n, c = self.normal, self.offset
        first = next(x for x in n if x != 0)
        if first < 0:
            n, c = tuple(-x for x in n), -c
        return (n, c)

    def same_plane(self, other: "Plane") -> bool:
        return self.key == other.key

    def point(self):
        n = tuple(Fraction(x) for x in self.normal)
        s = self.offset / dot(n, n)
        return tuple(s * x for x in n)

    def reflection(self) -> Isometry3:
        n = tuple(Fraction(x) for x in self.normal)
        nn = dot(n, n)
        lin = tuple(
            tuple((F1 if i == j else F0) - 2 * n[i] * n[j] / nn for j in range(3)) for i in range(3)
        )
        return Isometry3(lin, tuple(2 * self.offset / nn * x for x in n))

    def image(self, g: Isometry3) -> "Plane":
        n = mat_vec(g.linear, tuple(Fraction(x) for x in self.normal))
        return Plane.make(n, dot(n, g(self.point())))

    def __str__(self) -> str:
        terms = "".join(f"{'+' if x >= 0 else '-'}{abs(x)}{v}" for x, v in zip(self.normal, "xyz") if x)
        return f"{terms.lstrip('+')} <= {qstr(self.offset)}"


def dihedral_angle(p: Plane, q: Plane) -> Fraction | None:
    """Interior angle (as a multiple of pi) between two outward-oriented planes.

    Only the angles pi/2, pi/4, 3pi/4, pi/3, 2pi/3, pi/6, 5pi/6 and 0/pi are
    recognised, which is all that occurs in this model; otherwise ``None``.
    """
    c = dot(p.normal, q.normal)
    nn = dot(p.normal, p.normal) * dot(q.normal, q.normal)
    cos2 = Fraction(c * c, nn)
    # interior angle theta satisfies cos(theta) = -c / |p||q|
    table = {Fraction(0): (Fraction(1, 2), Fraction(1, 2)), Fraction(1, 2): (Fraction(1, 4), Fraction(3, 4)),
             Fraction(3, 4): (Fraction(1, 6), Fraction(5, 6)), Fraction(1, 4): (Fraction(1, 3), Fraction(2, 3)),
             Fraction(1): (F0, F1)}
    if cos2 not in table:
        return None
    acute, obtuse = table[cos2]
    return acute if c <= 0 else obtuse


# -------------------------------------------------------------- base prism

_A, _B, _C = _vec(0, 0, 0), _vec(1, 0, 0), _vec(0, 1, 0)
_A2, _B2, _C2 = _vec(0, 0, 1), _vec(1, 0, 1), _vec(0, 1, 1)

BASE_VERTICES = (_A, _B, _C, _A2, _B2, _C2)
BASE_FACES = {
    1: (_A, _B, _C),
    2: (_A2, _B2, _C2),
    4: (_A, _B, _B2, _A2),
    5: (_B, _C, _C2, _B2),
    6: (_A, _C, _C2, _A2),
}
BASE_PLANES = {
    1: Plane.make((0, 0, -1), 0),
    2: Plane.make((0, 0, 1), 1),
    4: Plane.make((0, -1, 0), 0),
    5: Plane.make((1, 1, 0), 1),
    6: Plane.make((-1, 0, 0), 0),
}
FACE_TYPES = tuple(BASE_FACES)


@dataclass(frozen=True)
class PrismTile:
    word: tuple  # FacetLabels, latest doubling first
    placement: Isometry3

    @cached_property
    def vertices(self) -> tuple:
        return tuple(self.placement(v) for v in BASE_VERTICES)

    @cached_property
    def faces(self) -> dict:
        return {b: tuple(self.placement(v) for v in poly) for b, poly in BASE_FACES.items()}

    @cached_property
    def face_keys(self) -> dict:
        return {b: frozenset(poly) for b, poly in self.faces.items()}

    @cached_property
    def face_map(self) -> dict:
        return {b: BASE_PLANES[b].image(self.placement) for b in FACE_TYPES}

    @property
    def word_str(self) -> str:
        return "[" + ",".join(str(w) for w in self.word) + "]"


@dataclass(frozen=True)
class NonCompactFacet:
    label: FacetLabel
    plane: Plane
    faces: tuple  # (tile word, base face type)


def _edges(poly):
    return [frozenset((poly[i], poly[(i + 1) % len(poly)])) for i in range(len(poly))]


@dataclass(frozen=True)
class LinkTessellation:
    tiles: tuple
    facets: tuple
    history: tuple = ()
    registry: tuple = ()  # (label, plane) for every link facet that ever existed
    seed: CoxeterMatrix = DIAGRAM_D

    # ---- lookups

    @cached_property
    def compact_types(self) -> tuple:
        comp = self.seed.compact
        return tuple(v for v in self.seed.nodes if comp[v])

    @cached_property
    def tile_index(self) -> dict:
        return {t.word: i for i, t in enumerate(self.tiles)}

    @cached_property
    def facet_by_label(self) -> dict:
        return {f.label: f for f in self.facets}

    @cached_property
    def plane_of(self) -> dict:
        return dict(self.registry)

    @cached_property
    def _face_owners(self) -> dict:
        owners: dict = {}
        for i, t in enumerate(self.tiles):
            for b, key in t.face_keys.items():
                owners.setdefault(key, []).append((i, b))
        return owners

    @cached_property
    def neighbors(self) -> dict:
        """``(tile, face type) -> neighbouring tile`` or ``None`` on the boundary."""
        out = {}
        for key, owners in self._face_owners.items():
            if len(owners) > 2:
                raise TessellationError(f"face shared by {len(owners)} tiles")
            if len(owners) == 2:
                (i, a), (j, b) = owners
                if a != b:
                    raise TessellationError(f"wall types disagree: {a} vs {b}")
                out[(i, a)], out[(j, b)] = j, i
            else:
                out[owners[0]] = None
        return out

    @cached_property
    def facet_of_face(self) -> dict:
        out = {}
        for f in self.facets:
            for word, b in f.faces:
                key = (self.tile_index[word], b)
                if key in out:
                    raise TessellationError(f"tile face in two facets: {f.label}, {out[key]}")
                out[key] = f.label
        return out

    @cached_property
    def vertex_set(self) -> frozenset:
        return frozenset(v for t in self.tiles for v in t.vertices)

    @cached_property
    def vertex_list(self) -> tuple:
        return tuple(sorted(self.vertex_set))

    @cached_property
    def tile_face_ids(self) -> tuple:
        """Per tile: ((face, vertex indices), ...) and the tile's vertex indices."""
        index = {v: k for k, v in enumerate(self.vertex_list)}
        return tuple(
            (
                tuple((b, tuple(index[v] for v in poly)) for b, poly in t.faces.items()),
                tuple(index[v] for v in t.vertices),
            )
            for t in self.tiles
        )

    @cached_property
    def doubled_vertices(self) -> tuple | None:
        """Vertices scaled by 2 as integer triples, or None if some coordinate is not a half-integer."""
        out = []
        for v in self.vertex_list:
            w = tuple(2 * x for x in v)
            if any(Fraction(x).denominator != 1 for x in w):
                return None
            out.append(tuple(int(x) for x in w))
        return tuple(out)

    @cached_property
    def tile_signatures(self) -> frozenset:
        return frozenset(
            _tile_signature({b: tuple(_norm(v) for v in poly) for b, poly in t.faces.items()})
            for t in self.tiles
        )

    @cached_property
    def bounds(self) -> tuple:
        vs = self.vertex_set
        return tuple((min(v[i] for v in vs), max(v[i] for v in vs)) for i in range(3))

    @cached_property
    def box(self):
        """The three coordinate intervals if the region is a box, else ``None``."""
        if len(self.facets) != 6:
            return None
        for f in self.facets:
            if sum(1 for x in f.plane.normal if x) != 1:
                return None
        return self.bounds

    def facet(self, label) -> NonCompactFacet:
        if isinstance(label, str):
            label = FacetLabel.parse(label)
        try:
            return self.facet_by_label[label]
        except KeyError:
            raise KeyError(f"{label} is not a facet of the link") from None

    def m(self, a: int, b: int):
        return self.seed.m(a, b)

    # ---- invariants

    def check(self) -> None:
        if len(self.tiles) != 2 ** len(self.history):
            raise TessellationError("tile count is not 2^n")
        nbr = self.neighbors
        boundary = {k for k, v in nbr.items() if v is None}
        if set(self.facet_of_face) != boundary:
            raise TessellationError("boundary faces and facet faces differ")
        for f in self.facets:
            for word, b in f.faces:
                if b != f.label.type:
                    raise TessellationError(f"face of type {b} in facet {f.label}")
                t = self.tiles[self.tile_index[word]]
                if not all(f.plane.contains(v) for v in t.faces[b]):
                    raise TessellationError(f"face off the plane of {f.label}")
        for f in self.facets:
            if any(f.plane.value(v) > 0 for v in self.vertex_set):
                raise TessellationError(f"{f.label} is not a supporting plane")
        for t in self.tiles:
            if not t.placement.is_orthogonal():
                raise TessellationError(f"non-orthogonal placement for {t.word_str}")
            if t.placement != self.word_isometry(t.word):
                raise TessellationError(f"placement of {t.word_str} disagrees with its word")

    def word_isometry(self, word) -> Isometry3:
        return compose(*(self.plane_of[w].reflection() for w in word))

    def max_denominator(self) -> int:
        return max(x.denominator for v in self.vertex_set for x in v)

    # ---- fan walks

    def _walk(self, start, first, a, b):
        cur, cross, seq = start, first, []
        for _ in range(4 * len(self.tiles) + 4):
            nxt = self.neighbors.get((cur, cross))
            if nxt is None:
                return seq, (cur, cross)
            if nxt == start:
                return None
            seq.append(nxt)
            cur, cross = nxt, (a if cross == b else b)
        raise TessellationError("fan walk did not terminate")

    def fan(self, tile: int, a: int, b: int):
        """Tiles around the ridge of types ``a``/``b`` of ``tile``.

        Returns ``(tiles, end1, end2)`` where the ends are the free
        ``(tile, type)`` faces, or ``None`` for a ridge interior to the region.
        """
        back = self._walk(tile, a, a, b)
        fwd = self._walk(tile, b, a, b)
        if back is None or fwd is None:
            return None
        return back[0][::-1] + [tile] + fwd[0], back[1], fwd[1]

    @cached_property
    def ridges(self) -> tuple:
        """All ridges between boundary faces as ``(end1, end2, angle)``.

        ``angle`` is the total dihedral angle (multiple of pi), i.e. the number
        of fan tiles times the base angle pi/m_ab.
        """
        comp = set(self.compact_types)
        types = list(self.compact_types) + list(FACE_TYPES)
        seen, out = set(), []
        for i in range(len(self.tiles)):
            for x, a in enumerate(types):
                for b in types[x + 1:]:
                    if a in comp and b in comp:
                        continue
                    m = self.m(a, b)
                    if m == float("inf"):
                        continue
                    res = self.fan(i, a, b)
                    if res is None:
                        continue
                    tiles, e1, e2 = res
                    key = (frozenset((e1, e2)), a, b)
                    if key in seen:
                        continue
                    seen.add(key)
                    out.append((e1, e2, Fraction(len(tiles), m)))
        return tuple(out)

    # ---- named objects behind ridge ends

    def end_name(self, end, classes: "CompactClasses"):
        tile, typ = end
        if typ in self.compact_types:
            return classes.of(self.tiles[tile].word, typ)
        return self.facet_of_face[end]

    def facet_meetings(self, classes: "CompactClasses | None" = None) -> dict:
        """``{frozenset({A, B}): angle}`` for every pair of meeting facets.

        Facets merged across a mirror continue smoothly (angle pi) and are not
        reported.  Distinct angles between one pair raise.
        """
        classes = classes or compact_facet_classes(self)
        out: dict = {}
        for e1, e2, angle in self.ridges:
            if angle == 1:
                continue
            if angle > 1:
                raise TessellationError(f"reflex ridge angle {angle}")
            n1, n2 = self.end_name(e1, classes), self.end_name(e2, classes)
            if n1 == n2:
                raise TessellationError(f"facet {n1} meets itself")
            key = frozenset((n1, n2))
            if out.setdefault(key, angle) != angle:
                raise TessellationError(f"distinct angles between {n1} and {n2}")
        return out


def base_link(seed: CoxeterMatrix = DIAGRAM_D) -> LinkTessellation:
    comp = seed.compact
    if {v for v in seed.nodes if not comp[v]} != set(FACE_TYPES):
        raise ValueError("seed's ideal vertex is not the modelled prism link")
    for a in FACE_TYPES:
        for b in FACE_TYPES:
            if a < b:
                lab = seed.label(a, b)
                ang = dihedral_angle(BASE_PLANES[a], BASE_PLANES[b])
                if lab.kind == "parallel":
                    if ang not in (0, 1):
                        raise ValueError(f"faces {a},{b} should be parallel")
                elif ang != lab.fraction():
                    raise ValueError(f"faces {a},{b} meet at {ang}, seed says {lab}")
    tile = PrismTile((), Isometry3.identity())
    facets = tuple(NonCompactFacet(FacetLabel(b), BASE_PLANES[b], (((), b),)) for b in FACE_TYPES)
    registry = tuple((FacetLabel(b), BASE_PLANES[b]) for b in FACE_TYPES)
    return LinkTessellation((tile,), facets, (), registry, seed)


def reflect_double(link: LinkTessellation, f) -> LinkTessellation:
    if isinstance(f, str):
        f = FacetLabel.parse(f)
    if f not in link.facet_by_label:
        raise ValueError(f"{f} is not a facet of the link")
    mirror = link.facet_by_label[f].plane
    if any(mirror.value(v) > 0 for v in link.vertex_set):
        raise ValueError(f"plane of {f} does not support the region")
    own = {(link.tile_index[w], b) for w, b in link.facet_by_label[f].faces}
    for i, t in enumerate(link.tiles):
        for b in FACE_TYPES:
            if (i, b) not in own and all(mirror.contains(v) for v in t.faces[b]):
                raise ValueError(f"plane of {f} is not a full face of the region")
    rho = mirror.reflection()
    tiles = link.tiles + tuple(PrismTile((f,) + t.word, rho @ t.placement) for t in link.tiles)
    facets = []
    registry = list(link.registry)
    known = dict(link.registry)
    for g in link.facets:
        if g.label == f:
            continue
        mirrored = tuple(((f,) + w, b) for w, b in g.faces)
        image = g.plane.image(rho)
        if image.same_plane(g.plane):
            facets.append(NonCompactFacet(g.label, g.plane, g.faces + mirrored))
        else:
            new = g.label.prepend(f)
            facets.append(g)
            facets.append(NonCompactFacet(new, image, mirrored))
            if new in known and not known[new].same_plane(image):
                raise TessellationError(f"label {new} reused for a different plane")
            if new not in known:
                known[new] = image
                registry.append((new, image))
    return LinkTessellation(tuple(tiles), tuple(facets), link.history + (f,), tuple(registry), link.seed)


# ------------------------------------------------------------ compact facets


@dataclass(frozen=True)
class CompactClasses:
    """Partition of the compact tile facets ``(word, type)`` into facets of P_n."""

    names: dict  # (word, type) -> FacetLabel
    members: dict  # FacetLabel -> tuple of (word, type)

    def of(self, word, typ) -> FacetLabel:
        return self.names[(tuple(word), typ)]

    def labels(self, typ=None) -> list:
        out = [n for n in self.members if typ is None or n.type == typ]
        return sorted(out, key=lambda x: x.sort_key)


def compact_facet_classes(link: LinkTessellation) -> CompactClasses:
    uf = UnionFind()
    for t in link.tiles:
        for c in link.compact_types:
            uf.add((t.word, c))
    for e1, e2, angle in link.ridges:
        (i, a), (j, b) = e1, e2
        if a in link.compact_types and b == a and angle == 1:
            uf.union((link.tiles[i].word, a), (link.tiles[j].word, b))
    names, members = {}, {}
    for group in uf.groups():
        labels = [FacetLabel(c, w) for w, c in group]
        name = min(labels, key=lambda x: x.sort_key)
        members[name] = tuple(sorted(group, key=lambda m: FacetLabel(m[1], m[0]).sort_key))
        for m in group:
            names[m] = name
    members = {k: members[k] for k in sorted(members, key=lambda x: x.sort_key)}
    return CompactClasses(names, members)


@dataclass(frozen=True)
class LabeledGraph:
    vertices: tuple
    edges: dict  # frozenset({u, v}) -> AngleLabel
    multiplicity: dict

    def neighbors(self, v) -> dict:
        out = {}
        for e, lab in self.edges.items():
            if v in e:
                (w,) = e - {v}
                out[w] = lab
        return out

    def edge_set(self) -> set:
        return {(e, lab) for e, lab in self.edges.items()}


def compact_adjacency(link: LinkTessellation, t: int, classes: CompactClasses | None = None) -> LabeledGraph:
    classes = classes or compact_facet_classes(link)
    edges: dict = {}
    mult: dict = {}
    for e1, e2, angle in link.ridges:
        if e1[1] != t or e2[1] != t or angle == 1:
            continue
        if angle > 1:
            raise TessellationError(f"ridge angle {angle} exceeds pi")
        u = classes.of(link.tiles[e1[0]].word, t)
        v = classes.of(link.tiles[e2[0]].word, t)
        if u == v:
            raise TessellationError(f"compact facet {u} meets itself")
        key = frozenset((u, v))
        lab = AngleLabel.from_fraction(angle)
        if edges.setdefault(key, lab) != lab:
            raise TessellationError(f"parallel edges {u}-{v} with labels {edges[key]} and {lab}")
        mult[key] = mult.get(key, 0) + 1
    return LabeledGraph(tuple(classes.labels(t)), edges, mult)


# ------------------------------------------------------------ face pictures


@dataclass(frozen=True)
class FacePicture:
    facet: FacetLabel
    outline: tuple  # 2D points
    tiles: tuple  # (2D polygon, inside labels)
    edge_labels: tuple  # ((p, q), adjacent facet label)


def _drop_axis(plane: Plane) -> int:
    n = [abs(x) for x in plane.normal]
    return n.index(max(n))


def _project(p, axis):
    return tuple(p[i] for i in range(3) if i != axis)


def _chain(edges):
    """Order a cycle of undirected edges into a polygon, dropping collinear points."""
    adj: dict = {}
    for e in edges:
        a, b = tuple(e)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    start = min(adj)
    poly, prev, cur = [start], None, start
    while True:
        nxt = [w for w in sorted(adj[cur]) if w != prev]
        if prev is None:
            nxt = nxt[:1]
        if not nxt or nxt[0] == start:
            break
        prev, cur = cur, nxt[0]
        poly.append(cur)
    out = []
    n = len(poly)
    for i in range(n):
        a, b, c = poly[i - 1], poly[i], poly[(i + 1) % n]
        cross = [
            (b[1] - a[1]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[1] - a[1]),
            (b[2] - a[2]) * (c[0] - a[0]) - (b[0] - a[0]) * (c[2] - a[2]),
            (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]),
        ]
        if any(cross):
            out.append(b)
    return out


def face_picture(link: LinkTessellation, f, tile_labels=None) -> FacePicture:
    """Picture of facet ``f``.

    ``tile_labels`` maps a tile word to its inside labels; by default the
    labels are the compact facet classes computed from the tessellation.
    """
    facet = link.facet(f)
    if tile_labels is None:
        classes = compact_facet_classes(link)
        tile_labels = {
            t.word: tuple(classes.of(t.word, c) for c in link.compact_types) for t in link.tiles
        }
    axis = _drop_axis(facet.plane)
    polys, edge_count = [], {}
    for word, b in facet.faces:
        poly = link.tiles[link.tile_index[word]].faces[b]
        polys.append((word, poly))
        for e in _edges(poly):
            edge_count[e] = edge_count.get(e, 0) + 1
    boundary = [e for e, c in edge_count.items() if c == 1]
    outline = _chain(boundary)
    # adjacent facets along each boundary edge
    others: dict = {}
    for g in link.facets:
        if g.label == facet.label:
            continue
        for word, b in g.faces:
            for e in _edges(link.tiles[link.tile_index[word]].faces[b]):
                others.setdefault(e, set()).add(g.label)
    by_label: dict = {}
    for e in boundary:
        adj = others.get(e, set())
        if len(adj) != 1:
            raise TessellationError(f"boundary edge of {facet.label} touches {len(adj)} facets")
        by_label.setdefault(next(iter(adj)), set()).update(e)
    edge_labels = []
    for lab, pts in by_label.items():
        pts = sorted(pts)
        edge_labels.append(((_project(pts[0], axis), _project(pts[-1], axis)), lab))
    edge_labels.sort(key=lambda x: (x[0], x[1].sort_key))
    tiles = tuple(
        (tuple(_project(p, axis) for p in poly), tuple(tile_labels[word]))
        for word, poly in sorted(polys, key=lambda wp: sorted(wp[1]))
    )
    return FacePicture(facet.label, tuple(_project(p, axis) for p in outline), tiles, tuple(edge_labels))


# ------------------------------------------------------------ symmetries


def _norm(p):
    """Integral coordinates as ints; they hash far faster than Fractions."""
    return tuple(int(x) if x.denominator == 1 else x for x in p)


def _tile_signature(faces: dict) -> frozenset:
    return frozenset((b, frozenset(poly)) for b, poly in faces.items())


def _fold(x, lo, hi, k):
    """Map coordinate ``x`` of cell ``k`` back into [lo, hi] by wall reflections."""
    length = hi - lo
    r = x - lo - k * length
    if k % 2:
        r = length - r
    return lo + r


def _images(link: LinkTessellation, g: Isometry3) -> list:
    """``g`` applied to every vertex; integer arithmetic on doubled coordinates when possible."""
    a = g.linear
    t2 = [2 * x for x in g.translation]
    integral = all(x.denominator == 1 for r in a for x in r) and all(x.denominator == 1 for x in t2)
    if not integral or link.doubled_vertices is None:
        return [_norm(g(v)) for v in link.vertex_list]
    a = [[int(x) for x in r] for r in a]
    t2 = [int(x) for x in t2]
    out = []
    for w in link.doubled_vertices:
        p = []
        for i in range(3):
            n = a[i][0] * w[0] + a[i][1] * w[1] + a[i][2] * w[2] + t2[i]
            p.append(n // 2 if n % 2 == 0 else Fraction(n, 2))
        out.append(tuple(p))
    return out


def is_tessellation_symmetry(link: LinkTessellation, g: Isometry3, mode: str = "box") -> bool:
    if not g.is_orthogonal():
        return False
    signatures = link.tile_signatures
    image = _images(link, g)
    if mode == "box":
        if link.box is None:
            return False
        corners = _box_corners(link.box)
        if {_norm(g(c)) for c in corners} != {_norm(c) for c in corners}:
            return False
        for faces, _ in link.tile_face_ids:
            moved = frozenset((b, frozenset(image[k] for k in ids)) for b, ids in faces)
            if moved not in signatures:
                return False
        return True
    if mode != "ambient":
        raise ValueError(f"unknown mode {mode!r}")
    box = link.box
    if box is None:
        raise ValueError("ambient mode needs a box-shaped region")
    box = [_norm(b) for b in box]
    fold_cache = {}
    for faces, verts in link.tile_face_ids:
        pts = [image[k] for k in verts]
        centre = tuple(sum(p[i] for p in pts) / len(pts) for i in range(3))
        cells = tuple(int((centre[i] - lo) // (hi - lo)) for i, (lo, hi) in enumerate(box))
        folded = {}
        for k in verts:
            key = (k, cells)
            if key not in fold_cache:
                p = image[k]
                fold_cache[key] = _norm(
                    tuple(Fraction(_fold(p[i], box[i][0], box[i][1], cells[i])) for i in range(3))
                )
            folded[k] = fold_cache[key]
        moved = frozenset((b, frozenset(folded[k] for k in ids)) for b, ids in faces)
        if moved not in signatures:
            return False
    return True


def _box_corners(bounds):
    (x0, x1), (y0, y1), (z0, z1) = bounds
    return [(x, y, z) for x in (x0, x1) for y in (y0, y1) for z in (z0, z1)]


# ------------------------------------------------------------ export


def tessellation_json(link: LinkTessellation) -> dict:
    box = link.box
    return {
        "box": [[qstr(lo), qstr(hi)] for lo, hi in box] if box else None,
        "history": [str(h) for h in link.history],
        "tiles": [
            {"word": [str(w) for w in t.word], **t.placement.to_json()} for t in link.tiles
        ],
        "facets": [
            {
                "label": str(f.label),
                "plane": {"normal": list(f.plane.normal), "offset": qstr(f.plane.offset)},
                "faces": [[[str(w) for w in word], b] for word, b in f.faces],
            }
            for f in link.facets
        ],
    }
