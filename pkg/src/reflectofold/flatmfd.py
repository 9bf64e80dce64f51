"""Cusp sections as flat 3-manifolds.

Each pairing of a gluing scheme yields a deck transformation of the link
tessellation.  The decks generate a crystallographic group Γ; its point
group, translation lattice and torsion decide which closed orientable flat
3-manifold the cusp section is.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .doubling import PolytopeState
from .linkgeom import IDENTITY, Isometry3, mat_mul, mat_vec, qstr
from .reflectofold import GluingScheme, word_isometry

# point-group signature -> Hantzsche-Wendt style name (orientable, torsion-free)
ORIENTABLE_TYPES = {
    "1": "E1",
    "C2": "E2",
    "C3": "E3",
    "C4": "E4",
    "C6": "E5",
    "C2xC2": "E6",
}


class GroupError(ValueError):
    pass


# ------------------------------------------------------------------ decks


def deck_transformations(s: PolytopeState, g: GluingScheme) -> list:
    """One deck per pairing, carrying the link box across the target face."""
    link = s.i3
    box = link.box
    if box is None:
        raise GroupError(f"the link of P{s.n} is not a box")
    centre = tuple((lo + hi) / 2 for lo, hi in box)
    decks = []
    for p in g.pairings:
        phi = word_isometry(s, p.word)
        h = link.facet(p.target.facet).plane
        side = h.value(phi(centre))
        if side == 0:
            raise GroupError(f"{p}: image of the box centre lies on the target plane")
        decks.append(phi if side > 0 else h.reflection() @ phi)
    return decks


# --------------------------------------------------------------- lattices


def _common_den(vectors) -> int:
    d = 1
    for v in vectors:
        for x in v:
            d = d * x.denominator // gcd(d, x.denominator)
    return d


def _echelon(rows: list) -> list:
    """Integer row echelon form (Euclid on each column) of an integer matrix."""
    rows = [list(r) for r in rows if any(r)]
    out = []
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        active = [r for r in rows if r[c]]
        rows = [r for r in rows if not r[c]]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[c]))
            pivot = active[0]
            nxt = [pivot]
            for r in active[1:]:
                q = r[c] // pivot[c]
                r = [a - q * b for a, b in zip(r, pivot)]
                if r[c]:
                    nxt.append(r)
                elif any(r):
                    rows.append(r)
            active = nxt
        if active:
            p = active[0]
            out.append(p if p[c] > 0 else [-a for a in p])
    return out


@dataclass(frozen=True)
class Lattice:
    """A Z-lattice of rational vectors, stored as an integer echelon basis over ``den``."""

    basis: tuple
    den: int

    @classmethod
    def span(cls, vectors) -> "Lattice":
        vectors = [tuple(Fraction(x) for x in v) for v in vectors]
        den = _common_den(vectors)
        rows = _echelon([[int(x * den) for x in v] for v in vectors])
        return cls(tuple(tuple(r) for r in rows), den)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def vectors(self) -> list:
        return [tuple(Fraction(x, self.den) for x in r) for r in self.basis]

    def __contains__(self, v) -> bool:
        w = [Fraction(x) * self.den for x in v]
        if any(x.denominator != 1 for x in w):
            return False
        w = [int(x) for x in w]
        for r in self.basis:
            c = next(i for i, x in enumerate(r) if x)
            if w[c] % r[c]:
                return False
            q = w[c] // r[c]
            w = [a - q * b for a, b in zip(w, r)]
        return not any(w)


# ------------------------------------------------------------------ groups


def _mat_key(a) -> tuple:
    return tuple(tuple(Fraction(x) for x in r) for r in a)


def _order(a) -> int:
    k, p = 1, a
    while p != IDENTITY:
        p = mat_mul(p, a)
        k += 1
        if k > 12:
            raise GroupError("linear part of infinite order")
    return k


@dataclass(frozen=True)
class CrystGroup:
    """Γ = ⋃ reps[A] ∘ (translations by L) over the point group."""

    reps: dict  # linear part -> Isometry3 coset representative
    lattice: Lattice

    @property
    def point_group(self) -> list:
        return list(self.reps)

    @property
    def order(self) -> int:
        return len(self.reps)


def generate_group(gens) -> CrystGroup:
    """Point group by closure, translation lattice by Schreier generators."""
    gens = list(gens)
    gens += [g.inverse() for g in gens]
    reps = {_mat_key(IDENTITY): Isometry3.identity()}
    queue = [_mat_key(IDENTITY)]
    while queue:
        a = queue.pop(0)
        for s in gens:
            b = _mat_key(mat_mul(a, s.linear))
            if b not in reps:
                if len(reps) >= 48:
                    raise GroupError("point group is not finite")
                reps[b] = reps[a] @ s
                queue.append(b)
    trans = []
    for a, rep in reps.items():
        for s in gens:
            prod = rep @ s
            back = reps[_mat_key(prod.linear)].inverse()
            t = back @ prod
            if _mat_key(t.linear) != IDENTITY:
                raise GroupError("Schreier generator is not a translation")
            trans.append(t.translation)
    lattice = Lattice.span(trans)
    return CrystGroup(reps, lattice)


def _fixed_projection(a):
    k = _order(a)
    acc = [[Fraction(0)] * 3 for _ in range(3)]
    p = IDENTITY
    for _ in range(k):
        for i in range(3):
            for j in range(3):
                acc[i][j] += p[i][j]
        p = mat_mul(p, a)
    return tuple(tuple(x / k for x in r) for r in acc)


def torsion_elements(grp: CrystGroup) -> list:
    """Point-group elements whose coset in Γ contains a finite-order element.

    (A, t) has finite order iff its translation projects to zero on the
    fixed space of A, so the coset rep[A] + L has torsion iff the projection
    of rep[A] lies in the projection of L.
    """
    bad = []
    for a, rep in grp.reps.items():
        if a == IDENTITY:
            continue
        proj = _fixed_projection(a)
        target = mat_vec(proj, rep.translation)
        image = Lattice.span([mat_vec(proj, v) for v in grp.lattice.vectors()] or [(0, 0, 0)])
        if tuple(-x for x in target) in image:
            bad.append(a)
    return bad


def is_torsion_free(grp: CrystGroup) -> bool:
    return not torsion_elements(grp)


def is_orientation_preserving(grp: CrystGroup) -> bool:
    return all(rep.det == 1 for rep in grp.reps.values())


def point_group_name(grp: CrystGroup) -> str:
    orders = sorted(_order(a) for a in grp.reps)
    n = len(orders)
    if n == 1:
        return "1"
    if orders[-1] == n:
        return f"C{n}"
    if n == 4 and orders == [1, 2, 2, 2]:
        return "C2xC2"
    return f"order-{n}"


def classify(grp: CrystGroup) -> str:
    """E1..E6, or ``not_a_manifold`` (torsion) or ``unrecognized`` (non-orientable)."""
    if grp.lattice.rank != 3:
        raise GroupError(f"translation lattice has rank {grp.lattice.rank}, not 3")
    if not is_torsion_free(grp):
        return "not_a_manifold"
    if not is_orientation_preserving(grp):
        return "unrecognized"
    return ORIENTABLE_TYPES.get(point_group_name(grp), "unrecognized")


@dataclass(frozen=True)
class CuspReport:
    scheme: str
    decks: tuple
    group: CrystGroup
    classification: str

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "decks": [d.to_json() for d in self.decks],
            "point_group": point_group_name(self.group),
            "point_group_order": self.group.order,
            "lattice": [[qstr(x) for x in v] for v in self.group.lattice.vectors()],
            "torsion_free": is_torsion_free(self.group),
            "orientation_preserving": is_orientation_preserving(self.group),
            "classification": self.classification,
        }


def cusp_report(s: PolytopeState, g: GluingScheme) -> CuspReport:
    decks = tuple(deck_transformations(s, g))
    grp = generate_group(decks)
    return CuspReport(g.name, decks, grp, classify(grp))


def conjugate(g: Isometry3, h: Isometry3) -> Isometry3:
    return h @ g @ h.inverse()


def fixes_point(g: Isometry3) -> bool:
    """Whether ``g`` has a fixed point, i.e. (A - I)x = -t is solvable."""
    a, t = g.linear, g.translation
    rows = [[a[i][j] - (1 if i == j else 0) for j in range(3)] + [-t[i]] for i in range(3)]
    # rank test by rational Gaussian elimination
    r = 0
    for c in range(3):
        piv = next((i for i in range(r, 3) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(3):
            if i != r and rows[i][c]:
                f = rows[i][c] / rows[r][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return all(any(row[:3]) or row[3] == 0 for row in rows)
