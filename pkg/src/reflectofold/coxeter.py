"""Coxeter diagrams: parsing, catalog classification and seed conditions."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources


@dataclass(frozen=True)
class AngleLabel:
    """Dihedral angle between two facets.

    ``kind`` is one of ``submultiple`` (angle pi/k), ``parallel`` (label inf),
    ``ultraparallel`` (dashed edge), ``general`` (angle q*pi) or ``self``.
    """

    kind: str
    k: int | None = None
    q: Fraction | None = None

    def __post_init__(self):
        if self.kind == "submultiple":
            if self.k is None or self.k < 2:
                raise ValueError(f"submultiple label needs k >= 2, got {self.k}")
        elif self.kind == "general":
            q = Fraction(self.q)
            if not 0 < q < 1 or (q.numerator == 1 and q.denominator >= 2):
                raise ValueError(f"general angle must be in (0,1) and not 1/k, got {q}")
            object.__setattr__(self, "q", q)
        elif self.kind not in ("parallel", "ultraparallel", "self"):
            raise ValueError(f"unknown angle kind {self.kind!r}")

    @classmethod
    def submultiple(cls, k: int) -> "AngleLabel":
        return cls("submultiple", k=k)

    @classmethod
    def general(cls, q) -> "AngleLabel":
        return cls("general", q=Fraction(q))

    @classmethod
    def from_fraction(cls, q) -> "AngleLabel":
        """The label of the angle ``q*pi``."""
        q = Fraction(q)
        if q.numerator == 1 and q.denominator >= 2:
            return cls.submultiple(q.denominator)
        return cls.general(q)

    @property
    def intersecting(self) -> bool:
        return self.kind in ("submultiple", "general")

    @property
    def is_even_submultiple(self) -> bool:
        return self.kind == "submultiple" and self.k % 2 == 0

    def fraction(self) -> Fraction:
        """The angle as a multiple of pi (intersecting labels only)."""
        if self.kind == "submultiple":
            return Fraction(1, self.k)
        if self.kind == "general":
            return self.q
        raise ValueError(f"{self} has no finite angle")

    def __str__(self) -> str:
        if self.kind == "submultiple":
            return str(self.k)
        if self.kind == "general":
            return f"_{self.q}_"
        return {"parallel": "inf", "ultraparallel": "div", "self": "self"}[self.kind]


SELF = AngleLabel("self")
RIGHT = AngleLabel.submultiple(2)
PARALLEL = AngleLabel("parallel")
ULTRAPARALLEL = AngleLabel("ultraparallel")


class DiagramSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int = 1):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class CoxeterMatrix:
    """Symmetric label table of a Coxeter diagram with 1-based nodes."""

    n: int
    labels: tuple[tuple[AngleLabel, ...], ...]

    def __post_init__(self):
        for i in range(self.n):
            if self.labels[i][i] != SELF:
                raise ValueError("diagonal must be the self marker")
            for j in range(self.n):
                if self.labels[i][j] != self.labels[j][i]:
                    raise ValueError(f"labels not symmetric at ({i + 1},{j + 1})")

    @classmethod
    def from_edges(cls, n: int, edges: dict) -> "CoxeterMatrix":
        """Build from ``{(i, j): AngleLabel}``; absent pairs are right angles."""
        rows = [[SELF if i == j else RIGHT for j in range(n)] for i in range(n)]
        for (i, j), lab in edges.items():
            rows[i - 1][j - 1] = rows[j - 1][i - 1] = lab
        return cls(n, tuple(tuple(r) for r in rows))

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    def label(self, i: int, j: int) -> AngleLabel:
        return self.labels[i - 1][j - 1]

    def m(self, i: int, j: int):
        """Coxeter exponent m_ij (``inf`` for parallel pairs)."""
        lab = self.label(i, j)
        if lab.kind == "submultiple":
            return lab.k
        if lab.kind == "parallel":
            return float("inf")
        raise ValueError(f"no Coxeter exponent for {i},{j}: {lab}")

    def angle(self, i: int, j: int) -> Fraction:
        return self.label(i, j).fraction()

    def edges(self) -> dict:
        """Non-right-angle pairs ``{(i, j): label}`` with i < j."""
        return {
            (i, j): self.label(i, j)
            for i, j in itertools.combinations(self.nodes, 2)
            if self.label(i, j) != RIGHT
        }

    def with_label(self, i: int, j: int, lab: AngleLabel) -> "CoxeterMatrix":
        e = self.edges()
        e[(min(i, j), max(i, j))] = lab
        return CoxeterMatrix.from_edges(self.n, e)

    def permuted(self, perm: dict) -> "CoxeterMatrix":
        """Relabel nodes by ``perm`` (old node -> new node)."""
        return CoxeterMatrix.from_edges(
            self.n, {(perm[i], perm[j]): lab for (i, j), lab in self.edges().items()}
        )

    @property
    def compact(self) -> dict:
        return derive_compact_facets(self)

    def to_dsl(self) -> str:
        out = [f"nodes: {self.n}"]
        for (i, j), lab in self.edges().items():
            if lab.kind == "ultraparallel":
                out.append(f"div {i} {j}")
            else:
                out.append(f"edge {i} {j} {lab}")
        return "\n".join(out) + "\n"


def parse_diagram(text: str) -> CoxeterMatrix:
    n = None
    edges: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        toks = line.split()
        if n is None:
            if toks[0] != "nodes:" or len(toks) != 2 or not toks[1].isdigit():
                raise DiagramSyntaxError("expected 'nodes: <INT>' first", lineno, col)
            n = int(toks[1])
            if n < 1:
                raise DiagramSyntaxError("node count must be positive", lineno, col)
            continue
        head = toks[0]
        if head == "edge" and len(toks) == 4:
            i, j = _node_pair(toks, n, lineno, line)
            lab = _edge_label(toks[3], lineno, line.rindex(toks[3]) + 1)
        elif head == "div" and len(toks) == 3:
            i, j = _node_pair(toks, n, lineno, line)
            lab = ULTRAPARALLEL
        else:
            raise DiagramSyntaxError(f"unrecognised directive {line.strip()!r}", lineno, col)
        key = (min(i, j), max(i, j))
        if key in edges:
            raise DiagramSyntaxError(f"duplicate edge {key[0]} {key[1]}", lineno, col)
        edges[key] = lab
    if n is None:
        raise DiagramSyntaxError("missing 'nodes:' directive", 1)
    return CoxeterMatrix.from_edges(n, edges)


def _node_pair(toks, n, lineno, line):
    out = []
    for tok in toks[1:3]:
        col = line.index(tok) + 1
        if not tok.isdigit():
            raise DiagramSyntaxError(f"expected node index, got {tok!r}", lineno, col)
        v = int(tok)
        if not 1 <= v <= n:
            raise DiagramSyntaxError(f"node {v} out of range 1..{n}", lineno, col)
        out.append(v)
    if out[0] == out[1]:
        raise DiagramSyntaxError("edge must join distinct nodes", lineno, line.index(toks[1]) + 1)
    return out


def _edge_label(tok, lineno, col):
    if tok in ("inf", "oo", "∞"):
        return PARALLEL
    if not tok.isdigit():
        raise DiagramSyntaxError(f"bad edge label {tok!r}", lineno, col)
    m = int(tok)
    if m < 2:
        raise DiagramSyntaxError(f"edge label must be >= 3 (or 2), got {m}", lineno, col)
    return AngleLabel.submultiple(m)


D_SOURCE = """\
# Seven-node cycle with two compact nodes (3 and 7).
nodes: 7
edge 6 5 4
edge 5 4 4
edge 4 3 6
edge 3 2 4
edge 2 1 inf
edge 1 7 4
edge 7 6 6
"""

DIAGRAM_D = CoxeterMatrix.from_edges(
    7,
    {
        (5, 6): AngleLabel.submultiple(4),
        (4, 5): AngleLabel.submultiple(4),
        (3, 4): AngleLabel.submultiple(6),
        (2, 3): AngleLabel.submultiple(4),
        (1, 2): PARALLEL,
        (1, 7): AngleLabel.submultiple(4),
        (6, 7): AngleLabel.submultiple(6),
    },
)


def diagram_file_text() -> str:
    return resources.files("reflectofold").joinpath("data/diagram_D.cox").read_text()


# ---------------------------------------------------------------- catalog


@dataclass(frozen=True)
class DiagramClass:
    value: str  # spherical | affine | other
    components: tuple[str, ...] = field(default=())

    def __str__(self) -> str:
        if not self.components:
            return self.value
        return f"{self.value} {' ⊔ '.join(self.components)}"


def _components(m: CoxeterMatrix, s) -> list[list[int]]:
    s = sorted(s)
    seen, comps = set(), []
    for v in s:
        if v in seen:
            continue
        comp, stack = [], [v]
        seen.add(v)
        while stack:
            a = stack.pop()
            comp.append(a)
            for b in s:
                if b not in seen and m.label(a, b) != RIGHT:
                    seen.add(b)
                    stack.append(b)
        comps.append(sorted(comp))
    return comps


def _classify_component(m: CoxeterMatrix, comp: list[int]) -> tuple[str, str | None]:
    """Return (kind, catalog name) for one connected component."""
    k = len(comp)
    if k == 1:
        return "spherical", "A_1"
    edges = {
        (a, b): m.label(a, b)
        for a, b in itertools.combinations(comp, 2)
        if m.label(a, b) != RIGHT
    }
    if any(lab.kind != "submultiple" for lab in edges.values()):
        if k == 2 and next(iter(edges.values())).kind == "parallel":
            return "affine", "Ã_1"
        return "other", None
    adj = {v: {} for v in comp}
    for (a, b), lab in edges.items():
        adj[a][b] = adj[b][a] = lab.k
    deg = {v: len(adj[v]) for v in comp}
    n_edges = len(edges)
    labels = sorted(lab.k for lab in edges.values())

    if n_edges == k:  # one cycle
        if all(d == 2 for d in deg.values()) and all(x == 3 for x in labels):
            return "affine", f"Ã_{k - 1}"
        return "other", None
    if n_edges != k - 1:
        return "other", None

    if max(deg.values()) <= 2:
        ends = [v for v in comp if deg[v] == 1]
        seq, prev, cur = [], None, ends[0]
        while True:
            nxt = [w for w in adj[cur] if w != prev]
            if not nxt:
                break
            seq.append(adj[cur][nxt[0]])
            prev, cur = cur, nxt[0]
        return _classify_path(seq)

    branch = [v for v in comp if deg[v] >= 3]
    if any(x != 3 for x in labels):
        # B~_n is the only branched catalog diagram with a label other than 3
        if len(branch) == 1 and deg[branch[0]] == 3:
            legs = sorted(_legs(adj, branch[0]), key=lambda lg: (lg != [3], lg))
            rest = legs[2]
            if legs[0] == legs[1] == [3] and rest[-1] == 4 and set(rest[:-1]) <= {3}:
                return "affine", f"B̃_{k - 1}"
        return "other", None
    if len(branch) == 1:
        c = branch[0]
        legs = sorted(len(lg) for lg in _legs(adj, c))
        if deg[c] == 4:
            return ("affine", "D̃_4") if legs == [1, 1, 1, 1] else ("other", None)
        p, q, r = legs
        if p == 1 and q == 1:
            return "spherical", f"D_{k}"
        table = {
            (1, 2, 2): ("spherical", "E_6"),
            (1, 2, 3): ("spherical", "E_7"),
            (1, 2, 4): ("spherical", "E_8"),
            (2, 2, 2): ("affine", "Ẽ_6"),
            (1, 3, 3): ("affine", "Ẽ_7"),
            (1, 2, 5): ("affine", "Ẽ_8"),
        }
        return table.get((p, q, r), ("other", None))
    if len(branch) == 2 and all(deg[b] == 3 for b in branch):
        leaves_ok = all(
            sum(1 for w in adj[b] if deg[w] == 1) == 2 for b in branch
        )
        if leaves_ok:
            return "affine", f"D̃_{k - 1}"
    return "other", None


def _legs(adj, centre):
    """Label sequences along each leg leaving ``centre`` of a tree."""
    legs = []
    for first in sorted(adj[centre]):
        seq, prev, cur = [adj[centre][first]], centre, first
        while True:
            nxt = [w for w in adj[cur] if w != prev]
            if len(nxt) != 1:
                break
            seq.append(adj[cur][nxt[0]])
            prev, cur = cur, nxt[0]
        legs.append(seq)
    return legs


def _classify_path(seq: list[int]) -> tuple[str, str | None]:
    k = len(seq) + 1
    rev = seq[::-1]
    if all(x == 3 for x in seq):
        return "spherical", f"A_{k}"
    if k == 2:
        return "spherical", f"I_2({seq[0]})"
    if seq.count(4) == 1 and seq.count(3) == k - 2 and (seq[0] == 4 or seq[-1] == 4):
        return "spherical", f"B_{k}"
    if seq.count(4) == 2 and seq[0] == 4 and seq[-1] == 4 and seq.count(3) == k - 3:
        return "affine", f"C̃_{k - 1}"
    for s in (seq, rev):
        if s == [3, 4, 3]:
            return "spherical", "F_4"
        if s == [5, 3]:
            return "spherical", "H_3"
        if s == [5, 3, 3]:
            return "spherical", "H_4"
        if s == [3, 3, 4, 3]:
            return "affine", "F̃_4"
        if s == [3, 6]:
            return "affine", "G̃_2"
    return "other", None


def classify_subdiagram(m: CoxeterMatrix, s) -> DiagramClass:
    s = sorted(set(s))
    if not s:
        raise ValueError("empty node subset")
    if any(v not in m.nodes for v in s):
        raise ValueError(f"subset {s} not within nodes 1..{m.n}")
    for a, b in itertools.combinations(s, 2):
        if m.label(a, b).kind == "ultraparallel":
            raise ValueError(f"ultraparallel edge {a}-{b}: classification undefined")
    results = [_classify_component(m, c) for c in _components(m, s)]
    kinds = {kind for kind, _ in results}
    if kinds == {"spherical"}:
        return DiagramClass("spherical", tuple(name for _, name in results))
    if kinds == {"affine"}:
        return DiagramClass("affine", tuple(name for _, name in results))
    return DiagramClass("other")


def maximal_affine_subdiagrams(m: CoxeterMatrix) -> list[frozenset]:
    affine = []
    for r in range(1, m.n + 1):
        for s in itertools.combinations(m.nodes, r):
            if any(m.label(a, b).kind == "ultraparallel" for a, b in itertools.combinations(s, 2)):
                continue
            if classify_subdiagram(m, s).value == "affine":
                affine.append(frozenset(s))
    maximal = [s for s in affine if not any(s < t for t in affine)]
    return sorted(maximal, key=sorted)


def derive_compact_facets(m: CoxeterMatrix) -> dict:
    maximal = maximal_affine_subdiagrams(m)
    if len(maximal) != 1:
        raise ValueError(f"expected exactly one maximal affine subdiagram, found {len(maximal)}")
    return {v: v not in maximal[0] for v in m.nodes}


@dataclass(frozen=True)
class SeedReport:
    nodes: int
    compact: tuple[int, ...]
    affine_subdiagrams: tuple[tuple[int, ...], ...]
    affine_classes: tuple[str, ...]
    condition_a: bool
    condition_b: bool
    violations: tuple[tuple[int, int, str], ...]
    assumption: str = "pairs without an explicit edge are taken to meet at right angles"

    @property
    def passed(self) -> bool:
        return self.condition_a and self.condition_b

    def to_json(self) -> dict:
        return {
            "nodes": self.nodes,
            "compact": list(self.compact),
            "affine_subdiagrams": [list(s) for s in self.affine_subdiagrams],
            "affine_classes": list(self.affine_classes),
            "condition_a": self.condition_a,
            "condition_b": self.condition_b,
            "violations": [list(v) for v in self.violations],
            "assumption": self.assumption,
        }

    def to_text(self) -> str:
        lines = [f"nodes: {self.nodes}"]
        for s, c in zip(self.affine_subdiagrams, self.affine_classes):
            lines.append(f"maximal affine subdiagram: {{{','.join(map(str, s))}}} ({c})")
        lines.append(f"compact facets: {{{','.join(map(str, self.compact))}}}")
        lines.append(f"condition (a): {'pass' if self.condition_a else 'FAIL'}")
        lines.append(f"condition (b): {'pass' if self.condition_b else 'FAIL'}")
        for i, j, lab in self.violations:
            lines.append(f"  violation: pair ({i},{j}) has label {lab}")
        lines.append(f"assumption: {self.assumption}")
        return "\n".join(lines) + "\n"

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def check_seed_conditions(m: CoxeterMatrix) -> SeedReport:
    maximal = maximal_affine_subdiagrams(m)
    cond_a = len(maximal) == 1
    # Without a unique ideal vertex, a facet is still compact iff it lies in
    # no maximal affine subdiagram, so (b) remains meaningful.
    ideal = set().union(*maximal) if maximal else set()
    compact = tuple(v for v in m.nodes if v not in ideal)
    violations = []
    for c in compact:
        for v in sorted(ideal):
            lab = m.label(c, v)
            if lab.intersecting and not lab.is_even_submultiple:
                violations.append((c, v, str(lab)))
    return SeedReport(
        nodes=m.n,
        compact=compact,
        affine_subdiagrams=tuple(tuple(sorted(s)) for s in maximal),
        affine_classes=tuple(str(classify_subdiagram(m, s)) for s in maximal),
        condition_a=cond_a,
        condition_b=not violations,
        violations=tuple(violations),
    )


def is_admissible(m: CoxeterMatrix, f: int) -> bool:
    return all(
        m.label(f, v).is_even_submultiple
        for v in m.nodes
        if v != f and m.label(f, v).intersecting
    )
