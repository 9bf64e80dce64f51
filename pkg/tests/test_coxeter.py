import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reflectofold.coxeter import (
    D_SOURCE,
    DIAGRAM_D,
    PARALLEL,
    RIGHT,
    SELF,
    AngleLabel,
    CoxeterMatrix,
    DiagramSyntaxError,
    check_seed_conditions,
    classify_subdiagram,
    derive_compact_facets,
    diagram_file_text,
    is_admissible,
    maximal_affine_subdiagrams,
    parse_diagram,
)

CYCLE = [(5, 6), (4, 5), (3, 4), (2, 3), (1, 2), (1, 7), (6, 7)]
TWO_INF = CoxeterMatrix.from_edges(2, {(1, 2): PARALLEL})


def relabel(i, j, k):
    return DIAGRAM_D.with_label(i, j, AngleLabel.submultiple(k))


# ---------------------------------------------------------------- labels


def test_angle_label_validation():
    with pytest.raises(ValueError):
        AngleLabel.submultiple(1)
    with pytest.raises(ValueError):
        AngleLabel.general(AngleLabel.submultiple(3).fraction())
    with pytest.raises(ValueError):
        AngleLabel.general(1)
    assert AngleLabel.from_fraction("1/4") == AngleLabel.submultiple(4)
    assert AngleLabel.from_fraction("2/3").kind == "general"


def test_matrix_is_symmetric_with_self_diagonal():
    m = DIAGRAM_D
    for i in m.nodes:
        assert m.label(i, i) == SELF
        for j in m.nodes:
            assert m.label(i, j) == m.label(j, i)
    allowed = {RIGHT, AngleLabel.submultiple(4), AngleLabel.submultiple(6), PARALLEL}
    assert {m.label(i, j) for i in m.nodes for j in m.nodes if i != j} <= allowed


# ----------------------------------------------------------------- parser


def test_parse_d_file():
    m = parse_diagram(D_SOURCE)
    assert m == DIAGRAM_D
    assert parse_diagram(diagram_file_text()) == DIAGRAM_D
    cycle = {frozenset(e) for e in CYCLE}
    for i, j in itertools.combinations(m.nodes, 2):
        if frozenset((i, j)) not in cycle:
            assert m.label(i, j) == RIGHT


def test_single_node():
    m = parse_diagram("nodes: 1\n")
    assert m.n == 1


def test_explicit_two_is_normalised():
    m = parse_diagram("nodes: 2\nedge 1 2 2\n")
    assert m.label(1, 2) == RIGHT


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("nodes: 7\nedge 1 9 4\n", 2, 8),
        ("nodes: 3\nedge 1 2 4\nedge 2 1 4\n", 3, 1),
        ("nodes: 3\nedge 1 2 x\n", 2, 10),
        ("nodes: 3\nedge 1 2 1\n", 2, 10),
        ("edge 1 2 4\n", 1, 1),
        ("nodes: 3\nfoo\n", 2, 1),
    ],
)
def test_parse_errors_carry_location(text, line, col):
    with pytest.raises(DiagramSyntaxError) as exc:
        parse_diagram(text)
    assert (exc.value.line, exc.value.col) == (line, col)


def test_dsl_roundtrip():
    assert parse_diagram(DIAGRAM_D.to_dsl()) == DIAGRAM_D


@settings(max_examples=30, deadline=None)
@given(st.permutations(D_SOURCE.strip().splitlines()[2:]))
def test_compact_facets_stable_under_edge_order(lines):
    m = parse_diagram("nodes: 7\n" + "\n".join(lines))
    assert derive_compact_facets(m) == {1: False, 2: False, 3: True, 4: False, 5: False, 6: False, 7: True}


# ---------------------------------------------------------- classification


def test_classification_examples():
    c = classify_subdiagram(DIAGRAM_D, {1, 2, 4, 5, 6})
    assert c.value == "affine"
    assert sorted(c.components) == sorted(["Ã_1", "C̃_2"])
    assert classify_subdiagram(DIAGRAM_D, {3}).components == ("A_1",)
    assert classify_subdiagram(DIAGRAM_D, {3, 4}).components == ("I_2(6)",)


def test_ultraparallel_subset_rejected():
    m = parse_diagram("nodes: 2\ndiv 1 2\n")
    with pytest.raises(ValueError):
        classify_subdiagram(m, {1, 2})


def test_maximal_affine_examples():
    assert maximal_affine_subdiagrams(DIAGRAM_D) == [frozenset({1, 2, 4, 5, 6})]
    assert maximal_affine_subdiagrams(parse_diagram("nodes: 1\n")) == []
    assert maximal_affine_subdiagrams(TWO_INF) == [frozenset({1, 2})]


def test_compact_examples():
    assert {v for v, c in derive_compact_facets(DIAGRAM_D).items() if c} == {3, 7}
    assert not any(derive_compact_facets(TWO_INF).values())
    sub = parse_diagram("nodes: 3\nedge 2 1 inf\nedge 3 2 4\n")
    assert {v for v, c in derive_compact_facets(sub).items() if c} == {3}


def _brute_force_compact(m):
    # independent route: a node is non-compact iff some affine subset contains it
    out = set(m.nodes)
    for r in range(1, m.n + 1):
        for s in itertools.combinations(m.nodes, r):
            if classify_subdiagram(m, s).value == "affine":
                out -= set(s)
    return out


def test_compact_matches_brute_force_on_subdiagram():
    sub = parse_diagram("nodes: 3\nedge 2 1 inf\nedge 3 2 4\n")
    assert _brute_force_compact(sub) == {3}
    assert _brute_force_compact(DIAGRAM_D) == {3, 7}


def test_every_subset_has_one_class_and_spherical_is_hereditary():
    for r in range(1, 8):
        for s in itertools.combinations(DIAGRAM_D.nodes, r):
            c = classify_subdiagram(DIAGRAM_D, s)
            assert c.value in ("spherical", "affine", "other")
            if c.value == "spherical":
                for k in range(1, r):
                    for t in itertools.combinations(s, k):
                        assert classify_subdiagram(DIAGRAM_D, t).value == "spherical"


@settings(max_examples=40, deadline=None)
@given(st.permutations(range(1, 8)), st.sets(st.integers(1, 7), min_size=1))
def test_classification_invariant_under_relabeling(perm, subset):
    sigma = dict(zip(range(1, 8), perm))
    m2 = DIAGRAM_D.permuted(sigma)
    a = classify_subdiagram(DIAGRAM_D, subset)
    b = classify_subdiagram(m2, {sigma[v] for v in subset})
    assert a.value == b.value
    assert sorted(a.components) == sorted(b.components)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32))
def test_random_small_diagrams_classes_are_consistent(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    edges = {}
    for i, j in itertools.combinations(range(1, n + 1), 2):
        k = rng.choice([2, 2, 2, 3, 4, 6, "inf"])
        if k != 2:
            edges[(i, j)] = PARALLEL if k == "inf" else AngleLabel.submultiple(k)
    m = CoxeterMatrix.from_edges(n, edges)
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    sigma = dict(zip(range(1, n + 1), perm))
    for r in range(1, n + 1):
        for s in itertools.combinations(m.nodes, r):
            assert classify_subdiagram(m, s).value == classify_subdiagram(
                m.permuted(sigma), {sigma[v] for v in s}
            ).value


# ------------------------------------------------------------- seed check


def test_seed_d_passes():
    r = check_seed_conditions(DIAGRAM_D)
    assert r.condition_a and r.condition_b and r.passed
    assert r.compact == (3, 7)


def test_two_node_parallel_passes_vacuously():
    r = check_seed_conditions(TWO_INF)
    assert r.condition_a and r.condition_b and r.compact == ()


def test_relabel_32_to_three_adds_an_ideal_vertex():
    # {2,3,4} becomes G̃_2, so 3 is no longer bounded: (a) fails, not (b)
    m = relabel(3, 2, 3)
    r = check_seed_conditions(m)
    assert not r.passed
    assert not r.condition_a
    assert frozenset({2, 3, 4}) in maximal_affine_subdiagrams(m)


def test_relabel_32_to_five_fails_b_at_that_pair():
    r = check_seed_conditions(relabel(3, 2, 5))
    assert r.condition_a and not r.condition_b
    assert (3, 2, "5") in r.violations


@pytest.mark.parametrize("edge", [(3, 4), (2, 3), (1, 7), (6, 7)])
def test_odd_labels_on_bounded_edges_fail(edge):
    for k in (3, 5):
        r = check_seed_conditions(relabel(*edge, k))
        assert not r.passed
        if k == 5:
            assert not r.condition_b
            compact = next(v for v in edge if v in (3, 7))
            other = next(v for v in edge if v != compact)
            assert (compact, other, "5") in r.violations


def test_seed_report_serialises():
    r = check_seed_conditions(DIAGRAM_D)
    assert r.to_json()["compact"] == [3, 7]
    assert "assumption" in r.to_json()
    assert "condition (b): pass" in r.to_text()


def test_admissibility_examples():
    assert is_admissible(DIAGRAM_D, 5)
    assert is_admissible(DIAGRAM_D, 3)
    assert not is_admissible(relabel(3, 2, 3), 2)
