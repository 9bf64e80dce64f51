import json
from fractions import Fraction
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reflectofold.coxeter import AngleLabel
from reflectofold.doubling import canonical_sequence
from reflectofold.labels import L
from reflectofold.linkgeom import compose
from reflectofold.pipeline import table_diff
from reflectofold.reflectofold import (
    FaceRegion,
    GluingScheme,
    Pairing,
    Reflection,
    SchemeError,
    Translation,
    adjacency_matrix_R,
    builtin_gluings,
    check_developability,
    corner_graphs,
    coxeter_presentation,
    facet_classes,
    inverse_word,
    parse_scheme,
    parse_word,
    validate_gluing,
    word_isometry,
)

BUILTIN = ("R_T", "R_half", "R_quarter", "R_HW")


def naive_torus():
    text = (resources.files("reflectofold") / "schemes" / "p1_naive_torus.json").read_text()
    return parse_scheme(text)


def rows(rs, t):
    return {str(x) for x in adjacency_matrix_R(rs, t).rows}


# ------------------------------------------------------------------ words


def test_parse_word_forms():
    assert parse_word(["r6", "(r1 r2)^2"]) == tuple(Reflection(L(x)) for x in ("6", "1", "2", "1", "2"))
    assert parse_word("r6_5") == (Reflection(L("6_5")),)
    assert parse_word("r6_{4,5}∘r1") == (Reflection(L("6_{4,5}")), Reflection(L("1")))
    assert parse_word("t(1,0,1/2)") == (Translation((1, 0, Fraction(1, 2))),)


@pytest.mark.parametrize(
    "text, column",
    [("r6 x", 4), ("(r1 r2", 7), ("(r1)^", 6), ("q1", 1)],
)
def test_parse_word_errors_name_the_column(text, column):
    with pytest.raises(SchemeError) as err:
        parse_word([text], "w")
    assert "w[0]" in str(err.value)
    assert f"column {column}" in str(err.value)


def test_inverse_word_is_inverse(states):
    s = states[7]
    word = parse_word(["r1", "r6", "r5", "t(1,2,0)"])
    g = word_isometry(s, word) @ word_isometry(s, inverse_word(word))
    assert g == compose()


def test_unknown_reflection(states):
    with pytest.raises(SchemeError):
        word_isometry(states[7], parse_word("r3"))


# ---------------------------------------------------------------- schemes


def test_builtin_rt_pairings(gluings):
    got = {(str(p.source), str(p.target), tuple(map(str, p.word))) for p in gluings["R_T"].pairings}
    assert got == {
        ("6_{4_5}", "6_{6,4_5}", ("r6",)),
        ("6_{4,5}", "6_{6_5,4,5}", ("r6_5",)),
        ("1_2", "1_{1,2}", ("r1",)),
    }


def test_scheme_json_round_trip(gluings):
    for g in gluings.values():
        assert parse_scheme(json.dumps(g.to_json())) == g


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ("{", "line 1"),
        ("[]", "JSON object"),
        ('{"base": "Q7", "pairings": []}', "base"),
        ('{"base": "P7"}', "pairings"),
        ('{"base": "P7", "pairings": [{"source": {"facet": "6"}}]}', "pairings[0]"),
        ('{"base": "P7", "pairings": [{"source": {"facet": "6_{"}, "target": {"facet": "6"}, "word": []}]}',
         "pairings[0].source.facet"),
        ('{"base": "P7", "pairings": [{"source": {"facet": "6", "region": "left"}, '
         '"target": {"facet": "6"}, "word": []}]}', "region"),
        ('{"base": "P7", "pairings": [{"source": {"facet": "6"}, "target": {"facet": "6"}, "word": ["r6 ?"]}]}',
         "pairings[0].word[0]"),
    ],
)
def test_scheme_errors(doc, fragment):
    with pytest.raises(SchemeError) as err:
        parse_scheme(doc)
    assert fragment in str(err.value)


def test_builtin_schemes_valid(states, gluings):
    for name in BUILTIN:
        g = gluings[name]
        report = validate_gluing(states[g.base_index], g)
        assert report.valid, report.violations()


def test_wrong_word_is_a_region_mismatch(states, gluings):
    g = gluings["R_T"]
    bad = GluingScheme("bad", "P7", g.pairings[:2] + (Pairing(g.pairings[2].source, g.pairings[2].target,
                                                               parse_word("r6")),))
    report = validate_gluing(states[7], bad)
    assert not report.valid and not report.geometry_ok
    assert not report.checks[2].region_ok


def test_base_mismatch(states, gluings):
    with pytest.raises(SchemeError):
        validate_gluing(states[8], gluings["R_T"])


def test_coverage(states, gluings):
    g = gluings["R_T"]
    partial = GluingScheme("partial", "P7", g.pairings[:2])
    report = validate_gluing(states[7], partial)
    assert report.geometry_ok and not report.coverage_ok and not report.valid


def test_half_regions_must_be_rectangles(states):
    s = states[7]
    g = GluingScheme("h", "P7", (Pairing(FaceRegion(L("3"), "upper"), FaceRegion(L("3"), "lower"), ()),))
    report = validate_gluing(s, g)
    assert not report.geometry_ok


def test_naive_torus_control(states):
    g = naive_torus()
    s = states[1]
    report = validate_gluing(s, g)
    assert report.geometry_ok and report.coverage_ok
    assert not report.valid
    rs = facet_classes(s, g)
    dev = check_developability(rs)
    assert not dev.developable
    kinds = {v.kind for v in dev.violations}
    assert {"EF", "angle"} <= kinds
    loops = {(c.type, c.angle) for c in rs.corners if c.a == c.b}
    assert (3, Fraction(3, 4)) in loops
    with pytest.raises(SchemeError):
        coxeter_presentation(rs)
    assert any("3/4π" in str(v) for v in dev.violations)


# ----------------------------------------------------------- reflectofolds


def test_empty_scheme(states):
    s = states[2]
    rs = facet_classes(s, GluingScheme("empty", "P2", ()))
    assert all(len(m) == 1 for t in s.compact_types for m in rs.classes[t])
    assert not rs.corners
    g3, g7 = corner_graphs(s, GluingScheme("empty", "P2", ()))
    assert {frozenset((u, v)) for u, v, _, _ in g7} == set(s.i2_7.edges)
    assert check_developability(rs).developable


def test_class_examples(reflectofolds):
    rt = reflectofolds["R_T"]
    assert set(rt.classes[3][[L("3_4") in m for m in rt.classes[3]].index(True)]) == {L("3_4"), L("3_{6_5,4}")}
    hw = reflectofolds["R_HW"]
    part = hw.partition(3)
    assert frozenset({L("3_2")}) in part
    assert frozenset({L("3_{4,2}"), L("3_{1,4,2}"), L("3_{1_2,1,4,2}")}) in part


def test_corner_examples(reflectofolds):
    def g7(name):
        return {(frozenset((u, v)), lab.k) for u, v, lab, _ in reflectofolds[name].g7t}

    assert (frozenset({L("7"), L("7_1")}), 2) in g7("R_T")
    assert (frozenset({L("7"), L("7_{6_5}")}), 3) in g7("R_T")
    assert (frozenset({L("7"), L("7_{6,1}")}), 2) in g7("R_quarter")


def test_classes_and_corners_match_printed(reflectofolds, golden):
    for name in BUILTIN:
        rs = reflectofolds[name]
        printed = golden.schemes[name]
        assert rs.partition(3) == set(printed["classes"])
        corners = {(c.pair, c.label.k) for c in rs.corners if c.type == 7}
        assert corners == set(printed["corners"])


def test_no_merging_of_type_7(reflectofolds):
    for name in BUILTIN:
        assert all(len(m) == 1 for m in reflectofolds[name].classes[7])


def test_matrix_examples(reflectofolds):
    rt7 = adjacency_matrix_R(reflectofolds["R_T"], 7)
    assert rt7.size == 8
    assert {x for row in rt7.cells for x in row} == {0, 1, 2, 3}
    rq = adjacency_matrix_R(reflectofolds["R_quarter"], 3)
    assert rq.entry(L("3_{4_5}"), L("3_{4,2}")) == 2
    assert adjacency_matrix_R(reflectofolds["R_HW"], 3).size == 16


@pytest.mark.parametrize("tid, name", [("tr1", "R_T"), ("tr2", "R_half"), ("tr3", "R_quarter"), ("tr4", "R_HW")])
def test_matrices_match_printed_up_to_errata(reflectofolds, golden, tid, name):
    rs = reflectofolds[name]
    for t in rs.state.compact_types:
        d = table_diff(golden, tid, t, adjacency_matrix_R(rs, t))
        assert d["unexpected"] == []
        if tid != "tr4":
            assert d["known_errata"] == []


def test_corner_angles_are_submultiples(reflectofolds):
    for name in BUILTIN:
        rs = reflectofolds[name]
        for c in rs.corners:
            assert c.label is not None and c.label.kind == "submultiple"
        for t in (3, 7):
            for _, _, lab, _ in rs.graph(t):
                assert lab.kind == "submultiple"
        assert rs.state.seed.label(3, 7) == AngleLabel.submultiple(2)


def test_quotient_consistency(reflectofolds):
    for name in BUILTIN:
        rs = reflectofolds[name]
        projected = {}
        for e, lab in rs.state.i2_3.edges.items():
            pair = frozenset(rs.class_of[x] for x in e)
            projected.setdefault(pair, set()).add(lab)
        assert all(len(v) == 1 for v in projected.values())
        for u, v, lab, _ in rs.g3t:
            pair = frozenset((u, v))
            corner = any(c.pair == pair and c.type == 3 for c in rs.corners)
            assert pair in projected or corner


def test_all_builtin_developable(reflectofolds):
    for name in BUILTIN:
        assert check_developability(reflectofolds[name]).developable


def test_presentation(reflectofolds):
    p = coxeter_presentation(reflectofolds["R_T"])
    rel = {(frozenset((f, g)), k) for f, g, k in p.relators if f != g}
    assert (frozenset({L("7"), L("7_1")}), 2) in rel
    assert (frozenset({L("3"), L("3_2")}), 2) in rel
    squares = [f for f, g, _ in p.relators if f == g]
    assert sorted(squares, key=lambda x: x.sort_key) == sorted(p.generators, key=lambda x: x.sort_key)
    pairs = [frozenset((f, g)) for f, g, _ in p.relators if f != g]
    assert len(pairs) == len(set(pairs))


def _fingerprint(rs):
    def graph(t):
        return sorted((str(u), str(v), str(lab)) for u, v, lab, _ in rs.graph(t))

    return (
        {t: rs.partition(t) for t in rs.state.compact_types},
        graph(3),
        graph(7),
        [adjacency_matrix_R(rs, t) for t in rs.state.compact_types],
    )


@pytest.mark.parametrize("name", BUILTIN)
def test_involution(states, gluings, reflectofolds, name):
    g = gluings[name]
    inv = facet_classes(states[g.base_index], g.inverted())
    assert _fingerprint(inv) == _fingerprint(reflectofolds[name])


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(["R_T", "R_half", "R_quarter"]), st.randoms(use_true_random=False))
def test_pairing_order_does_not_change_names(name, rnd):
    g = builtin_gluings()[name]
    order = list(g.pairings)
    rnd.shuffle(order)
    s = _p7()
    a = facet_classes(s, g)
    b = facet_classes(s, GluingScheme(g.name, g.base, tuple(order)))
    assert _fingerprint(a) == _fingerprint(b)
    assert a.facets(3) == b.facets(3)


_CACHE = {}


def _p7():
    if "p7" not in _CACHE:
        _CACHE["p7"] = canonical_sequence()[7]
    return _CACHE["p7"]
