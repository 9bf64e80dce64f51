import json
from importlib import resources

import pytest

from reflectofold.doubling import adjacency_matrix
from reflectofold.golden import ENV_VAR, GoldenError, checksum, load_golden
from reflectofold.labels import L
from reflectofold.reflectofold import adjacency_matrix_R

SCHEME_OF = {"tr1": "R_T", "tr2": "R_half", "tr3": "R_quarter", "tr4": "R_HW"}


def packaged(name):
    return json.loads((resources.files("reflectofold") / "data" / name).read_text(encoding="utf-8"))


def write(path, doc):
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def test_packaged_loads(golden):
    assert golden.sha256 == checksum(packaged("golden.json"))
    assert len(golden.tables) == 9 * 2 + 4 * 2
    assert golden.table("t2", 3).cells == ((1, 2), (2, 1))
    assert len(golden.i1["P8"]) == 67


def test_unknown_table(golden):
    with pytest.raises(GoldenError):
        golden.table("t9", 3)


def test_tampered_file_rejected(tmp_path):
    doc = packaged("golden.json")
    doc["tables"]["t2"]["3"]["matrix"][0][1] = 3
    with pytest.raises(GoldenError, match="checksum"):
        load_golden(write(tmp_path / "g.json", doc))


def test_env_override(tmp_path, monkeypatch):
    doc = packaged("golden.json")
    doc["i1"]["P0"] = list(reversed(doc["i1"]["P0"]))
    doc["sha256"] = checksum(doc)
    monkeypatch.setenv(ENV_VAR, write(tmp_path / "g.json", doc))
    g = load_golden()
    assert g.source.endswith("g.json")
    assert g.i1["P0"][0] == L("7")


def test_asymmetry_needs_an_erratum(tmp_path):
    with pytest.raises(GoldenError, match="asymmetric"):
        load_golden(errata_path=write(tmp_path / "e.json", []))


@pytest.mark.parametrize(
    "edit, fragment",
    [
        (lambda d: d["tables"]["t2"]["3"]["matrix"][0].__setitem__(0, 2), "diagonal"),
        (lambda d: d["tables"]["t2"]["3"]["rows"].__setitem__(1, "3_{"), "t2.3"),
        (lambda d: d["tables"]["t2"]["3"]["matrix"].pop(), "not 2x2"),
        (lambda d: d["tables"]["t2"]["3"]["rows"].__setitem__(1, "3"), "duplicate"),
    ],
)
def test_validation(tmp_path, edit, fragment):
    doc = packaged("golden.json")
    edit(doc)
    doc["sha256"] = checksum(doc)
    with pytest.raises(GoldenError, match=fragment):
        load_golden(write(tmp_path / "g.json", doc))


def test_bad_errata_kind(tmp_path):
    with pytest.raises(GoldenError):
        load_golden(errata_path=write(tmp_path / "e.json", [{"kind": "row"}]))


def test_with_entry(golden):
    g = golden.with_entry("t7", 3, 0, 1, 3)
    assert g.table("t7", 3).cells[0][1] == 3
    assert golden.table("t7", 3).cells[0][1] != 3


def test_errata_are_consistent(golden, states, reflectofolds):
    """Each cell erratum names the printed value and the value computed here."""
    for e in golden.errata:
        if e.kind == "i1":
            assert L(e.printed) in golden.i1[e.where]
            assert L(e.printed) not in states[int(e.where[1:])].i1
            continue
        printed = golden.table(e.where, e.type).entry(e.row, e.col)
        assert printed == e.printed
        if e.where in SCHEME_OF:
            actual = adjacency_matrix_R(reflectofolds[SCHEME_OF[e.where]], e.type)
        else:
            actual = adjacency_matrix(states[int(e.where[1:])], e.type)
        assert actual.entry(e.row, e.col) == e.corrected
        assert e.evidence
