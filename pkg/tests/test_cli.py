import json
import os
import subprocess
import sys

import pytest

from reflectofold.cli import HOOK_ENV, main
from reflectofold.coxeter import diagram_file_text


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def cli(*argv, env=None):
    full = dict(os.environ, **(env or {}))
    return subprocess.run(
        [sys.executable, "-m", "reflectofold", *argv], capture_output=True, text=True, env=full
    )


def test_seed(capsys):
    code, out, _ = run(capsys, "seed", "--json")
    assert code == 0
    assert json.loads(out)


def test_seed_file_failing(tmp_path, capsys):
    f = tmp_path / "odd.cox"
    f.write_text(diagram_file_text().replace("edge 3 2 4", "edge 3 2 5"))
    code, _, _ = run(capsys, "seed", "--seed-file", str(f))
    assert code == 1


def test_seed_file_errors(tmp_path, capsys):
    f = tmp_path / "bad.cox"
    f.write_text("nodes: 7\nedge 1 9 4\n")
    assert run(capsys, "seed", "--seed-file", str(f))[0] == 2
    assert run(capsys, "seed", "--seed-file", str(tmp_path / "missing"))[0] == 2


def test_pipeline_ok(capsys):
    code, out, _ = run(capsys, "pipeline")
    assert code == 0
    for name in ("E1", "E2", "E4", "E6"):
        assert f"cusp {name}" in out
    assert out.rstrip().endswith("OK")


def test_pipeline_json_shape(capsys, tmp_path):
    code, out, _ = run(capsys, "pipeline", "--json", "--outdir", str(tmp_path))
    doc = json.loads(out)
    assert code == 0 and doc["success"]
    assert len(doc["states"]) == 9 and len(doc["schemes"]) == 4
    assert (tmp_path / "pipeline.json").read_text() == out


def test_pipeline_alternative_seed_stops(tmp_path, capsys):
    f = tmp_path / "two.cox"
    f.write_text("nodes: 2\nedge 1 2 inf\n")
    code, out, _ = run(capsys, "pipeline", "--seed-file", str(f))
    assert "P0" in out
    f.write_text(diagram_file_text().replace("edge 3 2 4", "edge 3 2 5"))
    code, out, _ = run(capsys, "pipeline", "--seed-file", str(f))
    assert code == 1 and "stopping" in out


def test_mutate_hook(monkeypatch, capsys):
    monkeypatch.setenv(HOOK_ENV, "1")
    code, out, _ = run(capsys, "pipeline", "--mutate", "t7:3:0:1=3")
    assert code == 1
    assert "FAILED: t7.3" in out


def test_mutate_needs_hook(monkeypatch, capsys):
    monkeypatch.delenv(HOOK_ENV, raising=False)
    assert run(capsys, "pipeline", "--mutate", "t7:3:0:1=3")[0] == 2


def test_mutate_bad_argument(monkeypatch, capsys):
    monkeypatch.setenv(HOOK_ENV, "1")
    assert run(capsys, "pipeline", "--mutate", "t7:3:0=3")[0] == 2
    assert run(capsys, "pipeline", "--mutate", "t9:3:0:1=3")[0] == 2


def test_tables(capsys):
    code, out, _ = run(capsys, "tables", "t2")
    assert code == 0
    assert "== t2 type 3 (2x2)" in out


def test_tables_diff(capsys):
    code, out, _ = run(capsys, "tables", "tr1", "--diff")
    assert code == 0
    assert out.count("0 differences (0 known errata)") == 2


def test_tables_diff_reports_errata(capsys):
    code, out, _ = run(capsys, "tables", "t8", "--diff")
    assert code == 0
    assert "[known erratum]" in out


def test_tables_outdir(tmp_path, capsys):
    code, _, _ = run(capsys, "tables", "all", "--outdir", str(tmp_path))
    assert code == 0
    assert len(list(tmp_path.glob("*.csv"))) == 26
    assert (tmp_path / "t2_type3.csv").read_text().splitlines()[1:] == ["3,1,2", "3_2,2,1"]


def test_tables_unknown(capsys):
    assert run(capsys, "tables", "t9")[0] == 2


def test_svg_counts(tmp_path, capsys):
    code, out, _ = run(capsys, "svg", "P1", "--outdir", str(tmp_path / "p1"))
    assert code == 0 and len(out.split()) == 6
    run(capsys, "svg", "P0", "--outdir", str(tmp_path / "p0"))
    files = sorted((tmp_path / "p0").iterdir())
    assert len(files) == 5
    polygons = [f.read_text().count('stroke="#888"') for f in files]
    assert sorted(polygons) == [1] * 5


def test_svg_single_face(tmp_path, capsys):
    code, out, _ = run(capsys, "svg", "P2:1_2", "--outdir", str(tmp_path))
    assert code == 0
    text = (tmp_path / "P2_1_2.svg").read_text()
    assert ">3_2</text>" in text and ">7</text>" in text


def test_svg_is_byte_stable(tmp_path, capsys):
    run(capsys, "svg", "P8", "--outdir", str(tmp_path / "a"))
    run(capsys, "svg", "P8", "--outdir", str(tmp_path / "b"))
    a = {f.name: f.read_bytes() for f in (tmp_path / "a").iterdir()}
    b = {f.name: f.read_bytes() for f in (tmp_path / "b").iterdir()}
    assert a == b and len(a) == 6


@pytest.mark.parametrize("sel", ["Q1", "P9", "P1:3", "P1:6_{", "P12"])
def test_svg_errors(sel, tmp_path, capsys):
    assert run(capsys, "svg", sel, "--outdir", str(tmp_path))[0] == 2


def test_classify_quarter(capsys):
    code, out, _ = run(capsys, "classify", "R_quarter")
    assert code == 0
    assert "developable: True" in out and "E4" in out


def test_classify_hw_json(capsys):
    code, out, _ = run(capsys, "classify", "R_HW", "--json")
    doc = json.loads(out)
    assert code == 0
    assert doc["cusp"]["classification"] == "E6"
    assert doc["cusp"]["orientation_preserving"] is True
    assert doc["developability"]["developable"] is True


def test_classify_naive_torus(capsys):
    code, out, _ = run(capsys, "classify", "p1_naive_torus")
    assert code == 1
    assert "developable: False" in out
    assert "3/4π" in out and "EF" in out


def test_classify_file(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text('{"base": "P7", "pairings": [{"source": {"facet": "6"}}]}')
    assert run(capsys, "classify", str(f))[0] == 2
    assert run(capsys, "classify", str(tmp_path / "none.json"))[0] == 2


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as err:
        main(["nonsense"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2


def test_console_entry_point():
    r = cli("tables", "t2")
    assert r.returncode == 0 and "[[" not in r.stdout


def test_mutate_subprocess():
    r = cli("pipeline", "--mutate", "t7:3:0:1=3", env={HOOK_ENV: "1"})
    assert r.returncode == 1
    r = cli("pipeline", "--mutate", "t7:3:0:1=3", env={HOOK_ENV: "0"})
    assert r.returncode == 2
