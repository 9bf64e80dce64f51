"""Command line interface.

Exit codes: 0 success, 1 verification mismatch, 2 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources

from .coxeter import DIAGRAM_D, DiagramSyntaxError, check_seed_conditions, parse_diagram
from .doubling import adjacency_matrix, canonical_sequence, state_picture
from .flatmfd import GroupError, cusp_report
from .golden import SCHEME_OF_TABLE, SCHEME_TABLES, STATE_TABLES, GoldenError, load_golden
from .labels import FacetLabel, LabelSyntaxError
from .pipeline import run_pipeline, table_diff
from .reflectofold import (
    SchemeError,
    adjacency_matrix_R,
    builtin_gluings,
    check_developability,
    coxeter_presentation,
    facet_classes,
    parse_scheme,
    validate_gluing,
)
from .svg import render_svg, svg_filename

OK, MISMATCH, USAGE = 0, 1, 2
HOOK_ENV = "REFLECTOFOLD_TEST_HOOKS"


class UsageError(Exception):
    pass


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _outdir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create {path}: {exc.strerror}") from None
    if not os.access(path, os.W_OK):
        raise UsageError(f"{path} is not writable")
    return path


def _load_seed(path: str | None):
    if path is None:
        return DIAGRAM_D
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_diagram(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except DiagramSyntaxError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _golden(args):
    golden = load_golden()
    for item in args.mutate or ():
        if os.environ.get(HOOK_ENV) != "1":
            raise UsageError(f"--mutate needs {HOOK_ENV}=1")
        try:
            where, value = item.split("=")
            tid, t, i, j = where.split(":")
            golden = golden.with_entry(tid, int(t), int(i), int(j), int(value))
        except (ValueError, IndexError, GoldenError) as exc:
            raise UsageError(f"bad --mutate {item!r}: {exc}") from None
    return golden


# ---------------------------------------------------------------- commands


def cmd_seed(args) -> int:
    report = check_seed_conditions(_load_seed(args.seed_file))
    sys.stdout.write(report.dumps() + "\n" if args.json else report.to_text())
    return OK if report.passed else MISMATCH


def cmd_pipeline(args) -> int:
    report = run_pipeline(_golden(args), _load_seed(args.seed_file))
    sys.stdout.write(_dump(report.to_json()) if args.json else report.to_text())
    if args.outdir:
        _write(os.path.join(_outdir(args.outdir), "pipeline.json"), _dump(report.to_json()))
    return OK if report.success else MISMATCH


def _computed_tables(selector: str) -> list:
    if selector == "all":
        ids = list(STATE_TABLES) + list(SCHEME_TABLES)
    elif selector in STATE_TABLES or selector in SCHEME_TABLES:
        ids = [selector]
    else:
        raise UsageError(f"unknown table {selector!r}; expected t0..t8, tr1..tr4 or all")
    states = canonical_sequence()
    gluings = builtin_gluings()
    out = []
    for tid in ids:
        if tid in STATE_TABLES:
            s = states[int(tid[1:])]
            for t in s.compact_types:
                out.append((tid, t, adjacency_matrix(s, t)))
        else:
            g = gluings[SCHEME_OF_TABLE[tid]]
            rs = facet_classes(states[g.base_index], g)
            for t in rs.state.compact_types:
                out.append((tid, t, adjacency_matrix_R(rs, t)))
    return out


def cmd_tables(args) -> int:
    tables = _computed_tables(args.selector)
    golden = _golden(args) if args.diff else None
    outdir = _outdir(args.outdir) if args.outdir else None
    status = OK
    for tid, t, m in tables:
        if outdir:
            _write(os.path.join(outdir, f"{tid}_type{t}.csv"), m.to_csv())
            _write(os.path.join(outdir, f"{tid}_type{t}.txt"), m.to_text())
        sys.stdout.write(f"== {tid} type {t} ({m.size}x{m.size})\n")
        if not outdir:
            sys.stdout.write(m.to_text())
        if golden is not None:
            d = table_diff(golden, tid, t, m)
            total = len(d["known_errata"]) + len(d["unexpected"])
            for line in d["unexpected"]:
                sys.stdout.write(f"  {line}\n")
            for line in d["known_errata"]:
                sys.stdout.write(f"  {line} [known erratum]\n")
            sys.stdout.write(f"{total} differences ({len(d['known_errata'])} known errata)\n")
            if d["unexpected"]:
                status = MISMATCH
    return status


def cmd_svg(args) -> int:
    sel = args.selector
    name, _, facet = sel.partition(":")
    if len(name) != 2 or name[0] != "P" or not name[1].isdigit():
        raise UsageError(f"bad selector {sel!r}; expected Pn or Pn:facet")
    n = int(name[1])
    if n > 8:
        raise UsageError(f"P{n} does not exist; the sequence ends at P8")
    s = canonical_sequence()[n]
    if facet:
        try:
            label = FacetLabel.parse(facet)
        except LabelSyntaxError as exc:
            raise UsageError(str(exc)) from None
        if label not in s.i3.facet_by_label:
            raise UsageError(f"{facet} is not a non-compact facet of P{n}")
        labels = [label]
    else:
        labels = [f.label for f in s.i3.facets]
    outdir = _outdir(args.outdir)
    for lab in labels:
        path = os.path.join(outdir, svg_filename(n, lab))
        _write(path, render_svg(state_picture(s, lab), f"facet {lab} of L{n}"))
        sys.stdout.write(path + "\n")
    return OK


def _load_scheme(ref: str):
    gluings = builtin_gluings()
    if ref in gluings:
        return gluings[ref]
    packaged = resources.files("reflectofold") / "schemes" / f"{ref}.json"
    if not os.path.exists(ref) and packaged.is_file():
        return parse_scheme(packaged.read_text(encoding="utf-8"), ref)
    try:
        with open(ref, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read scheme {ref!r}: {exc.strerror}") from None
    try:
        return parse_scheme(text, os.path.basename(ref))
    except SchemeError as exc:
        raise UsageError(f"{ref}: {exc}") from None


def cmd_classify(args) -> int:
    g = _load_scheme(args.scheme)
    if not 0 <= g.base_index <= 8:
        raise UsageError(f"base {g.base} out of range")
    s = canonical_sequence()[g.base_index]
    try:
        report = validate_gluing(s, g)
    except SchemeError as exc:
        raise UsageError(str(exc)) from None
    doc = {"scheme": g.to_json(), "validation": report.to_json()}
    status = OK if report.valid else MISMATCH
    if report.geometry_ok:
        rs = facet_classes(s, g)
        dev = check_developability(rs)
        doc["classes"] = {
            str(t): [[str(x) for x in m] for m in rs.classes[t]] for t in s.compact_types
        }
        doc["corners"] = [
            {"type": c.type, "facets": [str(c.a), str(c.b)], "angle": str(c.angle) + "π"} for c in rs.corners
        ]
        doc["developability"] = dev.to_json()
        if dev.developable:
            doc["coxeter_presentation"] = coxeter_presentation(rs).to_json()
        else:
            status = MISMATCH
    if report.valid:
        try:
            doc["cusp"] = cusp_report(s, g).to_json()
        except GroupError as exc:
            doc["cusp"] = {"error": str(exc)}
            status = MISMATCH
    if args.json:
        sys.stdout.write(_dump(doc))
    else:
        sys.stdout.write(_classify_text(doc))
    return status


def _classify_text(doc) -> str:
    v = doc["validation"]
    lines = [f"scheme {doc['scheme']['name']} on {doc['scheme']['base']}"]
    lines.append(f"gluing valid: {v['valid']}")
    lines.extend(f"  {x}" for x in v["violations"])
    if "developability" in doc:
        d = doc["developability"]
        lines.append(f"developable: {d['developable']}")
        lines.extend(f"  {x}" for x in d["violations"])
        if "coxeter_presentation" in doc:
            p = doc["coxeter_presentation"]
            lines.append(f"G_R: {len(p['generators'])} generators, {len(p['relators'])} relators")
    if "cusp" in doc:
        c = doc["cusp"]
        if "error" in c:
            lines.append(f"cusp: {c['error']}")
        else:
            lines.append(
                f"cusp section: {c['classification']} (point group {c['point_group']}, "
                f"torsion-free {c['torsion_free']}, orientable {c['orientation_preserving']})"
            )
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="reflectofold", description="Doubled Coxeter polytopes and their reflectofolds.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("seed", help="check the seed conditions of a diagram")
    q.add_argument("--seed-file", help="diagram file (default: the built-in diagram D)")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_seed)

    q = sub.add_parser("pipeline", help="run everything and diff against the reference tables")
    q.add_argument("--json", action="store_true")
    q.add_argument("--outdir")
    q.add_argument("--seed-file")
    q.add_argument("--mutate", action="append", help=argparse.SUPPRESS)
    q.set_defaults(func=cmd_pipeline)

    q = sub.add_parser("tables", help="emit adjacency matrices")
    q.add_argument("selector", help="t0..t8, tr1..tr4 or all")
    q.add_argument("--diff", action="store_true", help="compare with the reference tables")
    q.add_argument("--outdir", help="write CSV and text files here")
    q.add_argument("--mutate", action="append", help=argparse.SUPPRESS)
    q.set_defaults(func=cmd_tables)

    q = sub.add_parser("svg", help="write face pictures as SVG")
    q.add_argument("selector", help="Pn for all facets of L_n, or Pn:facet")
    q.add_argument("--outdir", default=".")
    q.set_defaults(func=cmd_svg)

    q = sub.add_parser("classify", help="analyse one gluing scheme")
    q.add_argument("scheme", help="builtin name (R_T, R_half, R_quarter, R_HW, p1_naive_torus) or JSON file")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_classify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GoldenError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE


if __name__ == "__main__":
    raise SystemExit(main())
