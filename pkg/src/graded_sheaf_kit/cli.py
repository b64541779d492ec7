"""Command line front end: ``validate``, ``compute`` and ``check``.

Exit codes: 0 ok, 1 law or validation failure, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .algebra.groups import InfiniteSupport
from .derived.complexes import ComplexOfSheaves
from .derived.functors import derived_global_sections
from .duality import upper_shriek, verdier_dual
from .io import ParseError, Workspace, fixture_names, load_fixture, parse_file
from .sheaves.core import GradedSheaf, sections, stalk
from .sheaves.functors import pushforward_gr, shriek_pushforward_gr
from .suites import SUITES, run_suites

KINDS = ("sections", "stalk", "cohomology", "pushforward", "shriek", "dual", "upper-shriek")


class UsageError(Exception):
    pass


def _workspace(files, fixtures):
    ws = None
    sources = [parse_file(p) for p in files] + [load_fixture(n) for n in fixtures]
    if not sources:
        sources = [load_fixture(n) for n in fixture_names()]
    for w in sources:
        ws = w if ws is None else ws.merge(w)
    return ws


def _window(spec):
    if spec is None:
        return None
    try:
        r = int(spec)
    except ValueError:
        raise UsageError(f"--degree-window wants a radius, got {spec!r}") from None
    if r < 0:
        raise UsageError("--degree-window must be non-negative")
    return r


def _degree(d):
    return list(d)


def _rows_sheaf(table, n=None):
    rows = []
    for x, row in table.items():
        for d, k in row.items():
            r = {"point": str(x), "degree": _degree(d), "rank": k, "divisors": []}
            if n is not None:
                r = {"n": n, **r}
            rows.append(r)
    return rows


def _rows_complex(ctab):
    rows = []
    for n in sorted(ctab):
        rows += _rows_sheaf(ctab[n], n)
    return rows


def _rows_module(M, label):
    return [
        {"point": label, "degree": _degree(d), "rank": inv[0], "divisors": list(inv[1])}
        for d, inv in M.table().items()
    ]


def _as_complex(obj):
    return ComplexOfSheaves.single(obj) if isinstance(obj, GradedSheaf) else obj


def compute(ws: Workspace, kind, args, window=None, compact=False):
    """Rows ``(n?, point, degree, rank, divisors)`` for a computation."""

    def need(k):
        if len(args) != k:
            raise UsageError(f"compute {kind} takes {k} argument(s), got {len(args)}")

    def obj(name):
        if name in ws.complexes:
            return ws.complexes[name]
        return ws.sheaf(name)

    if kind == "sections":
        if not args:
            raise UsageError("compute sections SHEAF [POINT ...]")
        F = ws.sheaf(args[0])
        pts = args[1:] or list(F.points)
        U = F.space.poset.up_closure(pts)
        return _rows_module(sections(F, U, window), "{" + ",".join(sorted(map(str, U))) + "}")
    if kind == "stalk":
        need(2)
        F = ws.sheaf(args[0])
        if args[1] not in F.points:
            raise UsageError(f"unknown point {args[1]!r}")
        return _rows_module(stalk(F, args[1]), args[1])
    if kind == "cohomology":
        need(1)
        return _rows_complex(derived_global_sections(_as_complex(obj(args[0])), compact).cohomology_table())
    if kind in ("pushforward", "shriek"):
        need(2)
        f = ws.lookup(args[0], "maps")
        F = ws.sheaf(args[1])
        push = pushforward_gr if kind == "pushforward" else shriek_pushforward_gr
        return _rows_sheaf(push(f, F, window).table())
    if kind == "dual":
        need(1)
        return _rows_complex(verdier_dual(obj(args[0]), window=window).cohomology_table())
    if kind == "upper-shriek":
        need(2)
        f = ws.lookup(args[0], "maps")
        return _rows_complex(upper_shriek(f, obj(args[1]), window=window).cohomology_table())
    raise UsageError(f"unknown computation {kind!r}; choose from {', '.join(KINDS)}")


def _text_rows(rows):
    out = []
    for r in rows:
        head = f"H^{r['n']}  " if "n" in r else ""
        deg = "(" + ",".join(map(str, r["degree"])) + ")"
        div = f"  divisors {r['divisors']}" if r["divisors"] else ""
        out.append(f"{head}{r['point']}  {deg}  rank {r['rank']}{div}")
    return out or ["(zero)"]


# -- verbs ---------------------------------------------------------------------------
def cmd_validate(opts, out):
    diags, loaded = [], []
    targets = [("file", p) for p in opts.files] + [("fixture", n) for n in opts.fixture]
    if not targets:
        targets = [("fixture", n) for n in fixture_names()]
    for kind, name in targets:
        ws = parse_file(name) if kind == "file" else load_fixture(name)
        diags += ws.diagnostics
        loaded.append({"source": name, "names": sorted(ws.names())})
    if opts.json:
        out.write(json.dumps({"ok": not diags, "loaded": loaded, "diagnostics": diags}, indent=2) + "\n")
    else:
        for item in loaded:
            out.write(f"loaded {item['source']}: {', '.join(item['names'])}\n")
        for d in diags:
            out.write(f"error: {d}\n")
        out.write("ok\n" if not diags else f"{len(diags)} problem(s)\n")
    return 0 if not diags else 1


def cmd_compute(opts, out):
    ws = _workspace(opts.file, opts.fixture)
    if ws.diagnostics:
        for d in ws.diagnostics:
            out.write(f"error: {d}\n")
        return 1
    window = _window(opts.degree_window)
    try:
        rows = compute(ws, opts.kind, opts.args, window, opts.compact)
    except KeyError as e:
        raise UsageError(e.args[0]) from None
    except InfiniteSupport as e:
        msg = (f"infinite support: {e}. A graded pushforward over a torsion-free grading "
               "can have infinitely many nonzero degrees; rerun with --degree-window N "
               "to list the degrees of radius at most N.")
        if opts.json:
            out.write(json.dumps({"ok": False, "error": "InfiniteSupport", "message": msg}, indent=2) + "\n")
        else:
            out.write(f"error: {msg}\n")
        return 1
    if opts.json:
        out.write(json.dumps({"ok": True, "kind": opts.kind, "args": opts.args, "rows": rows}, indent=2) + "\n")
    else:
        out.write(f"{opts.kind} {' '.join(opts.args)}\n")
        for line in _text_rows(rows):
            out.write(f"  {line}\n")
    return 0


def cmd_check(opts, out):
    names = list(SUITES) if opts.suite == "all" else [opts.suite]
    results = run_suites(names, opts.seed, opts.count, fault=opts.inject_fault)
    ok = all(r.ok for r in results)
    if opts.json:
        body = {"ok": ok, "seed": opts.seed, "count": opts.count, "suites": [r.as_dict() for r in results]}
        out.write(json.dumps(body, indent=2) + "\n")
    else:
        for r in results:
            status = "PASS" if r.ok else "FAIL"
            out.write(f"{status} {r.suite}: {r.law}  passed {r.passed}, failed {r.failed}, skipped {r.skipped}\n")
            for f in r.failures:
                out.write(f"    instance {f['instance']}: {f['detail']}\n")
        out.write("all laws hold\n" if ok else "law failure\n")
    return 0 if ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="graded-sheaf-kit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    v = sub.add_parser("validate", help="parse description files and run the structural validators")
    v.add_argument("files", nargs="*")
    v.add_argument("--fixture", action="append", default=[], help="a shipped fixture by name")
    v.add_argument("--json", action="store_true")

    c = sub.add_parser("compute", help="run one computation and print invariant tables")
    c.add_argument("kind", choices=KINDS)
    c.add_argument("args", nargs="*")
    c.add_argument("-f", "--file", action="append", default=[], help="description file (repeatable)")
    c.add_argument("--fixture", action="append", default=[], help="a shipped fixture by name")
    c.add_argument("--degree-window", metavar="N", help="radius bounding free degree coordinates")
    c.add_argument("--compact", action="store_true", help="compactly supported cohomology")
    c.add_argument("--json", action="store_true")

    k = sub.add_parser("check", help="run seeded law suites")
    k.add_argument("suite", choices=list(SUITES) + ["all"])
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--count", type=int, default=25)
    k.add_argument("--inject-fault", action="store_true", help="corrupt one comparison per suite")
    k.add_argument("--json", action="store_true")
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        opts = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    verbs = {"validate": cmd_validate, "compute": cmd_compute, "check": cmd_check}
    try:
        return verbs[opts.verb](opts, out)
    except ParseError as e:
        sys.stderr.write(f"parse error: {e}\n")
        return 2
    except UsageError as e:
        sys.stderr.write(f"usage error: {e}\n")
        return 2
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
