"""Command-line front end: ``chartgeom check | catalog | curvature | selftest``.

Exit codes: 0 everything passed, 1 at least one check failed (or could not
be resolved), 2 usage / manifest error, 3 numeric domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import harness
from .catalog import catalog_entries, get_entry
from .geometry import ChartError, metric_jet
from .manifest import ManifestError, dump_manifest, load_manifest
from .symexpr import DomainError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _exit_code(reports) -> int:
    if any(r.status == "error" and r.error["type"] == "domain" for r in reports):
        return EXIT_DOMAIN
    if any(r.status != "pass" for r in reports):
        return EXIT_FAIL
    return EXIT_OK


def _emit(reports, manifest, fmt: str, timing: bool, out) -> None:
    render = harness.report_json if fmt == "json" else harness.report_text
    out.write(render(reports, manifest, include_timing=timing))


def _cmd_check(args) -> int:
    try:
        manifest = load_manifest(args.manifest)
    except ManifestError as exc:
        print(f"chartgeom: {exc}", file=sys.stderr)
        return EXIT_USAGE
    reports = harness.run_manifest(manifest, tolerance=args.tol, samples=args.samples, seed=args.seed)
    _emit(reports, manifest, args.format, args.timing, sys.stdout)
    for r in reports:
        if r.status == "error":
            print(f"chartgeom: check {r.check_id!r}: {r.error['type']} error: {r.error['message']}", file=sys.stderr)
    return _exit_code(reports)


def _cmd_catalog(args) -> int:
    if args.action == "list":
        for e in catalog_entries():
            print(f"{e.name:24s} {len(e.expectations):3d} checks  {e.description}")
        return EXIT_OK
    if args.entry is None or args.path is None:
        print("chartgeom: catalog export needs <entry> <path>", file=sys.stderr)
        return EXIT_USAGE
    try:
        entry = get_entry(args.entry)
    except KeyError as exc:
        print(f"chartgeom: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    dump_manifest(entry.export(), args.path)
    print(f"wrote {args.path}", file=sys.stderr)
    return EXIT_OK


def _resolve_chart(source: str, chart_name: str | None):
    path = Path(source)
    if path.suffix == ".json" or path.exists():
        charts = load_manifest(path).charts
    else:
        charts = get_entry(source).charts
    if chart_name is None:
        return next(iter(charts.values()))
    if chart_name not in charts:
        raise KeyError(f"no chart {chart_name!r}; available: {', '.join(charts)}")
    return charts[chart_name]


def _cmd_curvature(args) -> int:
    try:
        chart = _resolve_chart(args.source, args.chart)
        point = [float(v) for v in args.at.split(",")]
    except (KeyError, ManifestError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else str(exc)
        print(f"chartgeom: {msg}", file=sys.stderr)
        return EXIT_USAGE
    if len(point) != chart.dim:
        print(f"chartgeom: --at needs {chart.dim} coordinates for chart {chart.name!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        jet = metric_jet(chart, np.array(point), order=2)
        out = {
            "chart": chart.name,
            "coords": list(chart.coords),
            "point": point,
            "metric": jet.g.tolist(),
            "christoffel": jet.gamma.tolist(),
            "ricci": jet.ric.tolist(),
            "scalar_curvature": float(jet.scalar),
        }
    except (DomainError, ChartError, np.linalg.LinAlgError) as exc:
        print(f"chartgeom: numeric error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.format == "json":
        print(json.dumps(out, indent=2))
        return EXIT_OK
    c = chart.coords
    print(f"chart {chart.name} at {dict(zip(c, point))}")
    print("Christoffel symbols Gamma^k_ij (nonzero):")
    for (k, i, j), v in np.ndenumerate(jet.gamma):
        if i <= j and v != 0.0:
            print(f"  Gamma^{c[k]}_{c[i]}{c[j]} = {float(v)!r}")
    print("Ricci tensor:")
    for row in jet.ric:
        print("  " + "  ".join(f"{v: .12g}" for v in row))
    print(f"scalar curvature s = {float(jet.scalar)!r}")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    start = time.perf_counter()
    worst = EXIT_OK
    total = failed = 0
    for entry in catalog_entries():
        reports = harness.run_manifest(entry.manifest)
        code = _exit_code(reports)
        worst = max(worst, code)
        total += len(reports)
        bad = [r for r in reports if r.status != "pass"]
        failed += len(bad)
        print(f"{'ok  ' if not bad else 'FAIL'} {entry.name:24s} {len(reports) - len(bad)}/{len(reports)}")
        for r in bad:
            detail = r.error["message"] if r.error else f"max={r.max_residual!r} tol={r.tolerance!r}"
            print(f"     {r.check_id}: {r.status} ({detail})")
    elapsed = time.perf_counter() - start
    print(f"selftest: {total - failed}/{total} checks passed in {elapsed:.1f} s")
    return worst


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chartgeom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="run the checks of a manifest file")
    c.add_argument("manifest")
    c.add_argument("--tol", type=float, help="override every check's tolerance")
    c.add_argument("--samples", type=int, help="override the sample count of every check")
    c.add_argument("--seed", type=int, help="seed for quasi-random sampling")
    c.add_argument("--format", choices=("json", "text"), default="json")
    c.add_argument("--timing", action="store_true", help="include wall times (makes output non-reproducible)")
    c.set_defaults(func=_cmd_check)

    k = sub.add_parser("catalog", help="list or export built-in entries")
    k.add_argument("action", choices=("list", "export"))
    k.add_argument("entry", nargs="?")
    k.add_argument("path", nargs="?")
    k.set_defaults(func=_cmd_catalog)

    v = sub.add_parser("curvature", help="print Christoffel symbols, Ricci tensor and scalar curvature at a point")
    v.add_argument("source", help="catalog entry name or manifest path")
    v.add_argument("--chart", help="chart name (default: the first chart)")
    v.add_argument("--at", required=True, help="comma-separated coordinates, e.g. 0.1,0.2")
    v.add_argument("--format", choices=("json", "text"), default="text")
    v.set_defaults(func=_cmd_curvature)

    s = sub.add_parser("selftest", help="run every catalog entry's expectations")
    s.set_defaults(func=_cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "samples", None) is not None and args.samples < 1:
        print("chartgeom: --samples must be positive", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "tol", None) is not None and not args.tol > 0:
        print("chartgeom: --tol must be positive", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
