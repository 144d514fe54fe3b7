"""Manifest-driven verification runs.

Every check samples its chart, evaluates a pointwise residual (a g-norm
unless noted in :data:`RESIDUAL_NOTES`), and aggregates max / RMS over the
samples.  A check with ``expect == "pass"`` passes when the max residual is
at most its tolerance; ``expect == "fail"`` checks pass when the *minimum*
residual exceeds their threshold, which is how counterexamples are kept in
the golden suite.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.stats import qmc

from . import fields as fld
from . import soliton as sol
from . import symexpr
from .geometry import Chart, ChartError, MetricJet, TensorValue, bianchi_residual, g_norm, metric_jet
from .manifest import Manifest, SamplingConfig, load_manifest
from .operators import (
    LIE_ROUTES,
    YANO_ROUTES,
    FieldDef,
    _lie_connection,
    _yano,
    as_oneform,
    as_vector,
    lie_connection_trace,
    tension_field,
    tension_field_identity,
)
from .symexpr import DomainError

__all__ = [
    "REPORT_FORMAT",
    "DEFAULT_TOLERANCES",
    "ResolutionError",
    "CheckReport",
    "sample_domain",
    "run_manifest",
    "report_dict",
    "report_json",
    "report_text",
]

REPORT_FORMAT = "chartgeom-report"
DEFAULT_TOLERANCE = 1e-8
DEFAULT_TOLERANCES = {
    "bianchi": 1e-6,
    "hamilton_identity": 1e-6,
    "classify": 0.5,
    "fd_metric": 1.0,
}
RESIDUAL_NOTES = {
    "trace_identity": "absolute value of a scalar",
    "scalar_curvature": "absolute value of a scalar",
    "classify": "0 when the class matches, 1 otherwise",
    "fd_metric": "worst |symbolic - central difference| / per-order bound",
    "ricci_sign": "amount by which Ric(xi, xi) has the wrong sign",
}
# tolerance overrides from the command line leave normalised residuals alone
_NORMALISED = ("classify", "fd_metric")


class ResolutionError(LookupError):
    """A check names a field, chart or parameter the manifest does not provide."""


@dataclass
class CheckReport:
    check_id: str
    kind: str
    subject: str | None
    status: str
    points: int
    max_residual: float | None
    rms_residual: float | None
    min_residual: float | None
    worst_point: list[float] | None
    tolerance: float
    expect: str = "pass"
    routes: dict | None = None
    diagnostics: dict | None = None
    error: dict | None = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "id": self.check_id,
            "kind": self.kind,
            "subject": self.subject,
            "status": self.status,
            "expect": self.expect,
            "points": self.points,
            "max_residual": self.max_residual,
            "rms_residual": self.rms_residual,
            "min_residual": self.min_residual,
            "worst_point": self.worst_point,
            "tolerance": self.tolerance,
            "routes": self.routes,
            "diagnostics": self.diagnostics,
            "error": self.error,
        }
        if include_timing:
            d["wall_time_s"] = self.wall_time
        return d


# ----------------------------------------------------------------------------
# sampling

def sample_domain(chart: Chart, config: SamplingConfig | None = None, *, count: int | None = None) -> np.ndarray:
    """Deterministic sample points inside the chart's box, shape ``(N, n)``.

    ``grid`` places points at cell centres of a regular grid (``counts`` per
    axis, or ``ceil(count ** (1/n))`` per axis); ``halton`` draws ``count``
    scrambled Halton points from ``seed``.
    """
    dom = chart.domain
    n = chart.dim
    lo = np.asarray(dom.lower)
    hi = np.asarray(dom.upper)
    if np.any(hi <= lo):
        raise ChartError(f"chart {chart.name!r}: empty sampling box {dom.lower} .. {dom.upper}")
    strategy = config.strategy if config is not None else dom.strategy
    seed = config.seed if config is not None else 0
    counts = config.counts if config is not None and count is None else None
    if count is None:
        count = config.count if config is not None else dom.count
    if count is not None and count < 1:
        raise ValueError("sample count must be positive")
    if strategy == "grid":
        if counts is None:
            per_axis = max(1, math.ceil(round(count ** (1.0 / n), 9)))
            counts = (per_axis,) * n
        if len(counts) != n or min(counts) < 1:
            raise ValueError(f"grid counts {counts} do not fit a {n}-dimensional chart")
        axes = [lo[a] + (np.arange(c) + 0.5) * (hi[a] - lo[a]) / c for a, c in enumerate(counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)
    if strategy == "halton":
        unit = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
        return lo + unit * (hi - lo)
    raise ValueError(f"unknown sampling strategy {strategy!r}")


# ----------------------------------------------------------------------------
# per-kind residuals

class _Context:
    def __init__(self, manifest: Manifest, sampling: SamplingConfig, samples: int | None):
        self.manifest = manifest
        self.sampling = sampling
        self.samples = samples
        self._jets: dict = {}

    def field(self, check: dict, kinds=None) -> FieldDef:
        name = check.get("field")
        if name is None:
            raise ResolutionError(f"check {check['id']!r} needs a 'field'")
        if name not in self.manifest.fields:
            raise ResolutionError(f"check {check['id']!r} refers to undefined field {name!r}")
        f = self.manifest.fields[name]
        if kinds is not None and f.kind not in kinds:
            raise ResolutionError(f"check {check['id']!r}: field {name!r} is a {f.kind}, expected one of {kinds}")
        return f

    def chart(self, check: dict) -> Chart:
        if "field" in check:
            return self.field(check).chart
        name = check.get("chart")
        if name is None:
            raise ResolutionError(f"check {check['id']!r} needs a 'chart' or 'field'")
        if name not in self.manifest.charts:
            raise ResolutionError(f"check {check['id']!r} refers to undefined chart {name!r}")
        return self.manifest.charts[name]

    def points(self, chart: Chart, check: dict) -> np.ndarray:
        count = self.samples if self.samples is not None else check.get("samples")
        cfg = self.sampling
        if cfg is None:
            cfg = SamplingConfig(chart.domain.strategy, chart.domain.count, None, 0)
        return sample_domain(chart, cfg, count=count)

    def jet(self, chart: Chart, pts: np.ndarray) -> MetricJet:
        key = (id(chart), pts.shape, pts.tobytes())
        if key not in self._jets:
            self._jets[key] = metric_jet(chart, pts, order=3)
        return self._jets[key]


def _param(check: dict, name: str) -> float:
    if name not in check:
        raise ResolutionError(f"check {check['id']!r} of kind {check['kind']!r} needs {name!r}")
    return float(check[name])


def _pairwise(arrays: dict, jet: MetricJet, sig) -> tuple[np.ndarray, dict]:
    worst = None
    stats = {}
    for a, b in combinations(arrays, 2):
        d = np.asarray(g_norm(TensorValue(sig, arrays[a] - arrays[b], jet.point), jet))
        stats[f"{a}-{b}"] = float(np.max(d))
        worst = d if worst is None else np.maximum(worst, d)
    return worst, stats


def _fd_metric_residual(chart: Chart, pts: np.ndarray):
    """Worst disc/tol ratio per sample; samples closer than the stencil reach to the boundary are skipped."""
    steps = symexpr.FD_STEPS
    dom = chart.domain
    reach = 2 * max(steps.values())
    pts = pts[dom.contains(pts, margin=reach)]
    if pts.shape[0] == 0:
        raise ChartError(f"chart {chart.name!r}: fd oracle needs samples at least {reach} inside the domain")
    n = chart.dim
    worst = np.zeros(pts.shape[0])
    for (i, j), e in chart.metric_upper.items():
        for a in range(n):
            for order in (1, 2, 3):
                disc = symexpr.fd_check(e, a, pts, order)
                tol = symexpr.fd_tolerance(e, a, pts, order)
                worst = np.maximum(worst, disc / tol)
            # mixed partials: first-order differences of lower symbolic derivatives
            for rest in [(b,) for b in range(n)] + [(b, c) for b in range(n) for c in range(b, n)]:
                base = symexpr.derivative(e, rest)
                disc = symexpr.fd_check(base, a, pts, 1)
                tol = symexpr.fd_tolerance(base, a, pts, 1)
                worst = np.maximum(worst, disc / tol)
    return pts, worst


def _evaluate(check: dict, ctx: _Context):
    """Return ``(subject, points, pointwise residual, routes, diagnostics)``."""
    kind = check["kind"]
    routes = None
    diag = None

    if kind == "classify":
        lam = _param(check, "lambda")
        expected = check.get("class")
        if expected is None:
            raise ResolutionError(f"check {check['id']!r} needs 'class'")
        got = sol.classify(lam).value
        return None, None, np.array([0.0 if got == expected else 1.0]), None, {"class": got, "lambda": lam}

    chart = ctx.chart(check)
    subject = check.get("field", chart.name)
    pts = ctx.points(chart, check)
    jet = ctx.jet(chart, pts)

    if kind in ("killing", "conformal", "holomorphic", "iht"):
        f = ctx.field(check, ("vector", "oneform", "scalar"))
        if kind == "holomorphic":
            chart.check_complex_structure(pts)
        func = {
            "killing": fld.killing_residual,
            "conformal": fld.conformal_residual,
            "holomorphic": fld.holomorphic_residual,
            "iht": fld.iht_residual,
        }[kind]
        r = func(jet, f)
        if kind == "iht":
            routes = {"direct": float(np.max(r.routes["direct"])),
                      "hodge-direct": float(np.max(r.routes["discrepancy"]))}
        return subject, pts, r.norm, routes, None

    if kind in ("soliton", "gradient_soliton"):
        lam = _param(check, "lambda")
        if kind == "soliton":
            spec = sol.SolitonSpec(ctx.field(check, ("vector", "oneform")), lam, "generic")
        else:
            spec = sol.SolitonSpec(ctx.field(check, ("scalar",)), lam, "gradient")
        diag = {"class": sol.classify(spec).value}
        return subject, pts, sol.soliton_residual(spec, jet).norm, None, diag

    if kind == "trace_identity":
        spec = sol.SolitonSpec(ctx.field(check, ("scalar",)), _param(check, "lambda"), "gradient")
        return subject, pts, sol.trace_identity_residual(spec, jet), None, None

    if kind == "hamilton_identity":
        spec = sol.SolitonSpec(ctx.field(check, ("scalar",)), float(check.get("lambda", 0.0)), "gradient")
        diag = {"schur_diagnostic_max": float(np.max(sol.schur_diagnostic(spec, jet)))}
        return subject, pts, sol.hamilton_identity_residual(spec, jet).norm, None, diag

    if kind == "bianchi":
        return subject, pts, np.asarray(bianchi_residual(jet)), None, None

    if kind == "yano_routes":
        th = as_oneform(ctx.field(check, ("vector", "oneform", "scalar")), jet)
        out = {r: _yano(th, jet, r) for r in YANO_ROUTES}
        resid, routes = _pairwise(out, jet, (0, 1))
        box = g_norm(TensorValue((0, 1), out["direct"], pts), jet)
        return subject, pts, resid, routes, {"box_max_norm": float(np.max(box))}

    if kind == "lie_routes":
        v = as_vector(ctx.field(check, ("vector", "oneform", "scalar")), jet)
        out = {r: _lie_connection(v, jet, r) for r in LIE_ROUTES}
        resid, routes = _pairwise(out, jet, (1, 2))
        return subject, pts, resid, routes, None

    if kind == "lie_trace":
        f = ctx.field(check, ("vector", "oneform", "scalar"))
        return subject, pts, np.asarray(g_norm(lie_connection_trace(jet, f), jet)), None, None

    if kind in ("tension", "tension_routes"):
        f = ctx.field(check, ("map",))
        tau, tjet = tension_field(f, pts, jet=jet)
        norm = np.asarray(g_norm(TensorValue((1, 0), tau.data, tjet.point), tjet))
        if kind == "tension":
            return subject, pts, norm, None, None
        if not f.is_identity_map():
            raise ResolutionError(f"check {check['id']!r}: tension_routes needs an identity map")
        ident, _ = tension_field_identity(f.chart, f.target, pts)
        diff = np.asarray(g_norm(TensorValue((1, 0), tau.data - ident.data, tjet.point), tjet))
        return subject, pts, diff, {"general-identity": float(np.max(diff))}, {"tension_max_norm": float(np.max(norm))}

    if kind == "scalar_curvature":
        return subject, pts, np.abs(jet.scalar - _param(check, "value")), None, None

    if kind == "einstein":
        c = _param(check, "constant")
        resid = TensorValue((0, 2), jet.ric - c * jet.g, pts)
        return subject, pts, np.asarray(g_norm(resid, jet)), None, None

    if kind == "flat":
        gam = np.asarray(g_norm(TensorValue((1, 2), jet.gamma, pts), jet))
        riem = np.asarray(g_norm(TensorValue((1, 3), jet.riem, pts), jet))
        return subject, pts, np.maximum(gam, riem), None, None

    if kind == "ricci_sign":
        f = ctx.field(check, ("vector", "oneform", "scalar"))
        sign = check.get("sign")
        if sign not in ("positive", "negative"):
            raise ResolutionError(f"check {check['id']!r} needs 'sign' positive or negative")
        q = sol.ricci_quadratic_form(jet, f)
        s = 1.0 if sign == "positive" else -1.0
        diag = {"ricci_form_min": float(np.min(q)), "ricci_form_max": float(np.max(q)),
                "strict_fraction": float(np.mean(s * q > 0))}
        return subject, pts, np.maximum(0.0, -s * q), None, diag

    if kind == "fd_metric":
        kept, ratio = _fd_metric_residual(chart, pts)
        return subject, kept, ratio, None, {"skipped_near_boundary": int(pts.shape[0] - kept.shape[0])}

    raise ResolutionError(f"unknown check kind {kind!r}")


def _run_check(check: dict, ctx: _Context, tolerance: float | None) -> CheckReport:
    kind = check["kind"]
    expect = check.get("expect", "pass")
    tol = check.get("tolerance", DEFAULT_TOLERANCES.get(kind, DEFAULT_TOLERANCE))
    if tolerance is not None and kind not in _NORMALISED:
        tol = tolerance
    tol = float(tol)
    start = time.perf_counter()
    try:
        subject, pts, resid, routes, diag = _evaluate(check, ctx)
    except ResolutionError as exc:
        err, subject = {"type": "resolution", "message": str(exc)}, check.get("field", check.get("chart"))
    except (DomainError, ChartError, FloatingPointError) as exc:
        err, subject = {"type": "domain", "message": str(exc)}, check.get("field", check.get("chart"))
    except (ValueError, np.linalg.LinAlgError) as exc:
        err, subject = {"type": "invalid", "message": str(exc)}, check.get("field", check.get("chart"))
    else:
        resid = np.asarray(resid, dtype=float).ravel()
        if not np.all(np.isfinite(resid)):
            err = {"type": "domain", "message": "non-finite residual"}
        else:
            elapsed = time.perf_counter() - start
            imax = int(np.argmax(resid))
            worst = None if pts is None else [float(v) for v in np.atleast_2d(pts)[imax]]
            mx, mn = float(resid[imax]), float(np.min(resid))
            if expect == "fail":
                threshold = float(check.get("threshold", tol))
                ok = mn > threshold
                tol = threshold
            else:
                ok = mx <= tol
            return CheckReport(
                check_id=check["id"], kind=kind, subject=subject,
                status="pass" if ok else "fail", points=int(resid.size),
                max_residual=mx, rms_residual=float(np.sqrt(np.mean(resid**2))), min_residual=mn,
                worst_point=worst, tolerance=tol, expect=expect, routes=routes, diagnostics=diag,
                wall_time=elapsed,
            )
    return CheckReport(
        check_id=check["id"], kind=kind, subject=subject, status="error", points=0,
        max_residual=None, rms_residual=None, min_residual=None, worst_point=None,
        tolerance=tol, expect=expect, error=err, wall_time=time.perf_counter() - start,
    )


def run_manifest(manifest, *, tolerance: float | None = None, samples: int | None = None,
                 seed: int | None = None, threads: int | None = None) -> list[CheckReport]:
    """Run every check of a manifest; failures and errors never stop the run.

    ``tolerance``, ``samples`` and ``seed`` override the manifest for all
    checks.  Reports come back in manifest order whatever ``threads`` is
    (default: ``CHARTGEOM_THREADS`` or 1).
    """
    if not isinstance(manifest, Manifest):
        manifest = load_manifest(manifest)
    sampling = manifest.sampling
    if seed is not None:
        sampling = SamplingConfig(sampling.strategy, sampling.count, sampling.counts, int(seed))
    ctx = _Context(manifest, sampling, samples)
    if threads is None:
        threads = int(os.environ.get("CHARTGEOM_THREADS", "1") or 1)
    if threads <= 1:
        return [_run_check(c, ctx, tolerance) for c in manifest.checks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: _run_check(c, ctx, tolerance), manifest.checks))


# ----------------------------------------------------------------------------
# report emission

def report_dict(reports: list[CheckReport], manifest: Manifest | None = None, *,
                include_timing: bool = False) -> dict:
    summary = {
        "total": len(reports),
        "passed": sum(r.status == "pass" for r in reports),
        "failed": sum(r.status == "fail" for r in reports),
        "errors": sum(r.status == "error" for r in reports),
    }
    return {
        "format": REPORT_FORMAT,
        "version": 1,
        "manifest": manifest.name if manifest is not None else None,
        "summary": summary,
        "checks": [r.to_dict(include_timing) for r in reports],
    }


def report_json(reports: list[CheckReport], manifest: Manifest | None = None, *,
                include_timing: bool = False) -> str:
    return json.dumps(report_dict(reports, manifest, include_timing=include_timing), indent=2, allow_nan=False) + "\n"


def _num(x) -> str:
    return "-" if x is None else json.dumps(x)


def report_text(reports: list[CheckReport], manifest: Manifest | None = None, *,
                include_timing: bool = False) -> str:
    """Human-readable rendering of :func:`report_dict`; numbers are printed exactly as in JSON."""
    data = report_dict(reports, manifest, include_timing=include_timing)
    lines = []
    if data["manifest"]:
        lines.append(f"manifest: {data['manifest']}")
    for c in data["checks"]:
        status = c["status"].upper()
        head = f"{status:5s} {c['id']}  [{c['kind']}] {c['subject'] or ''}".rstrip()
        lines.append(head)
        if c["error"]:
            lines.append(f"      error ({c['error']['type']}): {c['error']['message']}")
            continue
        bound = "threshold" if c["expect"] == "fail" else "tolerance"
        lines.append(
            f"      points={c['points']} max={_num(c['max_residual'])} rms={_num(c['rms_residual'])} "
            f"min={_num(c['min_residual'])} {bound}={_num(c['tolerance'])}"
        )
        if c["worst_point"] is not None:
            lines.append(f"      worst_point={_num(c['worst_point'])}")
        for key in ("routes", "diagnostics"):
            if c[key]:
                items = " ".join(f"{k}={_num(v)}" for k, v in c[key].items())
                lines.append(f"      {key}: {items}")
        if include_timing:
            lines.append(f"      wall_time_s={_num(c['wall_time_s'])}")
    s = data["summary"]
    lines.append(f"summary: {s['passed']}/{s['total']} passed, {s['failed']} failed, {s['errors']} errors")
    return "\n".join(lines) + "\n"
