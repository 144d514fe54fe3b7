from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from chartgeom.catalog import get_entry
from chartgeom.geometry import ChartError
from chartgeom.harness import report_dict, report_json, report_text, run_manifest, sample_domain
from chartgeom.manifest import ManifestError, SamplingConfig, load_manifest

from conftest import make_chart

DATA = Path(__file__).parent / "data"


def report_schema():
    return json.loads(resources.files("chartgeom").joinpath("schemas/report-v1.schema.json").read_text())


def minimal(checks, fields=None, metric="1"):
    return {
        "format": "chartgeom-manifest",
        "version": 1,
        "name": "t",
        "charts": [{"name": "c", "coords": ["x", "y"], "metric": [[metric, "0"], ["0", metric]],
                    "domain": {"lower": [-1, -1], "upper": [1, 1]}}],
        "fields": fields or [{"name": "v", "chart": "c", "kind": "vector", "components": ["x", "y"]}],
        "checks": checks,
    }


# --- sampling ---------------------------------------------------------------------------------------

def test_grid_is_cell_centres():
    chart = make_chart("1", lower=(0, 0), upper=(1, 1))
    pts = sample_domain(chart, SamplingConfig("grid", 9))
    assert pts.shape == (9, 2)
    assert sorted(set(pts[:, 0].round(12))) == pytest.approx([1 / 6, 1 / 2, 5 / 6])
    counts = sample_domain(chart, SamplingConfig("grid", 1, counts=(3, 2)))
    assert counts.shape == (6, 2)


def test_halton_is_deterministic():
    chart = make_chart("1")
    a = sample_domain(chart, SamplingConfig("halton", 100, seed=42))
    b = sample_domain(chart, SamplingConfig("halton", 100, seed=42))
    c = sample_domain(chart, SamplingConfig("halton", 100, seed=43))
    assert a.shape == (100, 2) and np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.all(chart.domain.contains(a))


def test_degenerate_box_and_zero_samples():
    with pytest.raises(ChartError):
        sample_domain(make_chart("1", lower=(0, 0), upper=(0, 1)))
    with pytest.raises(ValueError):
        sample_domain(make_chart("1"), count=0)
    with pytest.raises(ValueError):
        sample_domain(make_chart("1"), SamplingConfig("sobol", 10))


# --- runs ----------------------------------------------------------------------------------------------

def test_gaussian_shrinker_manifest_passes_exactly():
    reports = run_manifest(get_entry("gaussian-shrinker").export())
    assert all(r.status == "pass" for r in reports)
    by_id = {r.check_id: r for r in reports}
    assert by_id["soliton"].max_residual < 1e-12
    assert by_id["gradient-soliton"].max_residual < 1e-12


def test_failing_killing_manifest():
    reports = run_manifest(load_manifest(DATA / "failing_killing.json"))
    r = reports[0]
    assert r.status == "fail" and r.points == 100
    assert abs(r.max_residual - np.sqrt(8)) < 1e-12
    assert abs(r.min_residual - np.sqrt(8)) < 1e-12
    assert abs(r.rms_residual - np.sqrt(8)) < 1e-12
    assert reports[1].status == "pass"


def test_undefined_field_is_a_per_check_error():
    m = minimal([
        {"id": "a", "kind": "killing", "field": "nope"},
        {"id": "b", "kind": "conformal", "field": "v"},
        {"id": "c", "kind": "scalar_curvature", "chart": "missing", "value": 0},
        {"id": "d", "kind": "soliton", "field": "v"},
    ])
    reports = run_manifest(m)
    assert [r.status for r in reports] == ["error", "pass", "error", "error"]
    assert reports[0].error["type"] == "resolution" and "nope" in reports[0].error["message"]
    assert "lambda" in reports[3].error["message"]


def test_domain_error_is_reported():
    m = minimal([{"id": "a", "kind": "scalar_curvature", "chart": "c", "value": 0}], metric="1/x")
    m["charts"][0]["domain"] = {"lower": [-1, -1], "upper": [1, 1], "count": 4}
    m["sampling"] = {"counts": [3, 3]}
    (r,) = run_manifest(m)
    assert r.status == "error" and r.error["type"] == "domain"


def test_wrong_field_kind_is_resolution_error():
    m = minimal([{"id": "a", "kind": "gradient_soliton", "field": "v", "lambda": 0}])
    (r,) = run_manifest(m)
    assert r.status == "error" and r.error["type"] == "resolution"


@pytest.mark.parametrize("mutate, match", [
    (lambda m: m.update(version=2), "version"),
    (lambda m: m.update(format="other"), "format"),
    (lambda m: m["checks"][0].update(tolerance=0), "tolerance"),
    (lambda m: m["checks"][0].update(kind="magic"), "kind"),
    (lambda m: m["charts"][0].update(metric=[["1", "x"], ["y", "1"]]), "differs"),
    (lambda m: m["fields"][0].update(components=["q", "y"]), "q"),
    (lambda m: m["fields"][0].update(chart="zzz"), "zzz"),
    (lambda m: m["checks"].append(dict(m["checks"][0])), "unique"),
])
def test_malformed_manifest_rejected_wholesale(mutate, match):
    m = minimal([{"id": "a", "kind": "killing", "field": "v"}])
    mutate(m)
    with pytest.raises(ManifestError, match=match):
        load_manifest(m)


def test_missing_manifest_file(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ManifestError, match="JSON"):
        load_manifest(bad)


def test_expected_fail_semantics():
    m = minimal([
        {"id": "a", "kind": "killing", "field": "v", "expect": "fail", "threshold": 1.0},
        {"id": "b", "kind": "killing", "field": "v", "expect": "fail", "threshold": 5.0},
    ])
    a, b = run_manifest(m)
    assert a.status == "pass" and b.status == "fail"


def test_overrides():
    m = minimal([{"id": "a", "kind": "killing", "field": "v"}])
    (r,) = run_manifest(m, samples=7, tolerance=3.0)
    assert r.points == 9 and r.status == "pass" and r.tolerance == 3.0
    m["sampling"] = {"strategy": "halton", "count": 5, "seed": 1}
    (r1,) = run_manifest(m)
    (r2,) = run_manifest(m, seed=2)
    assert r1.points == 5 and r1.worst_point != r2.worst_point


def test_catalog_exercises_every_check_kind():
    from chartgeom.catalog import catalog_entries
    from chartgeom.manifest import CHECK_KINDS

    kinds = {c["kind"] for e in catalog_entries() for c in e.expectations}
    assert kinds == set(CHECK_KINDS)


# --- reports -----------------------------------------------------------------------------------------------

def test_report_contract():
    entry = get_entry("round-sphere-S2")
    reports = run_manifest(entry.manifest)
    data = report_dict(reports, entry.manifest)
    jsonschema.validate(data, report_schema())
    for r in reports:
        assert r.points >= 1
        if r.expect == "pass":
            assert (r.status == "pass") == (r.max_residual <= r.tolerance)
    yano = next(r for r in reports if r.kind == "yano_routes")
    assert set(yano.routes) == {"direct-hodge", "direct-bochner", "hodge-bochner"}


def test_report_is_deterministic_and_threads_do_not_matter():
    m = get_entry("cigar").export()
    a = report_json(run_manifest(m, seed=3))
    b = report_json(run_manifest(copy.deepcopy(m), seed=3))
    c = report_json(run_manifest(m, seed=3, threads=4))
    assert a == b == c
    assert "wall_time" not in a
    assert "wall_time_s" in report_json(run_manifest(m), include_timing=True)


def test_text_and_json_share_numbers():
    m = load_manifest(DATA / "failing_killing.json")
    reports = run_manifest(m)
    data = json.loads(report_json(reports, m))
    text = report_text(reports, m)
    for c in data["checks"]:
        for key in ("max_residual", "rms_residual", "min_residual", "tolerance"):
            assert f"{json.dumps(c[key])}" in text
    assert "FAIL  dilation-killing" in text


def test_fd_metric_skips_samples_near_the_boundary():
    m = minimal([{"id": "fd", "kind": "fd_metric", "chart": "c"}], metric="1 + x^2*y^2")
    m["sampling"] = {"strategy": "halton", "count": 64, "seed": 3}
    (r,) = run_manifest(m)
    assert r.status == "pass"
    assert r.points + r.diagnostics["skipped_near_boundary"] == 64
    m["charts"][0]["domain"] = {"lower": [0, 0], "upper": [0.03, 0.03]}
    (r,) = run_manifest(m)
    assert r.status == "error" and r.error["type"] == "domain"
