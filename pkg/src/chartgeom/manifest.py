"""Loading and writing verification manifests (JSON, format version 1).

A manifest that fails schema validation or whose charts/fields cannot be
built is rejected as a whole with :class:`ManifestError`.  Dangling
references inside individual checks are *not* errors here; the harness
reports them per check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .geometry import Chart, ChartError
from .operators import FieldDef
from .symexpr import ExprError

__all__ = [
    "FORMAT",
    "VERSION",
    "CHECK_KINDS",
    "ManifestError",
    "SamplingConfig",
    "Manifest",
    "load_manifest",
    "manifest_schema",
    "dump_manifest",
]

FORMAT = "chartgeom-manifest"
VERSION = 1
CHECK_KINDS = (
    "killing", "conformal", "holomorphic", "iht", "soliton", "gradient_soliton",
    "trace_identity", "hamilton_identity", "bianchi", "yano_routes", "lie_routes",
    "tension", "tension_routes", "lie_trace", "scalar_curvature", "einstein", "flat",
    "ricci_sign", "classify", "fd_metric",
)


class ManifestError(ValueError):
    """The manifest is malformed and was rejected as a whole."""


@dataclass(frozen=True)
class SamplingConfig:
    strategy: str = "grid"
    count: int = 100
    counts: tuple[int, ...] | None = None
    seed: int = 0


@dataclass
class Manifest:
    name: str
    charts: dict[str, Chart]
    fields: dict[str, FieldDef]
    checks: list[dict]
    sampling: SamplingConfig = SamplingConfig()
    description: str = ""
    raw: dict = field(default_factory=dict, repr=False)


def manifest_schema() -> dict:
    text = resources.files("chartgeom").joinpath("schemas/manifest-v1.schema.json").read_text()
    return json.loads(text)


def _read(source) -> dict:
    if isinstance(source, dict):
        return source
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {str(path)!r}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc})") from exc


def _build_chart(spec: dict) -> Chart:
    dom = spec["domain"]
    return Chart.from_strings(
        spec["name"],
        spec["coords"],
        spec["metric"],
        dom["lower"],
        dom["upper"],
        count=dom.get("count", 100),
        strategy=dom.get("strategy", "grid"),
        margin=dom.get("margin"),
        complex_structure=spec.get("complex_structure"),
    )


def load_manifest(source) -> Manifest:
    """Validate and build a manifest from a path or an already-parsed dict."""
    data = _read(source)
    try:
        jsonschema.validate(data, manifest_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ManifestError(f"schema violation at {where}: {exc.message}") from exc

    charts: dict[str, Chart] = {}
    for spec in data["charts"]:
        if spec["name"] in charts:
            raise ManifestError(f"duplicate chart name {spec['name']!r}")
        try:
            charts[spec["name"]] = _build_chart(spec)
        except (ChartError, ExprError, ValueError) as exc:
            raise ManifestError(f"chart {spec['name']!r}: {exc}") from exc

    fields: dict[str, FieldDef] = {}
    for spec in data.get("fields", []):
        name = spec["name"]
        if name in fields:
            raise ManifestError(f"duplicate field name {name!r}")
        if spec["chart"] not in charts:
            raise ManifestError(f"field {name!r} refers to unknown chart {spec['chart']!r}")
        target = None
        if spec["kind"] == "map":
            if spec.get("target") not in charts:
                raise ManifestError(f"map {name!r} needs a known target chart")
            target = charts[spec["target"]]
        try:
            fields[name] = FieldDef.from_strings(name, charts[spec["chart"]], spec["kind"], spec["components"], target)
        except (ExprError, ValueError) as exc:
            raise ManifestError(f"field {name!r}: {exc}") from exc

    ids = [c["id"] for c in data["checks"]]
    if len(set(ids)) != len(ids):
        raise ManifestError("check ids must be unique")

    s = data.get("sampling", {})
    counts = tuple(s["counts"]) if "counts" in s else None
    sampling = SamplingConfig(s.get("strategy", "grid"), s.get("count", 100), counts, s.get("seed", 0))
    return Manifest(data.get("name", ""), charts, fields, list(data["checks"]), sampling,
                    data.get("description", ""), data)


def dump_manifest(data: dict, path) -> None:
    """Write a manifest dict as stable, indented JSON."""
    jsonschema.validate(data, manifest_schema())
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
