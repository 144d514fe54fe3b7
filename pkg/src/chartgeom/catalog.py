"""Built-in charts, fields and soliton candidates with expected properties.

Every entry is stored as a manifest dict, so ``catalog export`` writes
exactly what ``selftest`` runs.  Entries are built fresh on each call of
:func:`catalog_entries`; treat them as read-only.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from functools import cached_property

from .manifest import FORMAT, VERSION, Manifest, load_manifest
from .soliton import SolitonSpec

__all__ = ["CatalogEntry", "catalog_entries", "get_entry", "entry_names"]

# polynomial probes for the multi-route checks; written in the generic names
# u0, u1, u2 and renamed to each chart's coordinates
_PROBE_VECTORS_2D = [
    ("1 + u0*u1", "u0^2 - u1"),
    ("u1^3 - u0", "2*u0*u1^2 + 1"),
    ("u0^2*u1 - 3*u1", "u0 - u1^2 + u0^3"),
]
_PROBE_FORMS_2D = [
    ("u0^2*u1", "1 + u1^2"),
    ("u0 - u1^3", "u0*u1"),
    ("2*u0^2 - u1", "u0^3 + u0*u1"),
]
_PROBE_VECTORS_3D = [
    ("1 + u0*u1", "u2^2 - u1", "u0*u2"),
    ("u1^3 - u2", "2*u0*u1", "u0^2 + 1"),
    ("u0*u1*u2", "u0 - u2^2", "u1^2 - u0"),
]
_PROBE_FORMS_3D = [
    ("u0^2*u1", "1 + u2^2", "u1*u2"),
    ("u0 - u1^3", "u0*u2", "u2 - u0*u1"),
    ("2*u0^2 - u2", "u0^3", "u1*u2^2"),
]


@dataclass
class CatalogEntry:
    name: str
    description: str
    provenance: str
    manifest_data: dict = field(repr=False)
    solitons: dict = field(default_factory=dict)

    @cached_property
    def manifest(self) -> Manifest:
        return load_manifest(copy.deepcopy(self.manifest_data))

    @property
    def charts(self):
        return self.manifest.charts

    @property
    def fields(self):
        return self.manifest.fields

    @property
    def expectations(self) -> list[dict]:
        return self.manifest.checks

    def chart(self, name: str | None = None):
        """The named chart, or the entry's primary (first) chart."""
        charts = self.manifest.charts
        return charts[name] if name is not None else next(iter(charts.values()))

    def soliton_specs(self) -> dict[str, SolitonSpec]:
        """Soliton candidates as ``{label: SolitonSpec}``."""
        out = {}
        for label, (fname, lam, kind) in self.solitons.items():
            out[label] = SolitonSpec(self.manifest.fields[fname], lam, kind)
        return out

    def export(self) -> dict:
        return copy.deepcopy(self.manifest_data)


def _rename(expr: str, coords) -> str:
    for k, c in enumerate(coords):
        expr = expr.replace(f"u{k}", c)
    return expr


def _chart(name, coords, diag_or_matrix, lower, upper, *, count=100, margin=None, j=None, note=None):
    n = len(coords)
    if isinstance(diag_or_matrix, str):
        metric = [[diag_or_matrix if i == k else "0" for k in range(n)] for i in range(n)]
    else:
        metric = diag_or_matrix
    spec = {"name": name, "coords": list(coords), "metric": metric,
            "domain": {"lower": list(lower), "upper": list(upper), "count": count, "strategy": "grid"}}
    if margin is not None:
        spec["domain"]["margin"] = margin
    if j is not None:
        spec["complex_structure"] = j
    if note:
        spec["note"] = note
    return spec


def _field(name, chart, kind, comps, target=None, note=None):
    f = {"name": name, "chart": chart, "kind": kind, "components": list(comps)}
    if target is not None:
        f["target"] = target
    if note:
        f["note"] = note
    return f


def _check(cid, kind, **kw):
    c = {"id": cid, "kind": kind}
    c.update(kw)
    return c


def _probes(chart_spec: dict, *, yano_samples=None, lie_samples=100):
    """Probe fields plus the route, Bianchi and oracle checks every chart gets."""
    coords = chart_spec["coords"]
    cname = chart_spec["name"]
    vecs = _PROBE_VECTORS_2D if len(coords) == 2 else _PROBE_VECTORS_3D
    forms = _PROBE_FORMS_2D if len(coords) == 2 else _PROBE_FORMS_3D
    fields, checks = [], []
    for k, comps in enumerate(vecs, 1):
        fname = f"{cname}-probe-vector-{k}"
        fields.append(_field(fname, cname, "vector", [_rename(e, coords) for e in comps]))
        checks.append(_check(f"{cname}/lie-routes-{k}", "lie_routes", field=fname, samples=lie_samples))
    for k, comps in enumerate(forms, 1):
        fname = f"{cname}-probe-form-{k}"
        fields.append(_field(fname, cname, "oneform", [_rename(e, coords) for e in comps]))
        extra = {"samples": yano_samples} if yano_samples else {}
        checks.append(_check(f"{cname}/yano-routes-{k}", "yano_routes", field=fname, **extra))
    checks.append(_check(f"{cname}/bianchi", "bianchi", chart=cname))
    checks.append(_check(f"{cname}/fd-oracle", "fd_metric", chart=cname))
    return fields, checks


def _manifest(name, description, provenance, charts, fields, checks):
    return {
        "format": FORMAT,
        "version": VERSION,
        "name": name,
        "description": description,
        "provenance": provenance,
        "sampling": {"strategy": "grid", "count": 100, "seed": 0},
        "charts": charts,
        "fields": fields,
        "checks": checks,
    }


J_STANDARD = [["0", "-1"], ["1", "0"]]
STEREO_2 = "4/(1+x^2+y^2)^2"
STEREO_3 = "4/(1+x^2+y^2+z^2)^2"


def _flat_plane() -> CatalogEntry:
    plane = _chart("plane", ("x", "y"), "1", (-1, -1), (1, 1), j=J_STANDARD)
    wide = _chart("plane-wide", ("u", "v"), "1", (-3, -3), (3, 3), note="target for maps out of the unit box")
    fields = [
        _field("rotation", "plane", "vector", ["-y", "x"]),
        _field("dilation", "plane", "vector", ["x", "y"]),
        _field("z-squared", "plane", "vector", ["x^2 - y^2", "2*x*y"]),
        _field("square-map", "plane", "map", ["x^2 - y^2", "2*x*y"], target="plane-wide"),
        _field("identity-map", "plane", "map", ["x", "y"], target="plane-wide"),
    ]
    checks = [
        _check("flat", "flat", chart="plane"),
        _check("scalar-curvature", "scalar_curvature", chart="plane", value=0.0),
        _check("rotation-killing", "killing", field="rotation"),
        _check("rotation-iht", "iht", field="rotation"),
        _check("dilation-conformal", "conformal", field="dilation"),
        _check("dilation-iht", "iht", field="dilation"),
        _check("z-squared-holomorphic", "holomorphic", field="z-squared"),
        _check("z-squared-iht", "iht", field="z-squared"),
        _check("square-map-harmonic", "tension", field="square-map"),
        _check("identity-map-harmonic", "tension", field="identity-map"),
        _check("identity-map-routes", "tension_routes", field="identity-map", tolerance=1e-10),
    ]
    pf, pc = _probes(plane)
    return CatalogEntry(
        "flat-plane",
        "Euclidean plane with its standard complex structure.",
        "Closed forms: all Christoffel symbols and curvatures vanish; z -> z^2 is holomorphic, hence harmonic.",
        _manifest("flat-plane", "Euclidean plane", "flat algebra", [plane, wide], fields + pf, checks + pc),
    )


def _round_sphere() -> CatalogEntry:
    sphere = _chart("sphere", ("x", "y"), STEREO_2, (-0.9, -0.9), (0.9, 0.9), margin=0.1,
                    note="stereographic chart of the unit sphere; the box stays away from the point at infinity")
    patch = _chart("flat-patch", ("x", "y"), "1", (-0.8, -0.8), (0.8, 0.8), note="flat source for the identity map")
    skew = _chart("skewed", ("x", "y"), [["1 + x^2", "0.5*x*y"], ["0.5*x*y", "1 + y^2"]], (-1, -1), (1, 1),
                  note="non-conformal target: identity maps into it have non-zero tension")
    r2 = "x^2 + y^2"
    fields = [
        _field("rotation", "sphere", "vector", ["-y", "x"]),
        _field("F1", "sphere", "scalar", [f"({r2} - 1)/({r2} + 1)"],
               note="height function; its gradient is the dilation field (x, y)"),
        _field("rotation-plus-dilation", "sphere", "vector", ["x - y", "x + y"]),
        _field("zero", "sphere", "vector", ["0", "0"]),
        _field("constant", "sphere", "scalar", ["1"]),
        _field("flat-to-sphere", "flat-patch", "map", ["x", "y"], target="sphere",
               note="harmonic: in dimension 2 the identity between conformal metrics has zero tension"),
        _field("sphere-to-skewed", "sphere", "map", ["x", "y"], target="skewed"),
    ]
    checks = [
        _check("scalar-curvature", "scalar_curvature", chart="sphere", value=2.0),
        _check("einstein", "einstein", chart="sphere", constant=1.0),
        _check("rotation-killing", "killing", field="rotation"),
        _check("rotation-iht", "iht", field="rotation"),
        _check("rotation-lie-trace", "lie_trace", field="rotation"),
        _check("F1-conformal", "conformal", field="F1"),
        _check("F1-iht", "iht", field="F1"),
        _check("F1-lie-trace", "lie_trace", field="F1"),
        _check("rotation-plus-dilation-conformal", "conformal", field="rotation-plus-dilation"),
        _check("rotation-plus-dilation-iht", "iht", field="rotation-plus-dilation"),
        _check("trivial-soliton", "soliton", field="zero", **{"lambda": -1.0}),
        _check("trivial-soliton-gradient", "gradient_soliton", field="constant", **{"lambda": -1.0}),
        _check("trivial-soliton-trace", "trace_identity", field="constant", **{"lambda": -1.0}),
        _check("trivial-soliton-hamilton", "hamilton_identity", field="constant", **{"lambda": -1.0}),
        _check("trivial-soliton-iht", "iht", field="zero"),
        _check("trivial-soliton-class", "classify", **{"lambda": -1.0, "class": "shrinking"}),
        _check("identity-map-routes", "tension_routes", field="flat-to-sphere", samples=50, tolerance=1e-10),
        _check("identity-map-harmonic", "tension", field="flat-to-sphere", samples=50),
        _check("skewed-identity-routes", "tension_routes", field="sphere-to-skewed", samples=50, tolerance=1e-10),
    ]
    pf, pc = _probes(sphere, yano_samples=200)
    return CatalogEntry(
        "round-sphere-S2",
        "Unit 2-sphere in stereographic coordinates, g = 4 delta / (1 + r^2)^2.",
        "Closed forms: constant curvature 1, s = 2, Ric = g; grad F1 = (x, y). "
        "Oracle: finite-difference metric jet re-derives s and Ric.",
        _manifest("round-sphere-S2", "unit sphere, stereographic chart", "constant curvature",
                  [sphere, patch, skew], fields + pf, checks + pc),
        solitons={"trivial": ("zero", -1.0, "generic"), "trivial-gradient": ("constant", -1.0, "gradient")},
    )


def _hyperbolic() -> CatalogEntry:
    h2 = _chart("half-plane", ("x", "y"), "1/y^2", (-1, 1), (1, 3), margin=1.0,
                note="upper half-plane; the box keeps y >= 1, one unit from the boundary")
    fields = [
        _field("translation", "half-plane", "vector", ["1", "0"]),
        _field("dilation", "half-plane", "vector", ["x", "y"]),
        _field("zero", "half-plane", "vector", ["0", "0"]),
        _field("constant", "half-plane", "scalar", ["1"]),
    ]
    checks = [
        _check("scalar-curvature", "scalar_curvature", chart="half-plane", value=-2.0),
        _check("einstein", "einstein", chart="half-plane", constant=-1.0),
        _check("translation-killing", "killing", field="translation"),
        _check("dilation-killing", "killing", field="dilation"),
        _check("translation-iht", "iht", field="translation"),
        _check("trivial-soliton", "soliton", field="zero", **{"lambda": 1.0}),
        _check("trivial-soliton-trace", "trace_identity", field="constant", **{"lambda": 1.0}),
        _check("trivial-soliton-hamilton", "hamilton_identity", field="constant", **{"lambda": 1.0}),
        _check("trivial-soliton-class", "classify", **{"lambda": 1.0, "class": "expanding"}),
        _check("translation-ricci-negative", "ricci_sign", field="translation", sign="negative", tolerance=1e-12),
        _check("dilation-ricci-negative", "ricci_sign", field="dilation", sign="negative", tolerance=1e-12),
    ]
    pf, pc = _probes(h2)
    return CatalogEntry(
        "hyperbolic-half-plane",
        "Hyperbolic plane, upper half-plane model g = delta / y^2.",
        "Closed forms: constant curvature -1, s = -2, Ric = -g, so Ric(xi, xi) = -|xi|^2 < 0.",
        _manifest("hyperbolic-half-plane", "hyperbolic plane", "constant curvature", [h2], fields + pf, checks + pc),
        solitons={"trivial": ("zero", 1.0, "generic"), "trivial-gradient": ("constant", 1.0, "gradient")},
    )


def _gaussian() -> CatalogEntry:
    plane = _chart("plane", ("x", "y"), "1", (-2, -2), (2, 2))
    fields = [
        _field("F", "plane", "scalar", ["(x^2 + y^2)/4"]),
        _field("xi", "plane", "vector", ["x/2", "y/2"], note="grad F"),
    ]
    lam = {"lambda": -0.5}
    checks = [
        _check("flat", "flat", chart="plane"),
        _check("gradient-soliton", "gradient_soliton", field="F", tolerance=1e-12, **lam),
        _check("soliton", "soliton", field="xi", tolerance=1e-12, **lam),
        _check("trace-identity", "trace_identity", field="F", tolerance=1e-12, **lam),
        _check("hamilton-identity", "hamilton_identity", field="F", **lam),
        _check("iht", "iht", field="xi"),
        _check("gradient-iht", "iht", field="F"),
        _check("lie-trace", "lie_trace", field="xi"),
        _check("class", "classify", **lam, **{"class": "shrinking"}),
    ]
    pf, pc = _probes(plane)
    return CatalogEntry(
        "gaussian-shrinker",
        "Flat plane with potential F = r^2/4 and lambda = -1/2.",
        "Closed forms: Ric = 0 and Hess F = g/2, so 2 Hess F + 2 lambda g = 0 identically.",
        _manifest("gaussian-shrinker", "Gaussian shrinking soliton", "flat algebra", [plane], fields + pf, checks + pc),
        solitons={"gaussian": ("xi", -0.5, "generic"), "gaussian-gradient": ("F", -0.5, "gradient")},
    )


def _cigar() -> CatalogEntry:
    chart = _chart("cigar", ("x", "y"), "1/(1 + x^2 + y^2)", (-2, -2), (2, 2))
    fields = [
        _field("F", "cigar", "scalar", ["-log(1 + x^2 + y^2)"]),
        _field("xi", "cigar", "vector", ["-2*x", "-2*y"], note="grad F"),
    ]
    lam = {"lambda": 0.0}
    checks = [
        _check("gradient-soliton", "gradient_soliton", field="F", **lam),
        _check("soliton", "soliton", field="xi", **lam),
        _check("trace-identity", "trace_identity", field="F", **lam),
        _check("hamilton-identity", "hamilton_identity", field="F", **lam),
        _check("iht", "iht", field="xi"),
        _check("gradient-iht", "iht", field="F"),
        _check("lie-trace", "lie_trace", field="xi"),
        _check("class", "classify", **lam, **{"class": "steady"}),
    ]
    pf, pc = _probes(chart, yano_samples=200)
    return CatalogEntry(
        "cigar",
        "Hamilton's cigar g = delta / (1 + r^2), a steady gradient soliton.",
        "Sign of the potential fixed by evaluating both candidates F = +/- log(1 + r^2): "
        "only F = -log(1 + r^2) annihilates 2 Ric + 2 Hess F (the other leaves residual ~9.4). "
        "The sign in ds = 2 Ric*(dF) was fixed the same way.",
        _manifest("cigar", "steady soliton", "oracle-resolved signs", [chart], fields + pf, checks + pc),
        solitons={"cigar": ("xi", 0.0, "generic"), "cigar-gradient": ("F", 0.0, "gradient")},
    )


def _sphere3() -> CatalogEntry:
    chart = _chart("sphere3", ("x", "y", "z"), STEREO_3, (-0.9, -0.9, -0.9), (0.9, 0.9, 0.9), margin=0.1)
    r2 = "x^2 + y^2 + z^2"
    fields = [
        _field("F1", "sphere3", "scalar", [f"({r2} - 1)/({r2} + 1)"]),
        _field("rotation", "sphere3", "vector", ["-y", "x", "0"]),
        _field("zero", "sphere3", "vector", ["0", "0", "0"]),
        _field("constant", "sphere3", "scalar", ["1"]),
    ]
    lam = {"lambda": -2.0}
    checks = [
        _check("scalar-curvature", "scalar_curvature", chart="sphere3", value=6.0),
        _check("einstein", "einstein", chart="sphere3", constant=2.0),
        _check("rotation-killing", "killing", field="rotation"),
        _check("F1-conformal", "conformal", field="F1"),
        _check("trivial-soliton", "soliton", field="zero", **lam),
        _check("trivial-soliton-trace", "trace_identity", field="constant", **lam),
        _check("trivial-soliton-hamilton", "hamilton_identity", field="constant", **lam),
        _check("trivial-soliton-class", "classify", **lam, **{"class": "shrinking"}),
    ]
    pf, pc = _probes(chart)
    return CatalogEntry(
        "sphere-S3",
        "Unit 3-sphere in stereographic coordinates.",
        "Closed forms: s = n(n - 1) = 6, Ric = 2g, so the trivial soliton has lambda = -2.",
        _manifest("sphere-S3", "unit 3-sphere", "constant curvature", [chart], fields + pf, checks + pc),
        solitons={"trivial": ("zero", -2.0, "generic"), "trivial-gradient": ("constant", -2.0, "gradient")},
    )


def _kahler_plane() -> CatalogEntry:
    chart = _chart("kahler-plane", ("x", "y"), "1", (-1, -1), (1, 1), j=J_STANDARD)
    fields = [
        _field("holomorphic", "kahler-plane", "vector", ["x^2 - y^2", "2*x*y"]),
        _field("non-holomorphic", "kahler-plane", "vector", ["x + y^2", "0"]),
    ]
    checks = [
        _check("holomorphic-field-holomorphic", "holomorphic", field="holomorphic", tolerance=1e-10),
        _check("holomorphic-field-iht", "iht", field="holomorphic", tolerance=1e-10),
        _check("non-holomorphic-field-holomorphic", "holomorphic", field="non-holomorphic",
               expect="fail", threshold=1e-2),
        _check("non-holomorphic-field-iht", "iht", field="non-holomorphic", expect="fail", threshold=1e-2),
    ]
    pf, pc = _probes(chart)
    return CatalogEntry(
        "flat-kähler-plane",
        "Flat plane as a Kähler manifold: holomorphic fields coincide with harmonic transformations.",
        "x + y^2 violates the Cauchy-Riemann equations everywhere (d_x u - d_y v = 1) and has "
        "Hodge Laplacian (-2, 0), so both residuals stay at or above 1 on the whole box.",
        _manifest("flat-kähler-plane", "flat Kähler plane", "flat algebra", [chart], fields + pf, checks + pc),
    )


_BUILDERS = (_flat_plane, _round_sphere, _hyperbolic, _gaussian, _cigar, _sphere3, _kahler_plane)


def catalog_entries() -> list[CatalogEntry]:
    return [b() for b in _BUILDERS]


def entry_names() -> list[str]:
    return [e.name for e in catalog_entries()]


def get_entry(name: str) -> CatalogEntry:
    """Look up an entry by name; ASCII spellings ("flat-kahler-plane") are accepted."""
    for e in catalog_entries():
        if name in (e.name, e.name.replace("ä", "a")):
            return e
    raise KeyError(f"no catalog entry named {name!r}; known: {', '.join(entry_names())}")
