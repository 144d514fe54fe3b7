"""Differential operators on functions, 1-forms and symmetric 2-tensors.

Every operator is evaluated pointwise from a :class:`~chartgeom.geometry.MetricJet`
and the symbolic partials of the field components; nothing is differenced
numerically.  Sign conventions (all machine-checked by the test-suite):

* ``d* theta = -g^ij nabla_i theta_j`` and ``Delta F = -g^ij nabla_i nabla_j F``;
* ``(delta* theta)_ij = nabla_i theta_j + nabla_j theta_i`` (no 1/2, so
  ``delta* xi_flat = L_xi g``) and ``delta* F = dF``;
* ``(delta h)_j = -g^ik nabla_i h_kj``;
* ``nabla* nabla theta = -g^ij nabla_i nabla_j theta``.

With these, ``delta delta* - delta* delta = Delta - 2 Ric* = nabla* nabla - Ric*``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import symexpr
from .geometry import Chart, ChartError, MetricJet, TensorValue, metric_jet
from .symexpr import Expr

__all__ = [
    "FieldDef",
    "FieldJet",
    "OperatorResult",
    "YANO_ROUTES",
    "LIE_ROUTES",
    "CURVATURE_SLOTS",
    "CURVATURE_SIGN",
    "field_jet",
    "as_oneform",
    "as_vector",
    "flat",
    "sharp",
    "codifferential",
    "exterior_derivative",
    "hodge_laplacian_1form",
    "bochner_laplacian_1form",
    "ricci_star",
    "delta_star",
    "delta_sym",
    "yano_box",
    "lie_metric",
    "lie_connection",
    "lie_connection_trace",
    "laplacian",
    "laplacian_gradient",
    "tension_field",
    "tension_field_identity",
]

FIELD_KINDS = ("vector", "oneform", "scalar", "sym2", "map")
YANO_ROUTES = ("direct", "hodge", "bochner")
LIE_ROUTES = ("direct", "via_metric")

# Contraction of the curvature term in L_xi Gamma^k_ij = nabla_i nabla_j xi^k + SIGN * Riem[SLOTS] xi^l.
# Selected as the unique contraction (up to the antisymmetry of Riem in its last
# two slots) under which both Lie routes agree on curved charts.
CURVATURE_SLOTS = "kjil"
CURVATURE_SIGN = -1.0


@dataclass(frozen=True, eq=False)
class FieldDef:
    """Symbolic field on a chart.

    ``components`` holds ``n`` expressions for vectors (``xi^k``) and 1-forms
    (``theta_j``), one for scalars, ``n*n`` row-major for symmetric 2-tensors
    and ``n'`` target-coordinate expressions for maps (``target`` set).
    """

    name: str
    chart: Chart
    kind: str
    components: tuple[Expr, ...]
    target: Chart | None = None

    def __post_init__(self):
        n = self.chart.dim
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"field {self.name!r}: unknown kind {self.kind!r}")
        expected = {"vector": n, "oneform": n, "scalar": 1, "sym2": n * n}.get(self.kind)
        if self.kind == "map":
            if self.target is None:
                raise ValueError(f"map {self.name!r} needs a target chart")
            expected = self.target.dim
        if len(self.components) != expected:
            raise ValueError(f"field {self.name!r}: {self.kind} needs {expected} components, got {len(self.components)}")
        for e in self.components:
            for sym, idx in symexpr.free_symbols(e):
                if idx >= n or self.chart.coords[idx] != sym:
                    raise ValueError(f"field {self.name!r}: unknown coordinate {sym!r}")
        if self.kind == "sym2":
            for i in range(n):
                for j in range(i):
                    if self.components[i * n + j] is not self.components[j * n + i]:
                        raise ValueError(f"field {self.name!r}: sym2 components must be symmetric")

    @classmethod
    def from_strings(cls, name: str, chart: Chart, kind: str, components, target: Chart | None = None) -> "FieldDef":
        if isinstance(components, str):
            components = [components]
        comps = []
        for c in components:
            if isinstance(c, (list, tuple)):
                comps.extend(c)
            else:
                comps.append(c)
        return cls(name, chart, kind, tuple(symexpr.parse_expr(str(c), chart.coords) for c in comps), target)

    def component_strings(self) -> list[str]:
        return [symexpr.to_string(e) for e in self.components]

    def is_identity_map(self) -> bool:
        if self.kind != "map" or self.target.dim != self.chart.dim:
            return False
        return all(e.op == "sym" and e.value[1] == i for i, e in enumerate(self.components))


@dataclass(frozen=True, eq=False)
class FieldJet:
    """Numeric values and partials of a field at sample points.

    Derivative slots precede component slots: for a vector ``d1[..., a, k]``
    is ``d_a xi^k`` and ``d2[..., a, b, k]`` is ``d_a d_b xi^k``.
    """

    kind: str
    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray | None = None


@dataclass(frozen=True)
class OperatorResult:
    value: TensorValue
    route: str


def _eval_partials(exprs: Sequence[Expr], pts: np.ndarray, n: int, order: int) -> list[np.ndarray]:
    """Arrays ``[values, d1, d2, ...]`` for a list of component expressions."""
    import itertools

    batch = pts.shape[:-1]
    m = len(exprs)
    out = []
    for k in range(order + 1):
        idxs = list(itertools.product(range(n), repeat=k))
        flat = [symexpr.derivative(e, idx) for idx in idxs for e in exprs]
        vals = symexpr.eval_many(flat, pts, n)
        out.append(vals.reshape(batch + (n,) * k + (m,)))
    return out


def field_jet(field: FieldDef, jet: MetricJet, order: int | None = None) -> FieldJet:
    """Evaluate a field's components and their partials at the jet's points.

    Vectors and 1-forms default to second order, scalars to third.
    """
    if field.chart is not jet.chart:
        raise ValueError(f"field {field.name!r} lives on chart {field.chart.name!r}, jet is on {jet.chart.name!r}")
    if field.kind in ("map", "sym2"):
        raise ValueError(f"use the {field.kind}-specific operator for field {field.name!r}")
    if order is None:
        order = 3 if field.kind == "scalar" else 2
    n = jet.dim
    arrays = _eval_partials(field.components, jet.point, n, order)
    if field.kind == "scalar":
        arrays = [a[..., 0] for a in arrays]
    return FieldJet(field.kind, arrays[0], arrays[1], arrays[2], arrays[3] if order >= 3 else None)


def _sym2_jet(field: FieldDef, jet: MetricJet):
    n = jet.dim
    vals, d1 = _eval_partials(field.components, jet.point, n, 1)
    batch = jet.point.shape[:-1]
    return vals.reshape(batch + (n, n)), d1.reshape(batch + (n, n, n))


def _flat_jet(v: FieldJet, jet: MetricJet) -> FieldJet:
    g, dg, d2g = jet.g, jet.dg, jet.d2g
    th = np.einsum("...jk,...k->...j", g, v.value)
    d1 = np.einsum("...ajk,...k->...aj", dg, v.value) + np.einsum("...jk,...ak->...aj", g, v.d1)
    d2 = (np.einsum("...abjk,...k->...abj", d2g, v.value)
          + np.einsum("...ajk,...bk->...abj", dg, v.d1)
          + np.einsum("...bjk,...ak->...abj", dg, v.d1)
          + np.einsum("...jk,...abk->...abj", g, v.d2))
    return FieldJet("oneform", th, d1, d2)


def _sharp_jet(th: FieldJet, jet: MetricJet) -> FieldJet:
    gi, dgi, d2gi = jet.ginv, jet.dginv, jet.d2ginv
    v = np.einsum("...kj,...j->...k", gi, th.value)
    d1 = np.einsum("...akj,...j->...ak", dgi, th.value) + np.einsum("...kj,...aj->...ak", gi, th.d1)
    d2 = (np.einsum("...abkj,...j->...abk", d2gi, th.value)
          + np.einsum("...akj,...bj->...abk", dgi, th.d1)
          + np.einsum("...bkj,...aj->...abk", dgi, th.d1)
          + np.einsum("...kj,...abj->...abk", gi, th.d2))
    return FieldJet("vector", v, d1, d2)


def _differential_jet(F: FieldJet) -> FieldJet:
    if F.d3 is None:
        raise ValueError("gradient fields need a third-order scalar jet")
    return FieldJet("oneform", F.d1, F.d2, F.d3)


def as_oneform(field, jet: MetricJet) -> FieldJet:
    """1-form jet of a field: vectors are lowered, scalars differentiated."""
    fj = field if isinstance(field, FieldJet) else field_jet(field, jet)
    if fj.kind == "oneform":
        return fj
    if fj.kind == "vector":
        return _flat_jet(fj, jet)
    if fj.kind == "scalar":
        return _differential_jet(fj)
    raise ValueError(f"cannot view a {fj.kind} as a 1-form")


def as_vector(field, jet: MetricJet) -> FieldJet:
    """Vector jet of a field: 1-forms are raised, scalars become ``grad F``."""
    fj = field if isinstance(field, FieldJet) else field_jet(field, jet)
    if fj.kind == "vector":
        return fj
    return _sharp_jet(as_oneform(fj, jet), jet)


def _values(x) -> np.ndarray:
    return np.asarray(x.data if isinstance(x, TensorValue) else x, dtype=float)


def flat(jet: MetricJet, xi) -> TensorValue:
    """Lower a vector: ``theta_j = g_jk xi^k``.  Accepts components or a vector field."""
    if isinstance(xi, (FieldDef, FieldJet)):
        return TensorValue((0, 1), as_oneform(xi, jet).value, jet.point)
    return TensorValue((0, 1), np.einsum("...jk,...k->...j", jet.g, _values(xi)), jet.point)


def sharp(jet: MetricJet, theta) -> TensorValue:
    """Raise a 1-form: ``xi^k = g^kj theta_j``."""
    if isinstance(theta, (FieldDef, FieldJet)):
        return TensorValue((1, 0), as_vector(theta, jet).value, jet.point)
    return TensorValue((1, 0), np.einsum("...kj,...j->...k", jet.ginv, _values(theta)), jet.point)


# ----------------------------------------------------------------------------
# covariant derivatives of 1-forms

def _nabla(th: FieldJet, jet: MetricJet):
    """``D[a, j] = nabla_a theta_j`` and ``dD[b, a, j] = d_b (nabla_a theta_j)``."""
    G, dG = jet.gamma, jet.dgamma
    D = th.d1 - np.einsum("...kaj,...k->...aj", G, th.value)
    dD = (th.d2 - np.einsum("...bkaj,...k->...baj", dG, th.value)
          - np.einsum("...kaj,...bk->...baj", G, th.d1))
    return D, dD


def _nabla2(th: FieldJet, jet: MetricJet) -> np.ndarray:
    """``DD[a, i, j] = nabla_a nabla_i theta_j``."""
    G = jet.gamma
    D, dD = _nabla(th, jet)
    return (dD - np.einsum("...mai,...mj->...aij", G, D)
            - np.einsum("...maj,...im->...aij", G, D))


def _codiff(th: FieldJet, jet: MetricJet):
    """``d* theta`` and its partials ``d_a (d* theta)``."""
    D, dD = _nabla(th, jet)
    val = -np.einsum("...ij,...ij->...", jet.ginv, D)
    grad = (-np.einsum("...aij,...ij->...a", jet.dginv, D)
            - np.einsum("...ij,...aij->...a", jet.ginv, dD))
    return val, grad


def codifferential(jet: MetricJet, theta) -> TensorValue:
    """``d* theta = -g^ij nabla_i theta_j`` (a scalar)."""
    val, _ = _codiff(as_oneform(theta, jet), jet)
    return TensorValue((0, 0), val, jet.point)


def exterior_derivative(jet: MetricJet, theta) -> TensorValue:
    """``(d theta)_ij = d_i theta_j - d_j theta_i``."""
    th = as_oneform(theta, jet)
    return TensorValue((0, 2), th.d1 - np.swapaxes(th.d1, -1, -2), jet.point)


def _hodge(th: FieldJet, jet: MetricJet) -> np.ndarray:
    G = jet.gamma
    _, dd_star = _codiff(th, jet)
    omega = th.d1 - np.swapaxes(th.d1, -1, -2)
    d_omega = th.d2 - np.swapaxes(th.d2, -1, -2)  # d_k omega_ij
    nabla_omega = (d_omega - np.einsum("...mki,...mj->...kij", G, omega)
                   - np.einsum("...mkj,...im->...kij", G, omega))
    d_star_d = -np.einsum("...ki,...kij->...j", jet.ginv, nabla_omega)
    return dd_star + d_star_d


def hodge_laplacian_1form(jet: MetricJet, theta) -> TensorValue:
    """Hodge Laplacian ``(d d* + d* d) theta`` from exterior derivatives of the components."""
    return TensorValue((0, 1), _hodge(as_oneform(theta, jet), jet), jet.point)


def _bochner(th: FieldJet, jet: MetricJet) -> np.ndarray:
    return -np.einsum("...ai,...aij->...j", jet.ginv, _nabla2(th, jet))


def bochner_laplacian_1form(jet: MetricJet, theta) -> TensorValue:
    """Rough Laplacian ``-g^ij nabla_i nabla_j theta``."""
    return TensorValue((0, 1), _bochner(as_oneform(theta, jet), jet), jet.point)


def _ricci_star_form(jet: MetricJet, th_value: np.ndarray) -> np.ndarray:
    return np.einsum("...ik,...kj,...j->...i", jet.ric, jet.ginv, th_value)


def ricci_star(jet: MetricJet, x, kind: str | None = None) -> TensorValue:
    """Ricci endomorphism.

    On a vector ``(Ric* xi)^i = g^ij Ric_jk xi^k``; on a 1-form
    ``(Ric* theta)_i = Ric_i^j theta_j``.  Field definitions carry their own
    kind; bare arrays need ``kind``.
    """
    if isinstance(x, (FieldDef, FieldJet)):
        fj = x if isinstance(x, FieldJet) else field_jet(x, jet)
        kind, vals = fj.kind, fj.value
        if kind == "scalar":
            kind, vals = "oneform", fj.d1
    else:
        vals = _values(x)
    if kind == "vector":
        return TensorValue((1, 0), np.einsum("...ij,...jk,...k->...i", jet.ginv, jet.ric, vals), jet.point)
    if kind == "oneform":
        return TensorValue((0, 1), _ricci_star_form(jet, vals), jet.point)
    raise ValueError("ricci_star needs kind 'vector' or 'oneform'")


def _delta_star_jet(th: FieldJet, jet: MetricJet):
    """``h = delta* theta`` and ``d_b h_ij``."""
    D, dD = _nabla(th, jet)
    h = D + np.swapaxes(D, -1, -2)
    dh = dD + np.swapaxes(dD, -1, -2)
    return h, dh


def delta_star(jet: MetricJet, field) -> TensorValue:
    """Symmetric differentiation: ``nabla_i theta_j + nabla_j theta_i`` on 1-forms, ``dF`` on scalars."""
    fj = field if isinstance(field, FieldJet) else field_jet(field, jet)
    if fj.kind == "scalar":
        return TensorValue((0, 1), fj.d1, jet.point)
    h, _ = _delta_star_jet(as_oneform(fj, jet), jet)
    return TensorValue((0, 2), h, jet.point)


def _delta_sym(h: np.ndarray, dh: np.ndarray, jet: MetricJet) -> np.ndarray:
    G = jet.gamma
    nabla_h = (dh - np.einsum("...mik,...mj->...ikj", G, h)
               - np.einsum("...mij,...km->...ikj", G, h))
    return -np.einsum("...ik,...ikj->...j", jet.ginv, nabla_h)


def delta_sym(jet: MetricJet, h) -> TensorValue:
    """Divergence-type adjoint of ``delta*``: ``(delta h)_j = -g^ik nabla_i h_kj``.

    ``h`` is a ``sym2`` field or a pair ``(h, dh)`` with ``dh[..., a, i, j] = d_a h_ij``.
    """
    if isinstance(h, FieldDef):
        if h.kind != "sym2":
            raise ValueError("delta_sym needs a sym2 field")
        vals, d1 = _sym2_jet(h, jet)
    else:
        vals, d1 = (np.asarray(a, dtype=float) for a in h)
    return TensorValue((0, 1), _delta_sym(vals, d1, jet), jet.point)


def _yano(th: FieldJet, jet: MetricJet, route: str) -> np.ndarray:
    if route == "direct":
        h, dh = _delta_star_jet(th, jet)
        _, dd_star = _codiff(th, jet)  # delta* of the scalar delta(theta) = d* theta
        return _delta_sym(h, dh, jet) - dd_star
    if route == "hodge":
        return _hodge(th, jet) - 2.0 * _ricci_star_form(jet, th.value)
    if route == "bochner":
        return _bochner(th, jet) - _ricci_star_form(jet, th.value)
    raise ValueError(f"unknown Yano route {route!r}; expected one of {YANO_ROUTES}")


def yano_box(jet: MetricJet, theta, route: str = "direct") -> OperatorResult:
    """Yano operator on a 1-form by one of three independent assemblies.

    ``direct``: ``delta delta* theta - delta* delta theta``;
    ``hodge``: ``Delta theta - 2 Ric* theta``;
    ``bochner``: ``nabla* nabla theta - Ric* theta``.
    """
    if route not in YANO_ROUTES:
        raise ValueError(f"unknown Yano route {route!r}; expected one of {YANO_ROUTES}")
    th = as_oneform(theta, jet)
    return OperatorResult(TensorValue((0, 1), _yano(th, jet, route), jet.point), route)


# ----------------------------------------------------------------------------
# Lie derivatives

def _lie_metric_jet(v: FieldJet, jet: MetricJet):
    """``L_xi g`` from the coordinate formula, with its first partials."""
    g, dg, d2g = jet.g, jet.dg, jet.d2g
    xi, d1, d2 = v.value, v.d1, v.d2
    L = (np.einsum("...k,...kij->...ij", xi, dg)
         + np.einsum("...kj,...ik->...ij", g, d1)
         + np.einsum("...ik,...jk->...ij", g, d1))
    dL = (np.einsum("...ak,...kij->...aij", d1, dg)
          + np.einsum("...k,...akij->...aij", xi, d2g)
          + np.einsum("...akj,...ik->...aij", dg, d1)
          + np.einsum("...kj,...aik->...aij", g, d2)
          + np.einsum("...aik,...jk->...aij", dg, d1)
          + np.einsum("...ik,...ajk->...aij", g, d2))
    return L, dL


def lie_metric(jet: MetricJet, xi) -> TensorValue:
    """``(L_xi g)_ij = xi^k d_k g_ij + g_kj d_i xi^k + g_ik d_j xi^k``."""
    L, _ = _lie_metric_jet(as_vector(xi, jet), jet)
    return TensorValue((0, 2), L, jet.point)


def _nabla2_vector(v: FieldJet, jet: MetricJet) -> np.ndarray:
    """``DD[i, j, k] = nabla_i nabla_j xi^k``."""
    G, dG = jet.gamma, jet.dgamma
    D = v.d1 + np.einsum("...kjm,...m->...jk", G, v.value)
    dD = (v.d2 + np.einsum("...akjm,...m->...ajk", dG, v.value)
          + np.einsum("...kjm,...am->...ajk", G, v.d1))
    return (dD - np.einsum("...mij,...mk->...ijk", G, D)
            + np.einsum("...kim,...jm->...ijk", G, D))


def _curvature_term(jet: MetricJet, xi: np.ndarray, slots: str = CURVATURE_SLOTS,
                    sign: float = CURVATURE_SIGN) -> np.ndarray:
    return sign * np.einsum(f"...{slots},...l->...kij", jet.riem, xi)


def _lie_connection(v: FieldJet, jet: MetricJet, route: str) -> np.ndarray:
    if route == "direct":
        DD = _nabla2_vector(v, jet)
        return np.einsum("...ijk->...kij", DD) + _curvature_term(jet, v.value)
    if route == "via_metric":
        G = jet.gamma
        L, dL = _lie_metric_jet(v, jet)
        nabla_L = (dL - np.einsum("...mai,...mj->...aij", G, L)
                   - np.einsum("...maj,...im->...aij", G, L))
        t = (np.einsum("...ijl->...ijl", nabla_L) + np.einsum("...jil->...ijl", nabla_L)
             - np.einsum("...lij->...ijl", nabla_L))
        return 0.5 * np.einsum("...kl,...ijl->...kij", jet.ginv, t)
    raise ValueError(f"unknown Lie route {route!r}; expected one of {LIE_ROUTES}")


def lie_connection(jet: MetricJet, xi, route: str = "direct") -> TensorValue:
    """Lie derivative of the Levi-Civita connection, ``(L_xi Gamma)^k_ij``.

    ``direct`` uses second covariant derivatives of ``xi`` plus a curvature
    term; ``via_metric`` uses ``1/2 g^kl (nabla_i L_jl + nabla_j L_il - nabla_l L_ij)``
    with ``L = L_xi g``.
    """
    if route not in LIE_ROUTES:
        raise ValueError(f"unknown Lie route {route!r}; expected one of {LIE_ROUTES}")
    return TensorValue((1, 2), _lie_connection(as_vector(xi, jet), jet, route), jet.point)


def lie_connection_trace(jet: MetricJet, xi, route: str = "direct") -> TensorValue:
    """``g^ij (L_xi Gamma)^k_ij`` (a vector)."""
    T = lie_connection(jet, xi, route).data
    return TensorValue((1, 0), np.einsum("...ij,...kij->...k", jet.ginv, T), jet.point)


# ----------------------------------------------------------------------------
# functions

def _scalar_jet(F, jet: MetricJet) -> FieldJet:
    fj = F if isinstance(F, FieldJet) else field_jet(F, jet, order=3)
    if fj.kind != "scalar":
        raise ValueError("expected a scalar field")
    return fj


def laplacian(jet: MetricJet, F) -> TensorValue:
    """``Delta F = -g^ij nabla_i nabla_j F`` (non-negative spectrum convention)."""
    fj = _scalar_jet(F, jet)
    H = fj.d2 - np.einsum("...kij,...k->...ij", jet.gamma, fj.d1)
    return TensorValue((0, 0), -np.einsum("...ij,...ij->...", jet.ginv, H), jet.point)


def laplacian_gradient(jet: MetricJet, F) -> TensorValue:
    """``d(Delta F)``, assembled from third partials of ``F``."""
    fj = _scalar_jet(F, jet)
    if fj.d3 is None:
        raise ValueError("d(Delta F) needs a third-order scalar jet")
    G, dG = jet.gamma, jet.dgamma
    H = fj.d2 - np.einsum("...kij,...k->...ij", G, fj.d1)
    dH = (fj.d3 - np.einsum("...akij,...k->...aij", dG, fj.d1)
          - np.einsum("...kij,...ak->...aij", G, fj.d2))
    grad = (-np.einsum("...aij,...ij->...a", jet.dginv, H)
            - np.einsum("...ij,...aij->...a", jet.ginv, dH))
    return TensorValue((0, 1), grad, jet.point)


# ----------------------------------------------------------------------------
# harmonic maps

def _map_image(f: FieldDef, pts: np.ndarray) -> np.ndarray:
    return symexpr.eval_many(f.components, pts, f.chart.dim)


def tension_field(f: FieldDef, p, jet: MetricJet | None = None):
    """Tension field of a map between charts, returned with the target jet.

    ``tau^a = g^ij (d_i d_j f^a - Gamma^k_ij d_k f^a + Gamma'^a_bc(f) d_i f^b d_j f^c)``.
    Raises :class:`ChartError` when ``f(p)`` leaves the target's domain.
    """
    if f.kind != "map":
        raise ValueError(f"field {f.name!r} is not a map")
    src = f.chart
    if jet is None:
        jet = metric_jet(src, p, order=2)
    pts = jet.point
    n = src.dim
    _, df, d2f = _eval_partials(f.components, pts, n, 2)
    image = _map_image(f, pts)
    inside = f.target.domain.contains(image)
    if not np.all(inside):
        bad = np.atleast_2d(image)[np.argmin(np.atleast_1d(inside))]
        raise ChartError(f"map {f.name!r}: image {bad.tolist()} outside the domain of chart {f.target.name!r}")
    tjet = metric_jet(f.target, image, order=2)
    tau = (np.einsum("...ij,...ija->...a", jet.ginv, d2f)
           - np.einsum("...ij,...kij,...ka->...a", jet.ginv, jet.gamma, df)
           + np.einsum("...ij,...abc,...ib,...jc->...a", jet.ginv, tjet.gamma, df, df))
    return TensorValue((1, 0), tau, pts), tjet


def tension_field_identity(source: Chart, target: Chart, p) -> tuple[TensorValue, MetricJet]:
    """``g^ij (Gamma'^k_ij - Gamma^k_ij)`` for the identity map between two metrics."""
    if source.dim != target.dim:
        raise ValueError("identity map needs charts of equal dimension")
    jet = metric_jet(source, p, order=2)
    if not np.all(target.domain.contains(jet.point)):
        raise ChartError(f"point outside the domain of chart {target.name!r}")
    tjet = metric_jet(target, jet.point, order=2)
    tau = np.einsum("...ij,...kij->...k", jet.ginv, tjet.gamma - jet.gamma)
    return TensorValue((1, 0), tau, jet.point), tjet
