from __future__ import annotations

import itertools

import numpy as np
import pytest

from chartgeom import operators as ops
from chartgeom.catalog import catalog_entries, get_entry
from chartgeom.geometry import ChartError, TensorValue, g_norm, metric_jet
from chartgeom.operators import field_jet

from conftest import field, grid, interior_points, make_chart

POLY_FORMS = [("x^2*y", "1 + y^2"), ("x - y^3", "x*y"), ("2*x^2 - y", "x^3 + x*y")]
POLY_VECTORS = [("1 + x*y", "x^2 - y"), ("y^3 - x", "2*x*y^2 + 1"), ("x^2*y - 3*y", "x - y^2 + x^3")]


def primary_charts():
    return [e.chart() for e in catalog_entries()]


def gmax(sig, data, jet):
    return float(np.max(g_norm(TensorValue(sig, data, jet.point), jet)))


# --- musical isomorphisms -----------------------------------------------------------------

def test_flat_on_plane_and_sphere(plane, sphere):
    assert np.array_equal(ops.flat(metric_jet(plane, (0.2, 0.3)), np.array([1.0, 0.0])).data, [1.0, 0.0])
    assert np.allclose(ops.flat(metric_jet(sphere, (0.0, 0.0)), np.array([1.0, 0.0])).data, [4.0, 0.0])


@pytest.mark.parametrize("chart", primary_charts(), ids=lambda c: c.name)
def test_sharp_flat_round_trip(chart):
    jet = metric_jet(chart, interior_points(chart, 100))
    v = np.random.default_rng(0).normal(size=(100, chart.dim))
    back = ops.sharp(jet, ops.flat(jet, v)).data
    assert np.max(np.abs(back - v)) < 1e-12


# --- codifferential and Laplacians -----------------------------------------------------------

def test_codifferential_flat(plane):
    jet = metric_jet(plane, grid(plane, 9))
    assert np.allclose(ops.codifferential(jet, field(plane, "oneform", ["x", "0"])).data, -1.0)
    assert np.allclose(ops.codifferential(jet, field(plane, "oneform", ["-y", "x"])).data, 0.0)


def test_codifferential_of_exact_form_is_laplacian(sphere):
    jet = metric_jet(sphere, grid(sphere))
    F = field(sphere, "scalar", ["x"])
    a = ops.codifferential(jet, F).data
    b = ops.laplacian(jet, F).data
    assert np.max(np.abs(a - b)) < 1e-10


def test_hodge_laplacian_flat(plane):
    jet = metric_jet(plane, grid(plane, 16))
    assert np.max(np.abs(ops.hodge_laplacian_1form(jet, field(plane, "oneform", ["0", "x"])).data)) == 0.0
    out = ops.hodge_laplacian_1form(jet, field(plane, "oneform", ["x^2", "0"])).data
    assert np.allclose(out, [-2.0, 0.0])


def test_bochner_laplacian_flat(plane):
    jet = metric_jet(plane, grid(plane, 16))
    assert np.allclose(ops.bochner_laplacian_1form(jet, field(plane, "oneform", ["x^2", "0"])).data, [-2.0, 0.0])
    assert not np.any(ops.bochner_laplacian_1form(jet, field(plane, "oneform", ["3", "-1"])).data)


@pytest.mark.parametrize("chart", primary_charts(), ids=lambda c: c.name)
def test_weitzenbock(chart):
    coords = chart.coords
    comps = [f"{coords[0]}*{coords[1]}"] + [f"{c}^2" for c in coords[1:]]
    theta = field(chart, "oneform", comps)
    jet = metric_jet(chart, grid(chart))
    hodge = ops.hodge_laplacian_1form(jet, theta).data
    boch = ops.bochner_laplacian_1form(jet, theta).data + ops.ricci_star(jet, theta).data
    assert gmax((0, 1), hodge - boch, jet) < 1e-8


@pytest.mark.parametrize("chart", primary_charts(), ids=lambda c: c.name)
def test_hodge_commutes_with_d_on_functions(chart):
    c = chart.coords
    F = field(chart, "scalar", [f"{c[0]}^2*{c[1]} + sin({c[1]})"])
    jet = metric_jet(chart, grid(chart))
    lhs = ops.hodge_laplacian_1form(jet, F).data
    rhs = ops.laplacian_gradient(jet, F).data
    assert gmax((0, 1), lhs - rhs, jet) < 1e-8


def test_laplacian_sign_convention(plane):
    jet = metric_jet(plane, (0.3, 0.4))
    assert ops.laplacian(jet, field(plane, "scalar", ["x^2 + y^2"])).data == pytest.approx(-4.0)


# --- Ricci endomorphism, delta*, delta ---------------------------------------------------------

def test_ricci_star(plane, sphere, hyperbolic):
    v = np.array([0.3, -1.2])
    assert not np.any(ops.ricci_star(metric_jet(plane, (0.1, 0.1)), v, "vector").data)
    jet = metric_jet(sphere, grid(sphere))
    vb = np.broadcast_to(v, jet.point.shape)
    assert np.max(np.abs(ops.ricci_star(jet, vb, "vector").data - v)) < 1e-12
    jet = metric_jet(hyperbolic, grid(hyperbolic))
    assert np.max(np.abs(ops.ricci_star(jet, vb, "vector").data + v)) < 1e-12
    with pytest.raises(ValueError):
        ops.ricci_star(jet, vb)


def test_delta_star_flat(plane):
    jet = metric_jet(plane, grid(plane, 9))
    assert not np.any(ops.delta_star(jet, field(plane, "vector", ["-y", "x"])).data)
    out = ops.delta_star(jet, field(plane, "oneform", ["x", "0"])).data
    assert np.array_equal(out, np.broadcast_to([[2.0, 0.0], [0.0, 0.0]], out.shape))
    F = field(plane, "scalar", ["x*y"])
    assert np.array_equal(ops.delta_star(jet, F).data, field_jet(F, jet).d1)


@pytest.mark.parametrize("chart", primary_charts(), ids=lambda c: c.name)
def test_delta_star_is_lie_derivative(chart):
    jet = metric_jet(chart, interior_points(chart, 50))
    c = chart.coords
    xi = field(chart, "vector", [f"{c[1]}^2"] + [f"{c[0]}*{c[k]}" for k in range(1, chart.dim)])
    ds = ops.delta_star(jet, ops.as_oneform(xi, jet)).data
    L = ops.lie_metric(jet, xi).data
    assert np.max(np.abs(ds - L)) < 1e-10 * (1 + np.max(np.abs(L)))


def test_delta_sym_flat(plane):
    jet = metric_jet(plane, grid(plane, 9))
    assert not np.any(ops.delta_sym(jet, field(plane, "sym2", ["1", "0", "0", "1"])).data)
    out = ops.delta_sym(jet, field(plane, "sym2", ["x^2", "0", "0", "0"])).data
    assert np.allclose(out[:, 0], -2 * jet.point[:, 0]) and not np.any(out[:, 1])


@pytest.mark.parametrize("chart", primary_charts(), ids=lambda c: c.name)
def test_delta_of_metric_vanishes(chart):
    jet = metric_jet(chart, grid(chart))
    assert gmax((0, 1), ops.delta_sym(jet, (jet.g, jet.dg)).data, jet) < 1e-12


def test_sym2_must_be_symmetric(plane):
    with pytest.raises(ValueError):
        field(plane, "sym2", ["x", "y", "0", "1"])


# --- Yano operator ---------------------------------------------------------------------------------

def test_yano_constant_form_flat(plane):
    jet = metric_jet(plane, grid(plane, 9))
    for route in ops.YANO_ROUTES:
        assert not np.any(ops.yano_box(jet, field(plane, "oneform", ["2", "-1"]), route).value.data)


def test_yano_killing_on_sphere(sphere):
    jet = metric_jet(sphere, grid(sphere))
    rot = field(sphere, "vector", ["-y", "x"])
    for route in ops.YANO_ROUTES:
        res = ops.yano_box(jet, rot, route)
        assert res.route == route
        assert gmax((0, 1), res.value.data, jet) < 1e-10


@pytest.mark.parametrize("entry", ["round-sphere-S2", "cigar"])
@pytest.mark.parametrize("comps", POLY_FORMS)
def test_three_route_yano_agreement(entry, comps):
    chart = get_entry(entry).chart()
    jet = metric_jet(chart, interior_points(chart, 200, seed=7))
    theta = field(chart, "oneform", comps)
    out = {r: ops.yano_box(jet, theta, r).value.data for r in ops.YANO_ROUTES}
    for a, b in itertools.combinations(out, 2):
        assert gmax((0, 1), out[a] - out[b], jet) < 1e-8
    assert gmax((0, 1), out["direct"], jet) > 1e-3  # the probes are not in the kernel


def test_yano_routes_on_non_diagonal_chart(distorted):
    jet = metric_jet(distorted, grid(distorted))
    theta = field(distorted, "oneform", POLY_FORMS[2])
    out = {r: ops.yano_box(jet, theta, r).value.data for r in ops.YANO_ROUTES}
    for a, b in itertools.combinations(out, 2):
        assert gmax((0, 1), out[a] - out[b], jet) < 1e-8


def test_unknown_routes(plane):
    jet = metric_jet(plane, (0, 0))
    with pytest.raises(ValueError):
        ops.yano_box(jet, field(plane, "oneform", ["x", "y"]), "spectral")
    with pytest.raises(ValueError):
        ops.lie_connection(jet, field(plane, "vector", ["x", "y"]), "guess")


# --- Lie derivatives ---------------------------------------------------------------------------------

def test_lie_metric_flat(plane):
    jet = metric_jet(plane, grid(plane, 9))
    assert not np.any(ops.lie_metric(jet, field(plane, "vector", ["-y", "x"])).data)
    grad = field(plane, "scalar", ["(x^2 + y^2)/4"])
    L = ops.lie_metric(jet, grad).data
    assert np.allclose(L, np.eye(2))


def test_lie_connection_flat_is_second_partials(plane):
    xi = field(plane, "vector", POLY_VECTORS[1])
    jet = metric_jet(plane, grid(plane, 16))
    d2 = field_jet(xi, jet).d2  # [a, b, k]
    expect = np.einsum("...ijk->...kij", d2)
    for route in ops.LIE_ROUTES:
        assert np.array_equal(ops.lie_connection(jet, xi, route).data, expect)


def test_lie_connection_killing_on_sphere(sphere):
    jet = metric_jet(sphere, grid(sphere))
    rot = field(sphere, "vector", ["-y", "x"])
    for route in ops.LIE_ROUTES:
        assert gmax((1, 2), ops.lie_connection(jet, rot, route).data, jet) < 1e-8


@pytest.mark.parametrize("chart", primary_charts(), ids=lambda c: c.name)
def test_two_route_lie_agreement(chart):
    jet = metric_jet(chart, grid(chart))
    c = chart.coords
    for comps in POLY_VECTORS:
        comps = [s.replace("x", "U").replace("y", "V").replace("U", c[0]).replace("V", c[1]) for s in comps]
        comps += [f"{c[0]}*{c[-1]}"] * (chart.dim - 2)
        xi = field(chart, "vector", comps)
        a = ops.lie_connection(jet, xi, "direct").data
        b = ops.lie_connection(jet, xi, "via_metric").data
        assert gmax((1, 2), a - b, jet) < 1e-8


def _slot_choices():
    # every way to feed (k, i, j) and the contracted l into Riem's four slots, both signs
    for perm in itertools.permutations("kijl"):
        for sign in (1.0, -1.0):
            yield "".join(perm), sign


def test_curvature_slot_resolution():
    """Exactly one contraction class makes the direct route agree with the metric route.

    ``Riem[k, j, i, l]`` with sign -1 and ``Riem[k, j, l, i]`` with sign +1 are the
    same tensor; every other slot/sign choice disagrees on curved charts.
    """
    agree = []
    charts = [get_entry(n).chart() for n in ("round-sphere-S2", "cigar", "hyperbolic-half-plane")]
    charts.append(make_chart([["1 + x^2", "0.3*x*y"], ["0.3*x*y", "2 + sin(y)"]]))
    data = []
    for chart in charts:
        jet = metric_jet(chart, interior_points(chart, 20, seed=11))
        xi = field(chart, "vector", POLY_VECTORS[0])
        v = ops.as_vector(xi, jet)
        data.append((jet, v, ops._lie_connection(v, jet, "via_metric"), ops._nabla2_vector(v, jet)))
    for slots, sign in _slot_choices():
        ok = True
        for jet, v, ref, DD in data:
            direct = np.einsum("...ijk->...kij", DD) + ops._curvature_term(jet, v.value, slots, sign)
            ok &= gmax((1, 2), direct - ref, jet) < 1e-8
        if ok:
            agree.append((slots, sign))
    assert sorted(agree) == [("kjil", -1.0), ("kjli", 1.0)]
    assert (ops.CURVATURE_SLOTS, ops.CURVATURE_SIGN) in agree


def test_lie_trace_vanishes_for_solitons():
    for name in ("gaussian-shrinker", "cigar"):
        entry = get_entry(name)
        xi = entry.fields["xi"]
        jet = metric_jet(xi.chart, grid(xi.chart))
        assert gmax((1, 0), ops.lie_connection_trace(jet, xi).data, jet) < 1e-8


# --- tension field --------------------------------------------------------------------------------------

def test_identity_map_between_equal_metrics(sphere):
    ident = field(sphere, "map", ["x", "y"], target=sphere)
    tau, _ = ops.tension_field(ident, grid(sphere))
    assert not np.any(tau.data)
    tau2, _ = ops.tension_field_identity(sphere, sphere, grid(sphere))
    assert not np.any(tau2.data)


def test_square_map_between_flat_planes():
    src = make_chart("1", name="src")
    dst = make_chart("1", lower=(-3, -3), upper=(3, 3), name="dst")
    f = field(src, "map", ["x^2 - y^2", "2*x*y"], target=dst)
    tau, _ = ops.tension_field(f, grid(src))
    assert not np.any(tau.data)
    g = field(src, "map", ["x^2", "y"], target=dst)
    tau, _ = ops.tension_field(g, grid(src))
    assert np.allclose(tau.data, [2.0, 0.0])


@pytest.mark.parametrize("name", ["flat-to-sphere", "sphere-to-skewed"])
def test_identity_map_two_routes(name):
    f = get_entry("round-sphere-S2").fields[name]
    for p in (np.array([0.0, 0.0]), np.array([0.5, 0.0]), interior_points(f.chart, 50)):
        tau, tjet = ops.tension_field(f, p)
        ident, _ = ops.tension_field_identity(f.chart, f.target, p)
        assert np.max(g_norm(TensorValue((1, 0), tau.data - ident.data, tjet.point), tjet)) < 1e-10


def test_identity_flat_to_sphere_is_harmonic():
    # 2D conformal invariance: sum_i Gamma^k_ii vanishes for g = e^(2 phi) delta
    f = get_entry("round-sphere-S2").fields["flat-to-sphere"]
    tau, _ = ops.tension_field(f, interior_points(f.chart, 50))
    assert np.max(np.abs(tau.data)) < 1e-14


def test_identity_into_non_conformal_metric_is_not_harmonic():
    f = get_entry("round-sphere-S2").fields["sphere-to-skewed"]
    tau, _ = ops.tension_field(f, interior_points(f.chart, 50))
    assert np.max(np.abs(tau.data)) > 0.1


def test_tension_image_outside_target(plane):
    small = make_chart("1", lower=(-0.5, -0.5), upper=(0.5, 0.5), name="small")
    f = field(plane, "map", ["x^2 - y^2", "2*x*y"], target=small)
    with pytest.raises(ChartError, match="outside"):
        ops.tension_field(f, np.array([[0.9, 0.9]]))


def test_field_component_count_checked(plane):
    with pytest.raises(ValueError):
        field(plane, "vector", ["x"])
    with pytest.raises(ValueError):
        field(plane, "map", ["x", "y"])  # no target
