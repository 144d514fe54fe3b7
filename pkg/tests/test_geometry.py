from __future__ import annotations

import numpy as np
import pytest

from chartgeom import geometry as geo
from chartgeom.catalog import catalog_entries
from chartgeom.geometry import ChartError, metric_jet
from chartgeom.symexpr import DomainError

from conftest import grid, interior_points, make_chart


def all_charts():
    return [c for e in catalog_entries() for c in e.charts.values()]


# --- charts and jets -----------------------------------------------------------------

def test_flat_jet_has_zero_partials(plane):
    jet = metric_jet(plane, (0.3, -0.4))
    assert np.array_equal(jet.g, np.eye(2))
    for arr in (jet.dg, jet.d2g, jet.d3g):
        assert not np.any(arr)


def test_sphere_jet_at_origin(sphere):
    jet = metric_jet(sphere, (0.0, 0.0))
    assert np.allclose(jet.g, 4 * np.eye(2), atol=0, rtol=1e-15)
    assert np.max(np.abs(jet.dg)) == 0.0


def test_hyperbolic_jet(hyperbolic):
    jet = metric_jet(hyperbolic, (0.0, 2.0))
    assert np.allclose(jet.g, np.eye(2) / 4)


@pytest.mark.parametrize("chart", all_charts(), ids=lambda c: c.name)
def test_jet_invariants(chart):
    jet = metric_jet(chart, interior_points(chart, 30))
    eye = np.broadcast_to(np.eye(chart.dim), jet.g.shape)
    assert np.max(np.abs(jet.ginv @ jet.g - eye)) < 1e-12
    assert np.array_equal(jet.d2g, np.swapaxes(jet.d2g, 1, 2))
    assert np.array_equal(jet.d3g, np.swapaxes(jet.d3g, 1, 3))
    assert np.array_equal(jet.d3g, np.swapaxes(jet.d3g, 2, 3))


def test_non_positive_definite_metric_rejected():
    chart = make_chart([["1", "2"], ["2", "1"]])
    with pytest.raises(ChartError, match="positive-definite"):
        metric_jet(chart, (0.0, 0.0))
    with pytest.raises(ChartError):
        metric_jet(make_chart("x"), (-0.5, 0.0))


def test_metric_domain_error_propagates():
    with pytest.raises(DomainError):
        metric_jet(make_chart("1/x"), (0.0, 0.3))


def test_asymmetric_metric_rejected():
    with pytest.raises(ChartError):
        make_chart([["1", "x"], ["y", "1"]])


def test_point_dimension_checked(plane):
    with pytest.raises(ValueError):
        metric_jet(plane, (0.1, 0.2, 0.3))


def test_complex_structure_validation(plane):
    plane.check_complex_structure(grid(plane, 16))
    bad = make_chart("1", j=[["0", "-2"], ["1", "0"]])
    with pytest.raises(ChartError, match="J\\^2"):
        bad.check_complex_structure(grid(bad, 4))
    incompatible = make_chart([["1", "0"], ["0", "4"]], j=[["0", "-1"], ["1", "0"]])
    with pytest.raises(ChartError, match="g\\(J"):
        incompatible.check_complex_structure(grid(incompatible, 4))


# --- connection and curvature -----------------------------------------------------------

def test_flat_christoffel_zero(plane):
    assert not np.any(geo.christoffel(metric_jet(plane, (0.5, 0.5))).data)


def test_sphere_christoffel_zero_at_origin(sphere):
    assert np.max(np.abs(geo.christoffel(metric_jet(sphere, (0.0, 0.0))).data)) == 0.0


def test_christoffel_matches_fd_oracle(hyperbolic):
    jet = metric_jet(hyperbolic, (0.0, 1.0))
    oracle = geo.fd_metric_jet(hyperbolic, (0.0, 1.0), step=1e-4)
    assert np.max(np.abs(jet.gamma - oracle.gamma)) < 1e-6
    # closed form on the half-plane: Gamma^x_xy = Gamma^y_yy = -1/y, Gamma^y_xx = 1/y
    expect = np.zeros((2, 2, 2))
    expect[0, 0, 1] = expect[0, 1, 0] = -1.0
    expect[1, 0, 0] = 1.0
    expect[1, 1, 1] = -1.0
    assert np.allclose(jet.gamma, expect, atol=1e-15)


@pytest.mark.parametrize("chart", all_charts(), ids=lambda c: c.name)
def test_christoffel_partials_match_differences(chart):
    pts = interior_points(chart, 10, seed=3)
    jet = metric_jet(chart, pts)
    h = 1e-5
    for a in range(chart.dim):
        e = np.zeros(chart.dim)
        e[a] = h
        fd = (metric_jet(chart, pts + e).gamma - metric_jet(chart, pts - e).gamma) / (2 * h)
        assert np.max(np.abs(jet.dgamma[:, a] - fd)) < 1e-5


def test_sphere_christoffel_partials_nonzero_at_origin(sphere):
    assert np.max(np.abs(metric_jet(sphere, (0.0, 0.0)).dgamma)) > 1.0


@pytest.mark.parametrize("chart", all_charts(), ids=lambda c: c.name)
def test_curvature_symmetries(chart):
    jet = metric_jet(chart, interior_points(chart, 30, seed=1))
    assert np.array_equal(jet.gamma, np.swapaxes(jet.gamma, -1, -2))
    R = jet.riem
    assert np.array_equal(R, -np.swapaxes(R, -1, -2))
    cyclic = R + np.einsum("...klij->...kijl", R) + np.einsum("...klij->...kjli", R)
    assert np.max(np.abs(cyclic)) < 1e-10
    # metric compatibility: nabla_a g_ij = 0
    nabla_g = geo.covariant_derivative(jet, jet.g, jet.dg, "sym2").data
    assert np.max(np.abs(nabla_g)) < 1e-10


def test_flat_curvature_zero(plane):
    jet = metric_jet(plane, grid(plane))
    assert not np.any(jet.riem) and not np.any(jet.ric) and not np.any(jet.scalar)


def test_sphere_constant_curvature(sphere):
    jet = metric_jet(sphere, grid(sphere))
    assert np.max(np.abs(geo.sectional_curvature(jet) - 1.0)) < 1e-8
    assert np.max(np.abs(jet.scalar - 2.0)) < 1e-8
    assert np.max(np.abs(jet.ric - jet.g)) < 1e-8


def test_hyperbolic_constant_curvature(hyperbolic):
    jet = metric_jet(hyperbolic, grid(hyperbolic))
    assert np.max(np.abs(geo.sectional_curvature(jet) + 1.0)) < 1e-8
    assert np.max(np.abs(jet.scalar + 2.0)) < 1e-8


def test_sphere3_scalar(sphere3):
    jet = metric_jet(sphere3, grid(sphere3))
    assert np.max(np.abs(jet.scalar - 6.0)) < 1e-8
    for a, b in ((0, 1), (0, 2), (1, 2)):
        assert np.max(np.abs(geo.sectional_curvature(jet, a, b) - 1.0)) < 1e-8


def test_cigar_scalar_closed_form(cigar):
    pts = grid(cigar)
    s = metric_jet(cigar, pts).scalar
    assert np.max(np.abs(s - 4.0 / (1.0 + np.sum(pts**2, axis=-1)))) < 1e-12


@pytest.mark.parametrize("chart", all_charts(), ids=lambda c: c.name)
def test_curvature_matches_fd_oracle(chart):
    # an independent route: Riemann and s from a jet built by differencing g only
    pts = interior_points(chart, 20, seed=2)
    jet = metric_jet(chart, pts)
    oracle = geo.fd_metric_jet(chart, pts)
    scale = 1.0 + np.max(np.abs(jet.riem))
    assert np.max(np.abs(jet.riem - oracle.riem)) < 1e-5 * scale
    assert np.max(np.abs(jet.scalar - oracle.scalar)) < 1e-5 * (1 + np.max(np.abs(jet.scalar)))


def test_distorted_chart_curvature_matches_fd_oracle(distorted):
    pts = interior_points(distorted, 20, seed=4)
    jet, oracle = metric_jet(distorted, pts), geo.fd_metric_jet(distorted, pts)
    assert np.max(np.abs(jet.ric - oracle.ric)) < 1e-5
    # 2D: Ric = K g
    K = geo.sectional_curvature(jet)
    assert np.max(np.abs(jet.ric - K[:, None, None] * jet.g)) < 1e-12


@pytest.mark.parametrize("chart", all_charts() + [make_chart([["1 + x^2", "0.3*x*y"], ["0.3*x*y", "2 + sin(y)"]])],
                         ids=lambda c: c.name)
def test_contracted_bianchi(chart):
    jet = metric_jet(chart, grid(chart))
    assert np.max(geo.bianchi_residual(jet)) < 1e-6


def test_bianchi_flat_exact(plane):
    assert np.max(geo.bianchi_residual(metric_jet(plane, grid(plane)))) == 0.0


def test_scalar_gradient_matches_differences(cigar):
    pts = interior_points(cigar, 10)
    jet = metric_jet(cigar, pts)
    h = 1e-5
    for a in range(2):
        e = np.zeros(2)
        e[a] = h
        fd = (metric_jet(cigar, pts + e).scalar - metric_jet(cigar, pts - e).scalar) / (2 * h)
        assert np.max(np.abs(jet.dscalar[:, a] - fd)) < 1e-7


def test_second_order_jet_refuses_third_order_quantities(sphere):
    jet = metric_jet(sphere, (0.1, 0.2), order=2)
    with pytest.raises(ValueError):
        _ = jet.dscalar


# --- covariant derivatives -------------------------------------------------------------

def test_hessians_on_flat_plane(plane):
    jet = metric_jet(plane, (0.3, 0.1))
    H = geo.hessian(jet, np.array([0.6, 0.2]), 2 * np.eye(2)).data
    assert np.array_equal(H, 2 * np.eye(2))
    H = geo.hessian(jet, np.array([0.15, 0.05]), 0.5 * np.eye(2)).data
    assert np.array_equal(H, 0.5 * np.eye(2))


def test_hessian_symmetric_on_sphere(sphere):
    from chartgeom.operators import field_jet

    from conftest import field

    F = field(sphere, "scalar", ["x"])
    jet = metric_jet(sphere, interior_points(sphere, 50))
    fj = field_jet(F, jet)
    H = geo.hessian(jet, fj.d1, fj.d2).data
    assert np.max(np.abs(H - np.swapaxes(H, -1, -2))) < 1e-12
    D = geo.covariant_derivative(jet, fj.value, fj.d1, "scalar").data
    assert np.array_equal(D, fj.d1)


def test_covariant_derivative_rejects_unknown_kind(plane):
    with pytest.raises(ValueError):
        geo.covariant_derivative(metric_jet(plane, (0, 0)), np.zeros(2), np.zeros((2, 2)), "spinor")


def test_g_norm_full_contraction(sphere):
    jet = metric_jet(sphere, (0.0, 0.0))
    # g = 4 I: a (0,2) tensor T has |T|^2 = T_ij T_kl g^ik g^jl = |T|_F^2 / 16
    T = geo.TensorValue((0, 2), np.array([[1.0, 2.0], [2.0, 3.0]]), jet.point)
    assert geo.g_norm(T, jet) == pytest.approx(np.sqrt(18.0) / 4)
    v = geo.TensorValue((1, 0), np.array([1.0, 0.0]), jet.point)
    assert geo.g_norm(v, jet) == pytest.approx(2.0)


def test_tensor_value_shape_check():
    with pytest.raises(ValueError):
        geo.TensorValue((1, 1), np.zeros((2, 3)), np.zeros(2))
