"""Charts, metric jets and Levi-Civita curvature at sample points.

Array layouts (a leading batch shape ``...`` is always allowed):

* ``g[..., i, j]``, ``dg[..., a, i, j] = d_a g_ij`` and so on for higher partials;
  derivative slots always come before the component slots.
* ``Gamma[..., k, i, j]`` is the Christoffel symbol with upper index ``k``.
* ``Riem[..., k, l, i, j]`` holds the components of
  ``R(d_i, d_j) d_l = Riem[k, l, i, j] d_k`` with
  ``R(X, Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y]``.
* ``Ric[..., j, l] = Riem[i, j, i, l]``, which makes the unit round sphere
  satisfy ``Ric = +g``.

See ``docs/conventions.md`` for how every other sign follows from these.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import symexpr
from .symexpr import Expr

__all__ = [
    "ChartError",
    "SampleDomain",
    "Chart",
    "MetricJet",
    "TensorValue",
    "metric_jet",
    "fd_metric_jet",
    "christoffel",
    "christoffel_partials",
    "christoffel_second_partials",
    "riemann",
    "riemann_partials",
    "lowered_riemann",
    "ricci",
    "ricci_partials",
    "scalar_curvature",
    "scalar_curvature_gradient",
    "sectional_curvature",
    "covariant_derivative",
    "hessian",
    "bianchi_residual",
    "g_norm",
]


class ChartError(ValueError):
    """Invalid chart data or a point where the chart is not Riemannian."""


@dataclass(frozen=True)
class SampleDomain:
    """Axis-aligned sampling box.

    ``margin`` records how far the box stays from the nearest singularity of
    the chart's expressions; it is documentation carried into manifests.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    count: int = 100
    strategy: str = "grid"
    margin: float | None = None

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(lo) != len(hi):
            raise ChartError("domain bounds have different lengths")
        if not all(np.isfinite(lo + hi)):
            raise ChartError("domain bounds must be finite")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, points, margin: float = 0.0) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        lo = np.asarray(self.lower) + margin
        hi = np.asarray(self.upper) - margin
        return np.all((pts >= lo) & (pts <= hi), axis=-1)


@dataclass(frozen=True, eq=False)
class Chart:
    """A single coordinate patch carrying a Riemannian metric.

    Only the upper triangle of the metric is stored (``metric_upper`` is a
    dict keyed by ``(i, j)`` with ``i <= j``).  Build charts with
    :meth:`from_strings` unless you already hold parsed expressions.
    """

    name: str
    coords: tuple[str, ...]
    metric_upper: dict
    domain: SampleDomain
    complex_structure: tuple[tuple[Expr, ...], ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.coords)
        if n < 2:
            raise ChartError(f"chart {self.name!r}: dimension must be at least 2")
        if self.domain.dim != n:
            raise ChartError(f"chart {self.name!r}: domain has {self.domain.dim} axes, chart has {n} coordinates")
        keys = {(i, j) for i in range(n) for j in range(i, n)}
        if set(self.metric_upper) != keys:
            raise ChartError(f"chart {self.name!r}: metric must give every component with i <= j")
        if self.complex_structure is not None:
            if n % 2:
                raise ChartError(f"chart {self.name!r}: a complex structure needs even dimension")
            if len(self.complex_structure) != n or any(len(r) != n for r in self.complex_structure):
                raise ChartError(f"chart {self.name!r}: complex structure must be {n}x{n}")
        for e in self._all_exprs():
            for sym, idx in symexpr.free_symbols(e):
                if idx >= n or self.coords[idx] != sym:
                    raise ChartError(f"chart {self.name!r}: expression uses unknown coordinate {sym!r}")

    @classmethod
    def from_strings(cls, name: str, coords: Sequence[str], metric: Sequence[Sequence[str]],
                     lower: Sequence[float], upper: Sequence[float], *, count: int = 100,
                     strategy: str = "grid", margin: float | None = None,
                     complex_structure: Sequence[Sequence[str]] | None = None) -> "Chart":
        """Parse a chart from expression strings.

        ``metric`` is the full ``n x n`` matrix; lower-triangle entries must be
        the same expressions as their mirror images (or empty strings).
        """
        coords = tuple(coords)
        n = len(coords)
        if len(metric) != n or any(len(row) != n for row in metric):
            raise ChartError(f"chart {name!r}: metric must be {n}x{n}")
        upper_part = {}
        for i in range(n):
            for j in range(i, n):
                upper_part[(i, j)] = symexpr.parse_expr(str(metric[i][j]), coords)
        for i in range(n):
            for j in range(i):
                src = metric[i][j]
                if src is None or str(src).strip() == "":
                    continue
                if symexpr.parse_expr(str(src), coords) is not upper_part[(j, i)]:
                    raise ChartError(f"chart {name!r}: metric entry ({i},{j}) differs from ({j},{i})")
        J = None
        if complex_structure is not None:
            J = tuple(tuple(symexpr.parse_expr(str(s), coords) for s in row) for row in complex_structure)
        dom = SampleDomain(tuple(lower), tuple(upper), count=count, strategy=strategy, margin=margin)
        return cls(name, coords, upper_part, dom, J)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def metric_expr(self, i: int, j: int) -> Expr:
        return self.metric_upper[(min(i, j), max(i, j))]

    def _all_exprs(self):
        yield from self.metric_upper.values()
        if self.complex_structure is not None:
            for row in self.complex_structure:
                yield from row

    def metric_strings(self) -> list[list[str]]:
        n = self.dim
        return [[symexpr.to_string(self.metric_expr(i, j)) for j in range(n)] for i in range(n)]

    def metric_derivative_exprs(self, order: int) -> list[Expr]:
        """Flattened derivative expressions ``d^order g`` in C order of ``(a.., i, j)``."""
        key = ("dg", order)
        if key not in self._cache:
            n = self.dim
            exprs = []
            for idx in itertools.product(range(n), repeat=order + 2):
                exprs.append(symexpr.derivative(self.metric_expr(idx[-2], idx[-1]), idx[:-2]))
            self._cache[key] = exprs
        return self._cache[key]

    def complex_structure_jet(self, points):
        """``(J, dJ)`` with ``J[..., i, j] = J^i_j`` and ``dJ[..., a, i, j]``."""
        if self.complex_structure is None:
            raise ChartError(f"chart {self.name!r} has no complex structure")
        n = self.dim
        pts = np.asarray(points, dtype=float)
        flat = [self.complex_structure[i][j] for i in range(n) for j in range(n)]
        J = symexpr.eval_many(flat, pts, n).reshape(pts.shape[:-1] + (n, n))
        dflat = [symexpr.diff_expr(e, a) for a in range(n) for e in flat]
        dJ = symexpr.eval_many(dflat, pts, n).reshape(pts.shape[:-1] + (n, n, n))
        return J, dJ

    def check_complex_structure(self, points, tol: float = 1e-10) -> None:
        """Raise unless ``J^2 = -1`` and ``g(J., J.) = g`` at every point."""
        J, _ = self.complex_structure_jet(points)
        g = self.evaluate_metric(points)
        eye = np.eye(self.dim)
        sq = np.einsum("...ij,...jk->...ik", J, J) + eye
        compat = np.einsum("...ai,...bj,...ab->...ij", J, J, g) - g
        if np.max(np.abs(sq), initial=0.0) > tol:
            raise ChartError(f"chart {self.name!r}: J^2 != -1 (max deviation {np.max(np.abs(sq)):.3e})")
        if np.max(np.abs(compat), initial=0.0) > tol:
            raise ChartError(f"chart {self.name!r}: g(J., J.) != g (max deviation {np.max(np.abs(compat)):.3e})")

    def evaluate_metric(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        n = self.dim
        return symexpr.eval_many(self.metric_derivative_exprs(0), pts, n).reshape(pts.shape[:-1] + (n, n))

    def check_positive_definite(self, g: np.ndarray, points) -> None:
        for k in range(1, self.dim + 1):
            minor = np.linalg.det(g[..., :k, :k])
            bad = ~(minor > 0.0)
            if np.any(bad):
                idx = tuple(np.argwhere(np.atleast_1d(bad))[0])
                pt = np.asarray(points, dtype=float)
                pt = pt if pt.ndim == 1 else pt[idx]
                raise ChartError(
                    f"chart {self.name!r}: metric not positive-definite at {pt.tolist()} "
                    f"(leading minor {k} = {np.atleast_1d(minor)[idx]:.3e})"
                )


@dataclass(frozen=True)
class TensorValue:
    """Numeric tensor at one point or a batch of points.

    ``signature`` is ``(upper, lower)``; the array's trailing
    ``upper + lower`` axes hold the components, upper slots first.
    """

    signature: tuple[int, int]
    data: np.ndarray
    point: np.ndarray

    def __post_init__(self):
        rank = sum(self.signature)
        n = np.shape(self.point)[-1]
        shape = np.shape(self.data)
        if rank and (len(shape) < rank or any(s != n for s in shape[len(shape) - rank:])):
            raise ValueError(f"tensor shape {shape} inconsistent with signature {self.signature} in dimension {n}")


@dataclass(frozen=True, eq=False)
class MetricJet:
    """Metric, its first three partials and its inverse at sample points."""

    chart: Chart
    point: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray
    d3g: np.ndarray | None
    ginv: np.ndarray

    @property
    def dim(self) -> int:
        return self.chart.dim

    @cached_property
    def dginv(self) -> np.ndarray:
        return -np.einsum("...ij,...ajk,...kl->...ail", self.ginv, self.dg, self.ginv)

    @cached_property
    def d2ginv(self) -> np.ndarray:
        gi, dgi = self.ginv, self.dginv
        return -(
            np.einsum("...bij,...ajk,...kl->...bail", dgi, self.dg, gi)
            + np.einsum("...ij,...bajk,...kl->...bail", gi, self.d2g, gi)
            + np.einsum("...ij,...ajk,...bkl->...bail", gi, self.dg, dgi)
        )

    @cached_property
    def gamma_lower(self) -> np.ndarray:
        """``Gamma_{l,ij}`` (first kind)."""
        dg = self.dg
        return 0.5 * (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg)

    @cached_property
    def dgamma_lower(self) -> np.ndarray:
        d2 = self.d2g
        return 0.5 * (np.einsum("...mijl->...mlij", d2) + np.einsum("...mjil->...mlij", d2) - d2)

    @cached_property
    def d2gamma_lower(self) -> np.ndarray:
        if self.d3g is None:
            raise ValueError("third-order jet required; build the jet with order=3")
        d3 = self.d3g
        return 0.5 * (np.einsum("...nmijl->...nmlij", d3) + np.einsum("...nmjil->...nmlij", d3) - d3)

    @cached_property
    def gamma(self) -> np.ndarray:
        return np.einsum("...kl,...lij->...kij", self.ginv, self.gamma_lower)

    @cached_property
    def dgamma(self) -> np.ndarray:
        return (np.einsum("...akl,...lij->...akij", self.dginv, self.gamma_lower)
                + np.einsum("...kl,...alij->...akij", self.ginv, self.dgamma_lower))

    @cached_property
    def d2gamma(self) -> np.ndarray:
        return (np.einsum("...bakl,...lij->...bakij", self.d2ginv, self.gamma_lower)
                + np.einsum("...akl,...blij->...bakij", self.dginv, self.dgamma_lower)
                + np.einsum("...bkl,...alij->...bakij", self.dginv, self.dgamma_lower)
                + np.einsum("...kl,...balij->...bakij", self.ginv, self.d2gamma_lower))

    @cached_property
    def riem(self) -> np.ndarray:
        G, dG = self.gamma, self.dgamma
        # half[k, l, i, j] = d_i Gamma^k_jl + Gamma^k_im Gamma^m_jl; antisymmetrising
        # in (i, j) afterwards makes R^k_lij = -R^k_lji hold bit for bit
        half = np.einsum("...ikjl->...klij", dG) + np.einsum("...kim,...mjl->...klij", G, G)
        return half - np.swapaxes(half, -1, -2)

    @cached_property
    def driem(self) -> np.ndarray:
        G, dG, d2G = self.gamma, self.dgamma, self.d2gamma
        return (np.einsum("...mikjl->...mklij", d2G) - np.einsum("...mjkil->...mklij", d2G)
                + np.einsum("...mkia,...ajl->...mklij", dG, G) + np.einsum("...kia,...majl->...mklij", G, dG)
                - np.einsum("...mkja,...ail->...mklij", dG, G) - np.einsum("...kja,...mail->...mklij", G, dG))

    @cached_property
    def ric(self) -> np.ndarray:
        return np.einsum("...ijil->...jl", self.riem)

    @cached_property
    def dric(self) -> np.ndarray:
        return np.einsum("...mijil->...mjl", self.driem)

    @cached_property
    def scalar(self) -> np.ndarray:
        return np.einsum("...jl,...jl->...", self.ginv, self.ric)

    @cached_property
    def dscalar(self) -> np.ndarray:
        return (np.einsum("...mjl,...jl->...m", self.dginv, self.ric)
                + np.einsum("...jl,...mjl->...m", self.ginv, self.dric))


def _as_batch(chart: Chart, p) -> np.ndarray:
    pts = np.asarray(p, dtype=float)
    if pts.ndim == 0 or pts.shape[-1] != chart.dim:
        raise ValueError(f"point shape {pts.shape} does not match chart {chart.name!r} of dimension {chart.dim}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    return pts


def metric_jet(chart: Chart, p, order: int = 3) -> MetricJet:
    """Evaluate ``g`` and its symbolic partials up to ``order`` (2 or 3) at ``p``.

    ``p`` is one point ``(n,)`` or a batch ``(..., n)``.  A metric that is not
    positive-definite at any point raises :class:`ChartError`.
    """
    if order not in (2, 3):
        raise ValueError("jet order must be 2 or 3")
    pts = _as_batch(chart, p)
    n = chart.dim
    batch = pts.shape[:-1]
    arrays = []
    for k in range(order + 1):
        vals = symexpr.eval_many(chart.metric_derivative_exprs(k), pts, n)
        arrays.append(vals.reshape(batch + (n,) * (k + 2)))
    g = arrays[0]
    chart.check_positive_definite(g, pts)
    ginv = np.linalg.inv(g)
    ginv = 0.5 * (ginv + np.swapaxes(ginv, -1, -2))
    return MetricJet(chart, pts, g, arrays[1], arrays[2], arrays[3] if order == 3 else None, ginv)


def fd_metric_jet(chart: Chart, p, step: float = 1e-3) -> MetricJet:
    """Second-order metric jet built from central differences of ``g`` alone.

    An oracle independent of symbolic differentiation; curvature assembled
    from it agrees with the symbolic pipeline to roughly ``step**2``.
    """
    pts = _as_batch(chart, p)
    n = chart.dim
    h = float(step)
    g = chart.evaluate_metric(pts)
    eye = np.eye(n)
    dg = np.empty(pts.shape[:-1] + (n, n, n))
    d2g = np.empty(pts.shape[:-1] + (n, n, n, n))
    for a in range(n):
        gp = chart.evaluate_metric(pts + h * eye[a])
        gm = chart.evaluate_metric(pts - h * eye[a])
        dg[..., a, :, :] = (gp - gm) / (2 * h)
        d2g[..., a, a, :, :] = (gp - 2 * g + gm) / h**2
        for b in range(a):
            gpp = chart.evaluate_metric(pts + h * (eye[a] + eye[b]))
            gpm = chart.evaluate_metric(pts + h * (eye[a] - eye[b]))
            gmp = chart.evaluate_metric(pts - h * (eye[a] - eye[b]))
            gmm = chart.evaluate_metric(pts - h * (eye[a] + eye[b]))
            mixed = (gpp - gpm - gmp + gmm) / (4 * h * h)
            d2g[..., a, b, :, :] = mixed
            d2g[..., b, a, :, :] = mixed
    chart.check_positive_definite(g, pts)
    return MetricJet(chart, pts, g, dg, d2g, None, np.linalg.inv(g))


def christoffel(jet: MetricJet) -> TensorValue:
    """Christoffel symbols ``Gamma^k_ij`` of the Levi-Civita connection."""
    return TensorValue((1, 2), jet.gamma, jet.point)


def christoffel_partials(jet: MetricJet) -> TensorValue:
    """``d_a Gamma^k_ij`` stored as ``[..., a, k, i, j]``."""
    return TensorValue((1, 3), jet.dgamma, jet.point)


def christoffel_second_partials(jet: MetricJet) -> np.ndarray:
    return jet.d2gamma


def riemann(jet: MetricJet) -> TensorValue:
    """Riemann tensor ``Riem[k, l, i, j]``; see the module docstring for slots."""
    return TensorValue((1, 3), jet.riem, jet.point)


def riemann_partials(jet: MetricJet) -> np.ndarray:
    return jet.driem


def lowered_riemann(jet: MetricJet) -> np.ndarray:
    """``R_{klij} = g_km Riem[m, l, i, j]``."""
    return np.einsum("...km,...mlij->...klij", jet.g, jet.riem)


def ricci(jet: MetricJet) -> TensorValue:
    return TensorValue((0, 2), jet.ric, jet.point)


def ricci_partials(jet: MetricJet) -> np.ndarray:
    return jet.dric


def scalar_curvature(jet: MetricJet):
    s = jet.scalar
    return float(s) if np.ndim(s) == 0 else s


def scalar_curvature_gradient(jet: MetricJet) -> TensorValue:
    """``d_m s`` (needs a third-order jet)."""
    return TensorValue((0, 1), jet.dscalar, jet.point)


def sectional_curvature(jet: MetricJet, a: int = 0, b: int = 1):
    """Sectional curvature of the coordinate plane ``(d_a, d_b)``."""
    R = lowered_riemann(jet)
    num = R[..., a, b, a, b]
    g = jet.g
    den = g[..., a, a] * g[..., b, b] - g[..., a, b] ** 2
    return num / den


def covariant_derivative(jet: MetricJet, value, d1, kind: str) -> TensorValue:
    """Levi-Civita derivative ``nabla_a T`` from components and their partials.

    ``kind`` is ``scalar`` (``d1[a]``), ``oneform`` (``value[j]``,
    ``d1[a, j]``), ``vector`` (``value[k]``, ``d1[a, k]``) or ``sym2``
    (``value[i, j]``, ``d1[a, i, j]``).  The derivative slot comes first.
    """
    G = jet.gamma
    if kind == "scalar":
        return TensorValue((0, 1), np.asarray(d1), jet.point)
    if kind == "oneform":
        data = d1 - np.einsum("...kaj,...k->...aj", G, value)
        return TensorValue((0, 2), data, jet.point)
    if kind == "vector":
        data = d1 + np.einsum("...kam,...m->...ak", G, value)
        return TensorValue((1, 1), data, jet.point)
    if kind == "sym2":
        data = (d1 - np.einsum("...mai,...mj->...aij", G, value)
                - np.einsum("...maj,...im->...aij", G, value))
        return TensorValue((0, 3), data, jet.point)
    raise ValueError(f"unknown tensor kind {kind!r}")


def hessian(jet: MetricJet, dF, d2F) -> TensorValue:
    """``nabla_i nabla_j F = d_i d_j F - Gamma^k_ij d_k F``."""
    data = d2F - np.einsum("...kij,...k->...ij", jet.gamma, dF)
    return TensorValue((0, 2), data, jet.point)


def bianchi_residual(jet: MetricJet):
    """Pointwise g-norm of ``2 g^jk nabla_k Ric_jl - d_l s`` (contracted Bianchi)."""
    G, ric = jet.gamma, jet.ric
    nabla_ric = (jet.dric - np.einsum("...maj,...ml->...ajl", G, ric)
                 - np.einsum("...mal,...jm->...ajl", G, ric))
    div_ric = np.einsum("...jk,...kjl->...l", jet.ginv, nabla_ric)
    resid = 2.0 * div_ric - jet.dscalar
    return g_norm(TensorValue((0, 1), resid, jet.point), jet)


def g_norm(t: TensorValue, jet: MetricJet):
    """Full metric contraction ``sqrt(T . T)``; upper slots use g, lower use g^-1."""
    up, low = t.signature
    data = np.asarray(t.data)
    rank = up + low
    if rank == 0:
        out = np.abs(data)
        return float(out) if np.ndim(out) == 0 else out
    other = data
    nb = data.ndim - rank
    for slot in range(rank):
        m = jet.g if slot < up else jet.ginv
        axis = nb + slot
        # contract component slot with the metric, keeping the axis in place
        moved = np.moveaxis(other, axis, -1)
        moved = np.einsum("...b,...ab->...a", moved, _broadcast_metric(m, moved.ndim - 1, nb))
        other = np.moveaxis(moved, -1, axis)
    sq = np.sum((data * other).reshape(data.shape[:nb] + (-1,)), axis=-1)
    out = np.sqrt(np.maximum(sq, 0.0))
    return float(out) if np.ndim(out) == 0 else out


def _broadcast_metric(m: np.ndarray, lead: int, nb: int) -> np.ndarray:
    # metric has batch dims nb; insert singleton axes for the other component slots
    extra = lead - nb
    return m.reshape(m.shape[:nb] + (1,) * extra + m.shape[-2:])
