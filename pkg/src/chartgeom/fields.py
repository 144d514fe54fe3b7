"""Pointwise residuals for Killing, conformal, holomorphic and harmonic-transformation fields.

Each classifier returns the residual tensor and its g-norm; deciding what
counts as zero is left to the caller (see :mod:`chartgeom.harness`).  The
conditions are local PDEs; global converses that need compactness are not
checked here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ChartError, MetricJet, TensorValue, g_norm
from .operators import (
    FieldDef,
    FieldJet,
    _codiff,
    _hodge,
    _ricci_star_form,
    _yano,
    as_oneform,
    as_vector,
    lie_metric,
)

__all__ = [
    "ResidualSample",
    "killing_residual",
    "conformal_residual",
    "holomorphic_residual",
    "iht_residual",
]


@dataclass(frozen=True)
class ResidualSample:
    """Residual tensor at sample points with its pointwise g-norm.

    ``routes`` carries the g-norms of alternative assemblies when a
    classifier cross-checks itself.
    """

    point: np.ndarray
    residual: TensorValue
    norm: np.ndarray
    routes: dict = field(default_factory=dict)

    @property
    def max_norm(self) -> float:
        return float(np.max(self.norm))


def _sample(jet: MetricJet, t: TensorValue, **routes) -> ResidualSample:
    return ResidualSample(jet.point, t, np.asarray(g_norm(t, jet)), routes)


def killing_residual(jet: MetricJet, xi) -> ResidualSample:
    """``L_xi g``; vanishes exactly for infinitesimal isometries."""
    return _sample(jet, lie_metric(jet, xi))


def conformal_residual(jet: MetricJet, xi) -> ResidualSample:
    """Trace-free part of ``L_xi g``: ``L_xi g + (2/n)(d* theta) g``."""
    L = lie_metric(jet, xi).data
    d_star, _ = _codiff(as_oneform(xi, jet), jet)
    n = jet.dim
    resid = L + (2.0 / n) * d_star[..., None, None] * jet.g
    return _sample(jet, TensorValue((0, 2), resid, jet.point))


def holomorphic_residual(jet: MetricJet, xi) -> ResidualSample:
    """``(L_xi J)^i_j = xi^k d_k J^i_j - J^k_j d_k xi^i + J^i_k d_j xi^k``."""
    if jet.chart.complex_structure is None:
        raise ChartError(f"chart {jet.chart.name!r} has no complex structure")
    v = as_vector(xi, jet)
    J, dJ = jet.chart.complex_structure_jet(jet.point)
    resid = (np.einsum("...k,...kij->...ij", v.value, dJ)
             - np.einsum("...kj,...ki->...ij", J, v.d1)
             + np.einsum("...ik,...jk->...ij", J, v.d1))
    return _sample(jet, TensorValue((1, 1), resid, jet.point))


def iht_residual(jet: MetricJet, xi) -> ResidualSample:
    """``Delta theta - 2 Ric* theta`` for ``theta = xi_flat``.

    The residual is the Hodge assembly; ``routes`` also reports the g-norm
    of the direct Yano assembly and of the difference between the two.
    """
    th = xi if isinstance(xi, FieldJet) and xi.kind == "oneform" else as_oneform(xi, jet)
    hodge = _hodge(th, jet) - 2.0 * _ricci_star_form(jet, th.value)
    direct = _yano(th, jet, "direct")
    t = TensorValue((0, 1), hodge, jet.point)
    return _sample(
        jet,
        t,
        direct=np.asarray(g_norm(TensorValue((0, 1), direct, jet.point), jet)),
        discrepancy=np.asarray(g_norm(TensorValue((0, 1), hodge - direct, jet.point), jet)),
    )
