"""Ricci solitons ``-2 Ric = L_xi g + 2 lambda g`` and the gradient-soliton identities.

Sign convention: shrinking solitons have ``lambda < 0``.  A soliton here,
``(g, xi, lambda)``, corresponds to the more common normalisation
``Ric + (1/2) L_X g = rho g`` through ``X = xi`` and ``rho = -lambda``; for
gradient solitons ``xi = grad F`` and ``Ric + Hess F = -lambda g``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .fields import ResidualSample, _sample, iht_residual
from .geometry import MetricJet, TensorValue
from .operators import FieldDef, FieldJet, as_vector, field_jet, laplacian, laplacian_gradient, lie_metric

__all__ = [
    "SolitonClass",
    "SolitonSpec",
    "HAMILTON_SIGN",
    "classify",
    "soliton_residual",
    "trace_identity_residual",
    "hamilton_identity_residual",
    "schur_diagnostic",
    "iht_of_soliton_residual",
    "ricci_quadratic_form",
]

# ds = HAMILTON_SIGN * 2 Ric*(dF) on gradient solitons; fixed against the cigar (see tests).
HAMILTON_SIGN = 1.0


class SolitonClass(str, enum.Enum):
    STEADY = "steady"
    SHRINKING = "shrinking"
    EXPANDING = "expanding"


@dataclass(frozen=True)
class SolitonSpec:
    """A candidate soliton: generic carries a vector ``field``, gradient a scalar potential."""

    field: FieldDef
    lam: float
    kind: str = "generic"

    def __post_init__(self):
        if self.kind not in ("generic", "gradient"):
            raise ValueError(f"unknown soliton kind {self.kind!r}")
        if not np.isfinite(self.lam):
            raise ValueError("lambda must be finite")
        if self.kind == "gradient" and self.field.kind != "scalar":
            raise ValueError("a gradient soliton needs a scalar potential")
        if self.kind == "generic" and self.field.kind not in ("vector", "oneform"):
            raise ValueError("a generic soliton needs a vector field")

    @property
    def chart(self):
        return self.field.chart


def classify(spec_or_lambda) -> SolitonClass:
    lam = spec_or_lambda.lam if isinstance(spec_or_lambda, SolitonSpec) else float(spec_or_lambda)
    if lam == 0.0:
        return SolitonClass.STEADY
    return SolitonClass.SHRINKING if lam < 0.0 else SolitonClass.EXPANDING


def _potential(spec: SolitonSpec, jet: MetricJet) -> FieldJet:
    if spec.kind != "gradient":
        raise ValueError("this identity needs a gradient soliton")
    return field_jet(spec.field, jet, order=3)


def soliton_residual(spec: SolitonSpec, jet: MetricJet) -> ResidualSample:
    """``2 Ric + L_xi g + 2 lambda g``, or ``2 Ric + 2 Hess F + 2 lambda g`` for gradient specs."""
    if spec.kind == "gradient":
        F = field_jet(spec.field, jet, order=2)
        hess = F.d2 - np.einsum("...kij,...k->...ij", jet.gamma, F.d1)
        drift = 2.0 * hess
    else:
        drift = lie_metric(jet, spec.field).data
    resid = 2.0 * jet.ric + drift + 2.0 * spec.lam * jet.g
    return _sample(jet, TensorValue((0, 2), resid, jet.point))


def trace_identity_residual(spec: SolitonSpec, jet: MetricJet) -> np.ndarray:
    """``|Delta F - s - n lambda|`` with ``Delta = -trace Hess``."""
    F = _potential(spec, jet)
    return np.abs(laplacian(jet, F).data - jet.scalar - jet.dim * spec.lam)


def hamilton_identity_residual(spec: SolitonSpec, jet: MetricJet) -> ResidualSample:
    """``ds - 2 Ric*(dF)``; needs a third-order metric jet."""
    F = _potential(spec, jet)
    ric_df = np.einsum("...kl,...lj,...j->...k", jet.ric, jet.ginv, F.d1)
    resid = jet.dscalar - HAMILTON_SIGN * 2.0 * ric_df
    return _sample(jet, TensorValue((0, 1), resid, jet.point))


def schur_diagnostic(spec: SolitonSpec, jet: MetricJet) -> np.ndarray:
    """g-norm of ``ds - 2 d(Delta F)``.

    Reported for inspection only: combined with the trace identity it can
    only vanish where ``ds = 0``.
    """
    F = _potential(spec, jet)
    resid = jet.dscalar - 2.0 * laplacian_gradient(jet, F).data
    return _sample(jet, TensorValue((0, 1), resid, jet.point)).norm


def iht_of_soliton_residual(spec: SolitonSpec, jet: MetricJet) -> ResidualSample:
    """Harmonic-transformation residual of the soliton field (``grad F`` for gradient specs)."""
    return iht_residual(jet, spec.field)


def ricci_quadratic_form(jet: MetricJet, xi) -> np.ndarray:
    """``Ric(xi, xi)``."""
    v = as_vector(xi, jet).value if isinstance(xi, (FieldDef, FieldJet)) else np.asarray(xi, dtype=float)
    return np.einsum("...ij,...i,...j->...", jet.ric, v, v)
