"""Numerical differential geometry on coordinate charts.

Symbolic metrics and fields, curvature pipelines, Laplacians on 1-forms,
Lie derivatives, Killing / conformal / holomorphic / harmonic-transformation
residuals, Ricci-soliton checks, a built-in catalog of exact solutions and
a manifest-driven verification harness.
"""

from .geometry import (
    Chart,
    ChartError,
    MetricJet,
    SampleDomain,
    TensorValue,
    bianchi_residual,
    christoffel,
    fd_metric_jet,
    g_norm,
    metric_jet,
    ricci,
    riemann,
    scalar_curvature,
    sectional_curvature,
)
from .symexpr import DomainError, Expr, ExprError, ParseError, derivative, eval_expr, parse_expr, to_string
from .operators import (
    FieldDef,
    bochner_laplacian_1form,
    codifferential,
    delta_star,
    delta_sym,
    exterior_derivative,
    hodge_laplacian_1form,
    laplacian,
    lie_connection,
    lie_connection_trace,
    lie_metric,
    ricci_star,
    tension_field,
    tension_field_identity,
    yano_box,
)
from .fields import ResidualSample, conformal_residual, holomorphic_residual, iht_residual, killing_residual
from .soliton import (
    SolitonClass,
    SolitonSpec,
    classify,
    hamilton_identity_residual,
    iht_of_soliton_residual,
    ricci_quadratic_form,
    soliton_residual,
    trace_identity_residual,
)
from .manifest import Manifest, ManifestError, load_manifest
from .harness import CheckReport, report_json, report_text, run_manifest, sample_domain
from .catalog import CatalogEntry, catalog_entries, get_entry

__version__ = "0.1.0"
