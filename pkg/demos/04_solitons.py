# %% [markdown]
# # Ricci solitons
#
# Convention: `-2 Ric = L_xi g + 2 lambda g`, shrinking when `lambda < 0`.

# %%
import numpy as np

from chartgeom import (
    classify,
    get_entry,
    hamilton_identity_residual,
    metric_jet,
    sample_domain,
    soliton_residual,
    trace_identity_residual,
)

for entry_name in ("gaussian-shrinker", "cigar"):
    for label, spec in get_entry(entry_name).soliton_specs().items():
        jet = metric_jet(spec.chart, sample_domain(spec.chart, count=100), order=3)
        line = f"{label:18s} lambda={spec.lam:+.1f} {classify(spec).value:9s} residual {soliton_residual(spec, jet).max_norm:.1e}"
        if spec.kind == "gradient":
            line += f"  trace {np.max(trace_identity_residual(spec, jet)):.1e}"
            line += f"  hamilton {hamilton_identity_residual(spec, jet).max_norm:.1e}"
        print(line)
