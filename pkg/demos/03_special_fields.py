# %% [markdown]
# # Killing, conformal, holomorphic and harmonic-transformation residuals
#
# Each residual is a tensor that vanishes exactly when the field has the
# property; we report its pointwise g-norm.

# %%
from chartgeom import (
    conformal_residual,
    get_entry,
    holomorphic_residual,
    iht_residual,
    killing_residual,
    metric_jet,
    sample_domain,
)

entry = get_entry("round-sphere-S2")
jet = metric_jet(entry.chart(), sample_domain(entry.chart(), count=100))
rotation, F1 = entry.fields["rotation"], entry.fields["F1"]

# %%
print("rotation  killing   %.2e" % killing_residual(jet, rotation).max_norm)
print("rotation  iht       %.2e" % iht_residual(jet, rotation).max_norm)
print("grad F1   killing   %.2e  (not Killing)" % killing_residual(jet, F1).max_norm)
print("grad F1   conformal %.2e" % conformal_residual(jet, F1).max_norm)
print("grad F1   iht       %.2e" % iht_residual(jet, F1).max_norm)

# %%
# on a Kähler chart, holomorphic fields are exactly the harmonic transformations
k = get_entry("flat-kähler-plane")
kjet = metric_jet(k.chart(), sample_domain(k.chart(), count=100))
for name in ("holomorphic", "non-holomorphic"):
    f = k.fields[name]
    print(f"{name:16s} holomorphic {holomorphic_residual(kjet, f).max_norm:.2e}"
          f"  iht {iht_residual(kjet, f).max_norm:.2e}")
