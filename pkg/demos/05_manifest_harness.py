# %% [markdown]
# # Manifest-driven checks
#
# A manifest bundles charts, fields and checks as JSON.  The harness samples
# each check, evaluates its residual and writes a deterministic report.

# %%
import json

from chartgeom import get_entry, load_manifest, report_text, run_manifest

data = get_entry("flat-plane").export()
data["checks"] = [
    {"id": "rotation-killing", "kind": "killing", "field": "rotation"},
    {"id": "dilation-killing", "kind": "killing", "field": "dilation"},
    {"id": "dilation-conformal", "kind": "conformal", "field": "dilation"},
]
manifest = load_manifest(data)

# %%
reports = run_manifest(manifest)
print(report_text(reports, manifest))

# %%
# the dilation is not Killing: |L_xi g| = |2 g| = sqrt(8) at every point
bad = next(r for r in reports if r.check_id == "dilation-killing")
print(bad.status, bad.max_residual, 8 ** 0.5)
print(json.dumps(bad.to_dict(), indent=2)[:400])
