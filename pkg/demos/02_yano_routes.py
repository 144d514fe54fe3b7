# %% [markdown]
# # Three routes to the same operator on 1-forms
#
# `delta delta* - delta* delta` can be assembled directly, from the Hodge
# Laplacian (`Delta - 2 Ric*`), or from the rough Laplacian
# (`nabla* nabla - Ric*`).  Agreement of the three is a strong check of the
# sign conventions.

# %%
import itertools

import numpy as np

from chartgeom import FieldDef, TensorValue, g_norm, get_entry, metric_jet, sample_domain, yano_box
from chartgeom.operators import YANO_ROUTES

chart = get_entry("cigar").chart()
jet = metric_jet(chart, sample_domain(chart, count=200))
theta = FieldDef.from_strings("theta", chart, "oneform", ["x^2*y", "1 + y^2"])

# %%
out = {route: yano_box(jet, theta, route).value.data for route in YANO_ROUTES}
for a, b in itertools.combinations(YANO_ROUTES, 2):
    diff = np.asarray(g_norm(TensorValue((0, 1), out[a] - out[b], jet.point), jet))
    print(f"{a:>7s} vs {b:<7s} max discrepancy {diff.max():.2e}")
