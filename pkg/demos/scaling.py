"""
Runtime against signal length
=============================

Per-iteration cost of gradient descent grows linearly with the number of
samples.  Natural gradient pays for two dense solves per iteration, whose
share of the time grows with the size of the source block.
"""

# %%
import numpy as np

from _paths import OUT
from igbss.cli import run_benchmark
from igbss.io import write_json

columns, rows = run_benchmark("scaling", orders=[1], seeds=[0], samples=[100, 200, 400, 800])
for r in rows:
    phases = "  ".join("%s %.4f" % (k[:-2], r[k]) for k in ("p_eta_s", "fisher_s", "solve_s"))
    print("M=%4d %s  %.5f s/iteration  phase totals: %s" % (r["samples"], r["optimizer"], r["per_iter_s"], phases))

# %%
gd = [(r["samples"], r["per_iter_s"]) for r in rows if r["optimizer"] == "gd"]
M, t = np.array(gd).T
slope, intercept = np.polyfit(M, t, 1)
print("GD: %.3g s per sample per iteration, %.3g s fixed" % (slope, intercept))

# %%
write_json(OUT / "scaling.json", {"columns": columns, "rows": rows})
print("wrote", OUT / "scaling.json")
