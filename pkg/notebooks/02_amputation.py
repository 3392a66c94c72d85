"""
Simulating missingness: MCAR, MAR and MNAR
==========================================

Amputation blanks cells of a complete matrix.  MCAR blanks each cell with
probability t.  MAR additionally gates a set of columns on a randomly chosen
anchor column being at or below its median.  MNAR gates columns on their
own value.  Gated columns therefore lose about t/2 of their cells.
"""
import numpy as np

from fsimpute import AmputationConfig, RngStream, ampute

x = RngStream(0).uniform(size=(10000, 10))

for mech, t in (("MCAR", 0.3), ("MAR", 0.5), ("MNAR", 0.5)):
    res = ampute(x, AmputationConfig(mech, t, RngStream(1).child(mech)))
    frac = res.raw_missing.mean(axis=0)
    print(f"{mech}: overall {res.raw_missing.mean():.3f}")
    print("   per column", np.round(frac, 3))
    gated = res.provenance.get("gated")
    if gated is not None:
        print("   gated columns", gated, "anchor", res.provenance.get("anchor"))

# MNAR only hides values that sit at or below their column median
res = ampute(x, AmputationConfig("MNAR", 0.5, RngStream(2)))
j = res.provenance["gated"][0]
print("largest hidden value in column", j, "is", x[res.raw_missing[:, j], j].max().round(3),
      "median", np.median(x[:, j]).round(3))
