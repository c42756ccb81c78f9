"""Coarse stability map of the twisted bosonic Kitaev chain in (phi, s).

Prints the numeric verdict grid next to the closed-form boundaries
cos phi = +-sech(N r) (odd N) and reports disagreements away from the
boundary.
"""

import numpy as np

from kreinstab.models import bkc_phase_boundary_oracle
from kreinstab.scan import Axis, stability_scan

N, t, Delta = 5, 1.0, 0.25
axes = [Axis("s", 0.0, 1.0, 0.1), Axis("phi", 0.0, np.pi, np.pi / 24)]
g = stability_scan("bkc", {"N": N, "t": t, "Delta": Delta}, axes)
pb = bkc_phase_boundary_oracle(N, t, Delta)

print(f"N={N}, t={t}, Delta={Delta}: phi_- = {float(pb.phi_minus(1.0)):.4f}")
print("rows: s from 0 to 1; columns: phi from 0 to pi; '#' stable, '.' unstable")
S, P = np.meshgrid(axes[0].values(), axes[1].values(), indexing="ij")
oracle = pb.stable(S, P)
for i, s in enumerate(axes[0].values()):
    line = "".join("#" if v == "stable" else "." for v in g.verdict[i])
    print(f"s={s:3.1f} {line}")
off = (oracle != g.stable_mask()) & ~g.boundary()
print(f"cells disagreeing with the closed form away from the boundary: {int(off.sum())}")
