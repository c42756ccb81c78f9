"""Walk the cavity-QED coupling through the stability boundary.

Below y_+ the four frequencies are real and carry definite Krein
signatures.  At y_+ two opposite-signature modes meet, the tracked KPR
drops to zero, and the pair leaves the real axis.
"""

import numpy as np

from kreinstab.models import cavity_boundary
from kreinstab.scan import spectral_flow

x = 1.0
yb = float(cavity_boundary(x))
sig = np.linspace(0.6 * yb, 1.4 * yb, 9)
tr = spectral_flow("cavity_qed", {"x": x}, lambda s: {"y": s}, sig)

print(f"x = {x}, boundary y_+ = {yb:.6f}")
print(f"{'y':>9} | " + " | ".join(f"{'omega':>19} {'sgn':>3} {'kpr':>6}" for _ in range(2)))
for k, y in enumerate(sig):
    # the two positive-frequency tracks are enough to see the collision
    cols = np.argsort(-tr.eigenvalues[k].real)[:2]
    cells = [f"{tr.eigenvalues[k, c]:19.5f} {tr.signatures[k, c]:3d} {tr.kpr[k, c]:6.3f}" for c in cols]
    print(f"{y:9.5f} | " + " | ".join(cells))
for step, kind, detail in tr.annotations:
    print(f"step {step}: {kind}: {detail}")
