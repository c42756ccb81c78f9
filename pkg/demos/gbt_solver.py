"""Solve a corner-modified chain with the generalized Bloch machinery.

The chain is never diagonalized densely inside the solver.  The
eigenvalues come from zeros of the boundary matrix built on the 4R bulk
solutions.  A dense eigvals call is used only to check the answer.
"""

import numpy as np
from scipy.optimize import linear_sum_assignment

from kreinstab.gbt import bulk_solution_basis, characteristic_roots, eigen_search
from kreinstab.models import bkc_bbt

spec = bkc_bbt(8, 1.0, 0.4, 0.6, 1.1)
w = 0.3 + 0.05j
rs = characteristic_roots(spec, w)
print(f"at omega = {w}: nonzero roots {[(complex(np.round(z, 6)), m) for z, m in rs.roots]}, s0 = {rs.s0}")
print(f"bulk solutions: {bulk_solution_basis(spec, w).count()} (4R = {4 * spec.R})")

res = eigen_search(spec)
dense = np.linalg.eigvals(spec.dense())
C = np.abs(dense[:, None] - res.eigenvalues[None, :])
r, c = linear_sum_assignment(C)
print(f"found {len(res.eigenvalues)} eigenvalues, complete={res.complete}, "
      f"{res.evaluations} boundary-matrix evaluations")
print(f"max gap to dense eigvals: {C[r, c].max():.2e}")
for om, m in res.distinct:
    print(f"  {complex(om):.8f}  x{m}")
