"""Numerical tolerance profile shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = ["Tolerances", "DEFAULT_TOL", "matrix_scale"]


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used for structural checks, clustering and rank decisions.

    All absolute thresholds are multiplied by ``matrix_scale(G)`` at the
    point of use.
    """

    validation: float = 1e-10  # Hermiticity / symmetry / symmetry-residual checks
    real_tol: float = 1e-8  # |Im w| below this is treated as real
    cluster_tol: float = 1e-8  # single-linkage radius for eigenvalue clusters
    defect_tol: float = 1e-10  # bound on cluster polynomial coefficients
    quartet_tol: float = 1e-8  # partner matching inside a quartet
    rank_tol: float = 1e-8  # relative singular-value threshold
    gap_floor: float = 1e2  # singular-value ratio needed to commit a rank
    null_tol: float = 1e-8  # tau3-null decision for Gram eigenvalues
    root_cluster_tol: float = 1e-7  # merge characteristic roots closer than this
    zero_root_tol: float = 1e-10  # |z| below this counts as z = 0
    residual_tol: float = 1e-8  # eigen-pair residual acceptance
    continuity_floor: float = 0.3  # minimal overlap for a continuous track

    def with_(self, **kw) -> "Tolerances":
        return replace(self, **kw)


DEFAULT_TOL = Tolerances()


def matrix_scale(G) -> float:
    """max(1, largest absolute entry)."""
    G = np.asarray(G)
    if G.size == 0:
        return 1.0
    return float(max(1.0, np.max(np.abs(G))))
