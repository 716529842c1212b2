"""Deterministic interior sampling of polytopes and cones.

Every sampler takes an explicit seed; identical seeds give identical
point sets.  Points are pulled away from the boundary so that finite
difference stencils around them stay inside the domain.
"""

from __future__ import annotations

import numpy as np

__all__ = ["polytope_interior_points", "cone_interior_points", "bw_points"]


def polytope_interior_points(P, count: int, seed: int = 0, pull: float = 0.2) -> np.ndarray:
    """Random convex combinations of the vertices, pulled to the centroid.

    With pull in (0, 1), every facet functional stays bounded below by
    pull times its centroid value.
    """
    rng = np.random.default_rng(seed)
    verts = np.array([[float(c) for c in v] for v in P.vertices])
    centroid = verts.mean(axis=0)
    weights = rng.dirichlet(np.ones(len(verts)), size=count)
    pts = weights @ verts
    return centroid + (1.0 - pull) * (pts - centroid)


def cone_interior_points(C, count: int, seed: int = 0, lo: float = 0.3,
                         hi: float = 1.0) -> np.ndarray:
    """Strictly positive combinations of the extreme rays."""
    rng = np.random.default_rng(seed)
    rays = np.array([[float(c) for c in r] for r in C.rays])
    coeffs = rng.uniform(lo, hi, size=(count, len(rays)))
    return coeffs @ rays


def bw_points(P, count: int, seed: int = 0, zlo: float = 0.5, zhi: float = 2.0,
              pull: float = 0.2) -> np.ndarray:
    """Points (x, z) with x/z interior to P and z in [zlo, zhi]."""
    rng = np.random.default_rng(seed)
    base = polytope_interior_points(P, count, seed=rng.integers(2**31), pull=pull)
    z = rng.uniform(zlo, zhi, size=count)
    return np.column_stack([base * z[:, None], z])
