"""Metric blocks and scalar curvature of Hessian metrics.

The metric determined by a potential s is block diagonal: Hess(s) on the
momentum factor and its inverse on the angle factor.  Scalar curvature
is the double divergence -sum_{j,k} d2 s^{jk} / dx_j dx_k of the inverse
Hessian, computed by central finite differences of the analytically
inverted Hessian; one level of Richardson extrapolation is applied by
default.  Everything here is pure evaluation, deterministic for a fixed
step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .polytope import LabeledPolytope
from .potential import BoothbyWangPotential, DomainError, Potential
from .sampling import cone_interior_points, polytope_interior_points

__all__ = [
    "CurvatureError",
    "CurvatureSample",
    "EinsteinReport",
    "BWRelationSample",
    "BWRelationReport",
    "scalar_curvature",
    "curvature_sample",
    "metric_blocks",
    "curvature_grid",
    "write_curvature_csv",
    "bw_curvature_relation",
    "einstein_verify",
]

DEFAULT_STEP = 1e-4
MAX_SHRINK = 20

EINSTEIN_NOTE = (
    "Constant scalar curvature at the target is the property verified; "
    "Ricci curvature is not computed, so this report does not by itself "
    "certify an Einstein metric."
)


class CurvatureError(RuntimeError):
    """Curvature evaluation failed (indefinite Hessian or no usable stencil)."""


@dataclass(frozen=True)
class CurvatureSample:
    """Everything the metric knows at one point."""

    point: tuple
    S: np.ndarray
    S_inv: np.ndarray
    sc: float
    raw_sc: float
    reeb: tuple
    step: float


@dataclass(frozen=True)
class EinsteinReport:
    points: tuple
    sc_values: tuple
    target: float
    tolerance: float
    max_abs_deviation: float
    mean_abs_deviation: float
    verdict: bool
    note: str = EINSTEIN_NOTE

    def to_dict(self) -> dict:
        return {
            "count": len(self.points),
            "target": self.target,
            "tolerance": self.tolerance,
            "max_abs_deviation": self.max_abs_deviation,
            "mean_abs_deviation": self.mean_abs_deviation,
            "sc_min": min(self.sc_values),
            "sc_max": max(self.sc_values),
            "verdict": bool(self.verdict),
            "note": self.note,
        }


@dataclass(frozen=True)
class BWRelationSample:
    point: tuple
    lifted_sc: float
    base_sc: float
    defect: float


@dataclass(frozen=True)
class BWRelationReport:
    samples: tuple
    max_defect: float
    tolerance: float
    ok: bool

    def to_dict(self) -> dict:
        return {
            "count": len(self.samples),
            "max_defect": self.max_defect,
            "tolerance": self.tolerance,
            "ok": bool(self.ok),
        }


def _pd_inverse(S: np.ndarray, where) -> np.ndarray:
    try:
        np.linalg.cholesky((S + S.T) / 2.0)
    except np.linalg.LinAlgError:
        raise CurvatureError(f"Hessian not positive definite at {tuple(where)}")
    return np.linalg.inv(S)


def _stencil_offsets(n: int):
    offsets = [(0,) * n]
    for j in range(n):
        for sj in (1, -1):
            o = [0] * n
            o[j] = sj
            offsets.append(tuple(o))
    for j in range(n):
        for k in range(j + 1, n):
            for sj in (1, -1):
                for sk in (1, -1):
                    o = [0] * n
                    o[j] = sj
                    o[k] = sk
                    offsets.append(tuple(o))
    return offsets


def _sc_fd(s: Potential, x: np.ndarray, h: np.ndarray, cache: dict) -> float:
    n = x.size

    def W(offset):
        p = x + np.asarray(offset, dtype=float) * h
        key = p.tobytes()
        if key not in cache:
            cache[key] = _pd_inverse(s.hessian_matrix(p), p)
        return cache[key]

    total = 0.0
    W0 = W((0,) * n)
    for j in range(n):
        up = [0] * n
        up[j] = 1
        dn = [0] * n
        dn[j] = -1
        total += (W(tuple(up))[j, j] - 2.0 * W0[j, j] + W(tuple(dn))[j, j]) / h[j] ** 2
    for j in range(n):
        for k in range(j + 1, n):
            acc = 0.0
            for sj in (1, -1):
                for sk in (1, -1):
                    o = [0] * n
                    o[j] = sj
                    o[k] = sk
                    acc += sj * sk * W(tuple(o))[j, k]
            total += 2.0 * acc / (4.0 * h[j] * h[k])
    return -total


def _fit_step(s: Potential, x: np.ndarray, step: float, scale: float,
              max_shrink: int) -> np.ndarray:
    """Largest h = step * max(1,|x|) * 2^-i whose full stencil is interior."""
    base = step * np.maximum(1.0, np.abs(x))
    offsets = _stencil_offsets(x.size)
    for i in range(max_shrink + 1):
        h = base * 0.5 ** i
        if all(s.contains(x + np.asarray(o, dtype=float) * h * scale) for o in offsets):
            return h
    raise CurvatureError(
        f"stencil cannot be fit inside the domain at {tuple(x)} "
        f"after {max_shrink} shrinks")


def curvature_sample(s: Potential, x, step: float = DEFAULT_STEP,
                     richardson: bool = True,
                     max_shrink: int = MAX_SHRINK) -> CurvatureSample:
    """Metric data and scalar curvature at an interior point.

    With Richardson on, the reported value combines passes at steps h and
    2h as (4 Sc(h) - Sc(2h)) / 3, cancelling the h^2 truncation term while
    keeping the fine evaluations at the nominal step; raw_sc is the plain
    step-h value.
    """
    xf = np.asarray(x, dtype=float)
    if not s.contains(xf):
        raise DomainError(f"point {tuple(xf)} is not interior")
    h = _fit_step(s, xf, step, 2.0 if richardson else 1.0, max_shrink)
    cache: dict = {}
    raw = _sc_fd(s, xf, h, cache)
    if richardson:
        coarse = _sc_fd(s, xf, 2.0 * h, cache)
        sc = (4.0 * raw - coarse) / 3.0
    else:
        sc = raw
    if not math.isfinite(sc):
        raise CurvatureError(f"scalar curvature not finite at {tuple(xf)}")
    S = s.hessian_matrix(xf)
    S_inv = _pd_inverse(S, xf)
    return CurvatureSample(point=tuple(float(c) for c in xf), S=S, S_inv=S_inv,
                           sc=float(sc), raw_sc=float(raw),
                           reeb=tuple(float(c) for c in 2.0 * (S @ xf)),
                           step=float(h.min()))


def scalar_curvature(s: Potential, x, step: float = DEFAULT_STEP,
                     richardson: bool = True,
                     max_shrink: int = MAX_SHRINK) -> float:
    return curvature_sample(s, x, step=step, richardson=richardson,
                            max_shrink=max_shrink).sc


def metric_blocks(s: Potential, x):
    """(Hess s, (Hess s)^-1); the full metric is block-diag of the two."""
    S = s.hessian_matrix(x)
    return S, _pd_inverse(S, x)


def curvature_grid(s: Potential, points: Sequence, step: float = DEFAULT_STEP,
                   richardson: bool = True) -> tuple:
    return tuple(curvature_sample(s, p, step=step, richardson=richardson)
                 for p in points)


def write_curvature_csv(s: Potential, points: Sequence, out,
                        step: float = DEFAULT_STEP, richardson: bool = True) -> int:
    """Deterministic CSV: coordinates, Sc, det S, and Reeb components."""
    if isinstance(s, BoothbyWangPotential):
        coords = [f"x_{i + 1}" for i in range(s.dim - 1)] + ["z"]
    else:
        coords = [f"x_{i + 1}" for i in range(s.dim)]
    header = coords + ["Sc", "detS"]
    if s.cone_domain:
        header += [f"reeb_{i + 1}" for i in range(s.dim)]
    out.write(",".join(header) + "\n")
    count = 0
    for p in points:
        sample = curvature_sample(s, p, step=step, richardson=richardson)
        row = list(sample.point) + [sample.sc, float(np.linalg.det(sample.S))]
        if s.cone_domain:
            row += list(sample.reeb)
        out.write(",".join("%.17g" % v for v in row) + "\n")
        count += 1
    return count


def bw_curvature_relation(s: Potential, samples: Sequence,
                          step: float = DEFAULT_STEP, richardson: bool = True,
                          tolerance: float = 1e-4) -> BWRelationReport:
    """Check Sc~(x,z) * z = Sc(x/z) - 2n(n+1) on the lift of s.

    s is a polytope potential in dimension n; samples are (x, z) points
    in the cone over its domain.
    """
    if s.cone_domain:
        raise ValueError("expected a polytope potential to lift")
    n = s.dim
    lift = BoothbyWangPotential(s)
    shift = 2.0 * n * (n + 1)
    rows = []
    for xz in samples:
        xz = np.asarray(xz, dtype=float)
        z = xz[-1]
        lifted = scalar_curvature(lift, xz, step=step, richardson=richardson)
        base = scalar_curvature(s, xz[:-1] / z, step=step, richardson=richardson)
        defect = lifted * z - (base - shift)
        rows.append(BWRelationSample(point=tuple(float(c) for c in xz),
                                     lifted_sc=lifted, base_sc=base,
                                     defect=float(defect)))
    if not rows:
        raise ValueError("empty sample set")
    max_defect = max(abs(r.defect) for r in rows)
    return BWRelationReport(samples=tuple(rows), max_defect=max_defect,
                            tolerance=tolerance, ok=max_defect < tolerance)


def einstein_verify(s: Potential, domain=None, target: float = 0.0,
                    points: Sequence | None = None, count: int = 32, seed: int = 0,
                    tolerance: float = 1e-4, step: float = DEFAULT_STEP,
                    richardson: bool = True) -> EinsteinReport:
    """Deviation statistics of Sc from a target constant over a grid."""
    if points is None:
        dom = domain if domain is not None else getattr(s, "domain", None)
        if dom is None:
            raise ValueError("no grid points and no domain to sample")
        if isinstance(dom, LabeledPolytope):
            points = polytope_interior_points(dom, count, seed=seed)
        else:
            points = cone_interior_points(dom, count, seed=seed)
    points = [tuple(float(c) for c in p) for p in points]
    if not points:
        raise ValueError("empty grid")
    values = [scalar_curvature(s, p, step=step, richardson=richardson)
              for p in points]
    dev = [abs(v - target) for v in values]
    max_dev = max(dev)
    return EinsteinReport(points=tuple(points), sc_values=tuple(values),
                          target=float(target), tolerance=float(tolerance),
                          max_abs_deviation=float(max_dev),
                          mean_abs_deviation=float(sum(dev) / len(dev)),
                          verdict=max_dev < tolerance)
