"""Quadrature on the reference triangle and the reference edge [0, 1]."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

MAX_EXACTNESS = 10


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    exactness: int
    points: np.ndarray  # (nq, 2) on the triangle (0,0),(1,0),(0,1)
    weights: np.ndarray  # sums to 1/2
    edge_points: np.ndarray  # (nqe,) on [0, 1]
    edge_weights: np.ndarray  # sums to 1


@lru_cache(maxsize=None)
def quadrature(exactness: int) -> QuadratureRule:
    """Collapsed Gauss-Jacobi rule, exact for polynomials of total degree <= exactness."""
    if not 0 <= exactness <= MAX_EXACTNESS:
        raise ValueError(f"quadrature exactness must be in [0, {MAX_EXACTNESS}], got {exactness}")
    n = exactness // 2 + 1
    # u carries the (1-u) Jacobian of the collapse s = u, t = (1-u) v
    xu, wu = roots_jacobi(n, 1.0, 0.0)
    xv, wv = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (xu + 1.0)
    v = 0.5 * (xv + 1.0)
    wu = 0.25 * wu
    wv = 0.5 * wv
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pts = np.column_stack([uu.ravel(), ((1.0 - uu) * vv).ravel()])
    wts = np.outer(wu, wv).ravel()
    xe, we = np.polynomial.legendre.leggauss(n)
    for a in (pts, wts, xe, we):
        a.setflags(write=False)
    edge_pts = 0.5 * (xe + 1.0)
    edge_w = 0.5 * we
    edge_pts.setflags(write=False)
    edge_w.setflags(write=False)
    return QuadratureRule(exactness, pts, wts, edge_pts, edge_w)
