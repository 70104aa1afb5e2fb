"""Bivariate polynomials stored as monomial coefficient vectors.

Monomials x^i y^j are ordered by total degree, then by decreasing power of x,
so the coefficients of a degree-p polynomial are a prefix of the coefficients
of the same polynomial viewed in degree q >= p.
"""

from functools import lru_cache
from math import factorial

import numpy as np


def nmono(p: int) -> int:
    return (p + 1) * (p + 2) // 2


@lru_cache(maxsize=None)
def exponents(p: int) -> np.ndarray:
    out = [(d - j, j) for d in range(p + 1) for j in range(d + 1)]
    arr = np.array(out, dtype=int).reshape(-1, 2)
    arr.setflags(write=False)
    return arr


def index(i: int, j: int) -> int:
    d = i + j
    return nmono(d - 1) + j if d > 0 else 0


def vandermonde(p: int, pts) -> np.ndarray:
    """(npts, nmono(p)) matrix of monomial values."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    e = exponents(p)
    return pts[:, None, 0] ** e[None, :, 0] * pts[:, None, 1] ** e[None, :, 1]


def evaluate(coeffs, pts) -> np.ndarray:
    """Evaluate coefficient arrays (..., nmono) at points -> (npts, ...)."""
    coeffs = np.asarray(coeffs)
    p = degree_of(coeffs.shape[-1])
    return np.einsum("qn,...n->q...", vandermonde(p, pts), coeffs)


@lru_cache(maxsize=None)
def _nmono_inverse():
    return {nmono(p): p for p in range(64)}


def degree_of(n: int) -> int:
    try:
        return _nmono_inverse()[n]
    except KeyError:
        raise ValueError(f"{n} is not a monomial count") from None


@lru_cache(maxsize=None)
def diff_matrix(p: int, axis: int) -> np.ndarray:
    """Matrix of d/dx (axis 0) or d/dy (axis 1) from P_p to P_max(p-1,0)."""
    q = max(p - 1, 0)
    out = np.zeros((nmono(q), nmono(p)))
    for col, (i, j) in enumerate(exponents(p)):
        e = (i, j)[axis]
        if e == 0:
            continue
        ii, jj = (i - 1, j) if axis == 0 else (i, j - 1)
        out[index(ii, jj), col] = e
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def product_tensor(p: int, q: int) -> np.ndarray:
    """T[a, b, c] with mono_a * mono_b = mono_c, P_p x P_q -> P_{p+q}."""
    out = np.zeros((nmono(p), nmono(q), nmono(p + q)))
    ep, eq = exponents(p), exponents(q)
    for a, (i1, j1) in enumerate(ep):
        for b, (i2, j2) in enumerate(eq):
            out[a, b, index(i1 + i2, j1 + j2)] = 1.0
    out.setflags(write=False)
    return out


def multiply(a, b) -> np.ndarray:
    """Product of two coefficient vectors (last axis), broadcasting other axes."""
    a, b = np.asarray(a), np.asarray(b)
    t = product_tensor(degree_of(a.shape[-1]), degree_of(b.shape[-1]))
    return np.einsum("...a,...b,abc->...c", a, b, t)


def pad(coeffs, p: int) -> np.ndarray:
    """View coefficients in degree p >= current degree."""
    coeffs = np.asarray(coeffs)
    n = coeffs.shape[-1]
    if n > nmono(p):
        raise ValueError("cannot lower degree by padding")
    width = [(0, 0)] * (coeffs.ndim - 1) + [(0, nmono(p) - n)]
    return np.pad(coeffs, width)


@lru_cache(maxsize=None)
def reference_integrals(p: int) -> np.ndarray:
    """Exact integrals of each monomial over the triangle (0,0),(1,0),(0,1)."""
    out = np.array([factorial(i) * factorial(j) / factorial(i + j + 2) for i, j in exponents(p)])
    out.setflags(write=False)
    return out


def substitute_affine(coeffs, origin, jac) -> np.ndarray:
    """Coefficients of f(origin + jac @ (s, t)) as a polynomial in (s, t).

    Exact: expands powers of the affine substitution by repeated products.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    p = degree_of(coeffs.shape[-1])
    o = np.asarray(origin, float)
    jac = np.asarray(jac, float)
    lin_x = np.array([o[0], jac[0, 0], jac[0, 1]])
    lin_y = np.array([o[1], jac[1, 0], jac[1, 1]])
    xpow = [np.array([1.0])]
    ypow = [np.array([1.0])]
    for _ in range(p):
        xpow.append(multiply(xpow[-1], lin_x))
        ypow.append(multiply(ypow[-1], lin_y))
    out = np.zeros(coeffs.shape[:-1] + (nmono(p),))
    for n, (i, j) in enumerate(exponents(p)):
        term = pad(multiply(xpow[i], ypow[j]), p)
        out += coeffs[..., n, None] * term
    return out
