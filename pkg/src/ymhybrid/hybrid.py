"""Hybrid multipliers: the constrained least-squares solve for Hhat and the Dhat update.

Per element K and local broken test 1-form phi_a e_l the multiplier Hhat must
satisfy

    int_K <phi ^ Ddot> - <d_A phi ^ H>  +  closed int_dK <phi ^ Hhat>  =  0,

which fixes only boundary traces of Hhat.  Among all solutions we take the
one minimising  w_H |Hhat - H|^2 + w_D |d_A Hhat - Ddot|^2  through a KKT
system with a small negative-definite multiplier block.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from . import poly
from .assembly import Discretization, SolverError
from .femspace import Field, broken_from_poly, broken_poly, embed_broken


@dataclass
class HybridSystem:
    Q: sps.csr_matrix
    f: np.ndarray
    C: sps.csr_matrix
    b: np.ndarray
    delta: float
    const: float = 0.0  # objective value at Hhat = 0

    def objective(self, x):
        return float(x @ (self.Q @ x) - 2.0 * self.f @ x + self.const)

    def kkt(self):
        k = self.C.shape[0]
        return sps.bmat([[self.Q, self.C.T], [self.C, -self.delta * sps.identity(k)]], format="csc")


@dataclass
class HybridSolution:
    Hhat: np.ndarray  # (nH, m)
    constraint_residual: float  # relative
    objective: float


def _hhat_index(disc: Discretization):
    m = disc.m
    gh = disc.VH.dof_map  # (T, nH)
    return (gh[:, :, None] * m + np.arange(m)[None, None, :]).reshape(gh.shape[0], -1)


def covariant_d_hhat_operator(disc: Discretization, Aq):
    """B[t, q, c, l, h, j]: pulled-back d_A(psi_h e_j) at quadrature points."""
    m = disc.m
    eye = np.eye(m)
    B = np.einsum("hcq,lj->qclhj", disc.gpsi, eye)[None]
    adA = np.einsum("tqci,ijl->tqclj", Aq, disc.alg.structure)
    B = B + adA[:, :, :, :, None, :] * disc.psi.T[None, :, None, None, :, None]
    return B


def build_hybrid_system(disc: Discretization, A_coeffs, Edot_coeffs, weights=(1.0, 1.0),
                        delta_scale=1e-10) -> HybridSystem:
    """Assemble objective and constraints for Hhat at the connection A.

    ``Edot_coeffs`` is the conforming representation of eps^{-1} Ddot.
    """
    wH, wD = weights
    alg, m, T = disc.alg, disc.m, disc.mesh.n_triangles
    G = alg.gram
    A_loc = disc.V1.local_coeffs(A_coeffs)
    Aq = disc.at_quad_1form(A_loc)
    Hq = disc.magnetic_q(A_loc, Aq)
    Edq = disc.at_quad_1form(disc.V1.local_coeffs(Edot_coeffs))
    Ddq = disc.eps_q(Edq)

    # constraint rows (t, a, l), columns (hhat dof, j)
    vol = disc.local_pairing_eps(Edq) - disc.local_residual_terms(A_loc, Aq, Hq)
    b = -vol.reshape(-1)
    nH = disc.VH.n_local
    loc_C = np.einsum("ah,lj->alhj", disc.C_ref, G).reshape(6 * m, nH * m)
    cols = _hhat_index(disc)  # (T, nH*m)
    rows = np.arange(T * 6 * m).reshape(T, 6 * m)
    C = sps.coo_matrix(
        (np.broadcast_to(loc_C, (T,) + loc_C.shape).ravel(),
         (np.repeat(rows, nH * m, axis=1).ravel(), np.tile(cols, (1, 6 * m)).ravel())),
        shape=(T * 6 * m, disc.VH.n_dofs * m)).tocsr()

    # objective
    w, det = disc.w, disc.det
    N = np.einsum("q,hq,gq,jk->hjgk", w, disc.psi, disc.psi, G).reshape(nH * m, nH * m)
    B = covariant_d_hhat_operator(disc, Aq)  # (T, q, 2, m, nH, m)
    nq = len(w)
    # (W (x) G) acting on the (c, l) index pair, as one batched matmul
    WG = np.einsum("tcd,lk->tcldk", disc.W, G).reshape(T, 1, 2 * m, 2 * m)
    Bm = B.reshape(T, nq, 2 * m, nH * m)
    WG_B = (WG @ Bm).reshape(B.shape)
    wB = (w[None, :, None, None] * Bm).reshape(T, nq * 2 * m, nH * m)
    BWB = np.swapaxes(wB, 1, 2) @ WG_B.reshape(T, nq * 2 * m, nH * m)
    Qloc = wH * det[:, None, None] * N[None] + wD * BWB
    Qloc = 0.5 * (Qloc + Qloc.transpose(0, 2, 1))
    fH = (det[:, None, None] * np.einsum("hq,tqk->thk", disc.psi * w, Hq @ G)).reshape(T, nH * m)
    wDd = (w[None, :, None, None] * Ddq).reshape(T, 1, nq * 2 * m)
    fD = (wDd @ WG_B.reshape(T, nq * 2 * m, nH * m))[:, 0]
    floc = wH * fH + wD * fD
    const = (wH * np.einsum("t,q,tqj,tqj->", det, w, Hq @ G, Hq)
             + wD * float(wDd.reshape(-1) @ (WG @ Ddq.reshape(T, nq, 2 * m, 1)).reshape(-1)))

    n = disc.VH.n_dofs * m
    Q = sps.coo_matrix((Qloc.ravel(), (np.repeat(cols, nH * m, axis=1).ravel(),
                                        np.tile(cols, (1, nH * m)).ravel())), shape=(n, n)).tocsr()
    f = np.zeros(n)
    np.add.at(f, cols.ravel(), floc.ravel())
    delta = delta_scale * float(Q.diagonal().mean()) if n else 0.0
    return HybridSystem(Q, f, C, b, delta, float(const))


# Symmetric minimum-degree ordering without pivoting keeps the fill ~10x lower
# for these quasi-definite systems; partial pivoting is the fallback.
_FACTOR_STRATEGIES = (
    dict(permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options=dict(SymmetricMode=True)),
    dict(permc_spec="COLAMD"),
)


def _multiplier_sweeps(K, lu, sys_, n, sweeps, refine=2):
    lam = np.zeros(sys_.C.shape[0])
    for _ in range(1 + sweeps):
        rhs = np.concatenate([sys_.f, sys_.b - sys_.delta * lam])
        sol = lu.solve(rhs)
        for _ in range(refine):
            sol = sol + lu.solve(rhs - K @ sol)
        lam = sol[n:]
    scale = max(np.linalg.norm(rhs), np.finfo(float).tiny)
    return sol[:n], np.linalg.norm(K @ sol - rhs) / scale


def solve_hybrid(disc: Discretization, sys_: HybridSystem, tol=1e-8, sweeps=3,
                 strict=True) -> HybridSolution:
    """Solve the regularised KKT system for Hhat.

    The -delta I block makes the redundant constraint rows harmless; a few
    multiplier sweeps  (x, lam) <- K^{-1} (f, b - delta lam_prev)  then remove
    the O(delta) constraint defect while reusing one factorization.
    """
    n = sys_.Q.shape[0]
    K = sys_.kkt()
    x = None
    for kwargs in _FACTOR_STRATEGIES:
        try:
            lu = spla.splu(K, **kwargs)
        except RuntimeError:
            continue
        x, kres = _multiplier_sweeps(K, lu, sys_, n, sweeps)
        if np.isfinite(kres) and kres <= 1e-12:
            break
    if x is None:
        raise SolverError("KKT factorization failed")
    if not np.all(np.isfinite(x)):
        raise SolverError("non-finite multiplier solution")
    res = constraint_residual(sys_, x)
    if strict and res > tol:
        raise SolverError(f"hybrid constraint residual {res:.3e} exceeds {tol:g} (inconsistent constraints)")
    return HybridSolution(x.reshape(-1, disc.m), res, sys_.objective(x))


def constraint_residual(sys_: HybridSystem, x) -> float:
    nb = np.linalg.norm(sys_.b)
    nr = np.linalg.norm(sys_.C @ x - sys_.b)
    if nb == 0.0:
        return nr
    return nr / nb


def dense_nullspace_solve(sys_: HybridSystem) -> np.ndarray:
    """Reference minimiser by the nullspace method on dense matrices (small systems)."""
    from scipy.linalg import lstsq, null_space
    Q, C = sys_.Q.toarray(), sys_.C.toarray()
    x0 = lstsq(C, sys_.b)[0]
    Z = null_space(C)
    if Z.shape[1] == 0:
        return x0
    z = np.linalg.solve(Z.T @ Q @ Z, Z.T @ (sys_.f - Q @ x0))
    return x0 + Z @ z


# ------------------------------------------------------------------ Dhat


def _increment_tables(disc: Discretization):
    """Exact monomial tables for d psi_h and phi_a * psi_h in degree r + s."""
    q = disc.VD.degree
    s = disc.s
    grad = np.stack([disc.VH.basis @ poly.diff_matrix(s, 0).T,
                     disc.VH.basis @ poly.diff_matrix(s, 1).T], axis=1)  # (nH, 2, n_{s-1})
    grad = poly.pad(grad, q)
    prod = np.einsum("aci,hj,ijk->ahck", disc.V1.basis, disc.VH.basis,
                     poly.product_tensor(1, s))  # (6, nH, 2, n_{1+s})
    return grad, poly.pad(prod, q)


def covariant_d_hhat_poly(disc: Discretization, A_coeffs, Hhat_coeffs) -> np.ndarray:
    """Exact per-element coefficients (T, 2, m, n_q) of d_A Hhat, reference coordinates."""
    if disc.VD.degree < disc.r + disc.s:
        raise ValueError("Dhat degree must be at least r + s to hold d_A Hhat exactly")
    tabs = getattr(disc, "_inc_tabs", None)
    if tabs is None:
        tabs = disc._inc_tabs = _increment_tables(disc)
    grad, prod = tabs
    A_loc = disc.V1.local_coeffs(A_coeffs)
    H_loc = disc.VH.local_coeffs(Hhat_coeffs)
    dH = np.einsum("thl,hcn->tcln", H_loc, grad)
    AxH = np.einsum("tai,thil->tahl", A_loc, np.einsum("thj,ijl->thil", H_loc, disc.alg.structure))
    AH = np.einsum("tahl,ahcn->tcln", AxH, prod)
    return dH + AH


def dhat_step(disc: Discretization, Dhat: Field, A_mid, Hhat_mid, dt: float) -> Field:
    """Dhat + dt d_{A_mid} Hhat_mid, computed exactly without projection."""
    inc = covariant_d_hhat_poly(disc, A_mid, Hhat_mid)
    new = broken_poly(Dhat) + dt * inc
    return broken_from_poly(disc.VD, disc.alg, new)


def dhat_init(disc: Discretization, E0: Field) -> Field:
    """Dhat_0 = eps E_0, embedded element by element into the broken space."""
    loc = disc.V1.local_poly(E0.coeffs)  # (T, 2, m, n1)
    epsE = np.einsum("tcd,tdmn->tcmn", disc.eps, loc)
    return broken_from_poly(disc.VD, disc.alg, epsE)


__all__ = [
    "HybridSystem", "HybridSolution", "build_hybrid_system", "solve_hybrid", "dense_nullspace_solve",
    "dhat_step", "dhat_init", "covariant_d_hhat_poly", "embed_broken", "constraint_residual",
]
