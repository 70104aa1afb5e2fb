"""Sparse systems of the semidiscrete temporal-gauge equations.

All element integrals are computed on the reference triangle from pulled-back
forms: integrals of 2-forms need no Jacobian factor, and the Hodge star
enters through the per-element ``HodgeOps``.  Quadrature is exact for every
integrand that appears.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from . import femspace as fs
from .calculus import HodgeOps
from .lie import LieAlgebra
from .mesh import LOCAL_EDGES, REF_VERTICES, Mesh
from .quadrature import MAX_EXACTNESS, quadrature


class SolverError(RuntimeError):
    """Factorization failure or a solve that misses its residual tolerance."""


@dataclass(frozen=True, eq=False)
class SparseSym:
    matrix: sps.csc_matrix
    spd: bool

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def required_exactness(r: int, s: int) -> int:
    """Largest polynomial degree among all assembled integrands."""
    # |d_A Hhat|^2 in the hybrid objective dominates: degree 2 (r + s)
    return max(2 * (r + s), 4 * r, 2 * r + s + r)


class Discretization:
    """Spaces, geometry and reference tabulations shared by every step."""

    def __init__(self, mesh: Mesh, alg: LieAlgebra, r: int = 1, s: int = 3, exactness=None):
        if r != 1:
            raise ValueError("only r = 1 conforming 1-forms are implemented")
        self.mesh, self.alg, self.r, self.s = mesh, alg, r, s
        self.V1 = fs.curl_conforming_p1(mesh)
        self.VH = fs.lagrange_cg(mesh, s)
        self.VD = fs.broken_1form(mesh, r + s)
        self.P0 = fs.piecewise_constant(mesh)
        ex = required_exactness(r, s) if exactness is None else exactness
        if ex > MAX_EXACTNESS:
            raise ValueError(f"degrees r={r}, s={s} need quadrature exactness {ex} > {MAX_EXACTNESS}")
        self.rule = quadrature(ex)

        self.jac = mesh.jacobians()
        self.det = np.linalg.det(self.jac)
        if np.any(self.det <= 0):
            raise ValueError("mesh has non-positively oriented triangles")
        hodge = [HodgeOps.for_element(J) for J in self.jac]
        self.eps = np.array([h.eps for h in hodge])  # (T, 2, 2)
        W = np.array([h.metric for h in hodge])
        self.W = 0.5 * (W + W.transpose(0, 2, 1))  # u ^ eps v = u^T W v

        pts, self.w = self.rule.points, self.rule.weights
        from . import poly
        V1 = poly.vandermonde(1, pts)
        self.phi = np.einsum("acn,qn->acq", self.V1.basis, V1)  # (6, 2, nq)
        dx, dy = poly.diff_matrix(1, 0), poly.diff_matrix(1, 1)
        curl = self.V1.basis[:, 1] @ dx.T - self.V1.basis[:, 0] @ dy.T  # (6, 1)
        self.curl_phi = np.repeat(curl, len(self.w), axis=1)  # constant for r = 1
        Vs = poly.vandermonde(s, pts)
        self.psi = self.VH.basis @ Vs.T  # (nH, nq)
        gx = self.VH.basis @ poly.diff_matrix(s, 0).T
        gy = self.VH.basis @ poly.diff_matrix(s, 1).T
        Vs1 = poly.vandermonde(max(s - 1, 0), pts)
        self.gpsi = np.stack([gx @ Vs1.T, gy @ Vs1.T], axis=1)  # (nH, 2, nq)

        self.C_ref = boundary_pairing_reference(self.V1.basis, self.VH.basis, self.rule)
        self._mass = None
        self._mass_lu = None

    # ------------------------------------------------------------ helpers

    @property
    def m(self):
        return self.alg.dim

    def at_quad_1form(self, local):
        """Signed local conforming coefficients (T, 6, m) -> values (T, nq, 2, m)."""
        return np.einsum("tam,acq->tqcm", local, self.phi)

    def curvature_q(self, A_loc, Aq=None):
        """Pulled-back F_A at quadrature points, (T, nq, m)."""
        Aq = self.at_quad_1form(A_loc) if Aq is None else Aq
        dA = np.einsum("tam,aq->tqm", A_loc, self.curl_phi)
        AA = 2.0 * np.einsum("tqi,tqj,ijk->tqk", Aq[:, :, 0], Aq[:, :, 1], self.alg.structure)
        return dA + 0.5 * AA

    def magnetic_q(self, A_loc, Aq=None):
        """H = mu^{-1} F_A at quadrature points, (T, nq, m)."""
        return self.curvature_q(A_loc, Aq) / self.det[:, None, None]

    def eps_q(self, Uq):
        """Pulled-back eps applied to 1-form values (T, nq, 2, m)."""
        return np.einsum("tcd,tqdm->tqcm", self.eps, Uq)

    def local_residual_terms(self, A_loc, Aq, Hq):
        """int_K <d_A(phi_a e_l) ^ H> for the unsigned reference basis, (T, 6, m)."""
        G = self.alg.gram
        GH = Hq @ G
        t1 = np.einsum("q,aq,tql->tal", self.w, self.curl_phi, GH)
        X = (np.einsum("tqb,aq->tqab", Aq[:, :, 0], self.phi[:, 1])
             - np.einsum("tqb,aq->tqab", Aq[:, :, 1], self.phi[:, 0]))
        adH = np.einsum("blk,tqk->tqbl", self.alg.structure, GH)  # <[e_b, e_l], H>
        t2 = np.einsum("tqab,tqbl->tal", X * self.w[None, :, None, None], adH)
        return t1 + t2

    def local_pairing_eps(self, Uq):
        """int_K <phi_a e_l ^ eps U> for the unsigned reference basis, (T, 6, m)."""
        WU = np.einsum("tcd,tqdm->tqcm", self.W, Uq) @ self.alg.gram
        return np.einsum("acq,tqcl->tal", self.phi * self.w, WU)

    def scatter_1form(self, local):
        """Sum signed local vectors (T, 6, m) into global (n1, m)."""
        out = np.zeros((self.V1.n_dofs, local.shape[-1]))
        np.add.at(out, self.V1.dof_map.ravel(),
                  (local * self.V1.dof_sign[..., None]).reshape(-1, local.shape[-1]))
        return out

    # ---------------------------------------------------------- operators

    def mass(self) -> SparseSym:
        if self._mass is None:
            self._mass = mass_eps(self)
        return self._mass

    def solve_mass(self, rhs):
        """Solve M (x G) = rhs on free DOFs; rhs and x are (n1, m), G the Gram matrix."""
        free = self.V1.free_dofs
        if self._mass_lu is None:
            M = self.mass().matrix[free][:, free].tocsc()
            self._mass_lu = (M, spla.splu(M))
        M, lu = self._mass_lu
        b = rhs[free] @ np.linalg.inv(self.alg.gram)
        x = lu.solve(np.ascontiguousarray(b))
        check_residual(M, x, b)
        out = np.zeros_like(rhs)
        out[free] = x
        return out


def boundary_pairing_reference(phi_basis, psi_basis, rule) -> np.ndarray:
    """C[a, h] = closed integral over the reference boundary of trace(phi_a) psi_h."""
    from . import poly
    p1 = 1
    s = 0
    while poly.nmono(s) < psi_basis.shape[1]:
        s += 1
    C = np.zeros((phi_basis.shape[0], psi_basis.shape[0]))
    for a, b in LOCAL_EDGES:
        pa, pb = REF_VERTICES[a], REF_VERTICES[b]
        pts = pa + np.outer(rule.edge_points, pb - pa)
        tr = np.einsum("acn,qn,c->aq", phi_basis, poly.vandermonde(p1, pts), pb - pa)
        ps = psi_basis @ poly.vandermonde(s, pts).T
        C += np.einsum("q,aq,hq->ah", rule.edge_weights, tr, ps)
    return C


def boundary_pairing(disc: Discretization, k: int = 0) -> np.ndarray:
    """Local pairing matrix of element k; identical for all elements after pullback."""
    return disc.C_ref.copy()


def mass_eps(disc: Discretization) -> SparseSym:
    """Scalar mass matrix M[i, j] = int <phi_i ^ eps phi_j> over all DOFs."""
    sp = disc.V1
    loc = np.einsum("q,acq,tcd,bdq->tab", disc.w, disc.phi, disc.W, disc.phi)
    loc = 0.5 * (loc + loc.transpose(0, 2, 1))
    sg = sp.dof_sign
    loc = loc * sg[:, :, None] * sg[:, None, :]
    rows = np.repeat(sp.dof_map, 6, axis=1).ravel()
    cols = np.tile(sp.dof_map, (1, 6)).ravel()
    M = sps.coo_matrix((loc.ravel(), (rows, cols)), shape=(sp.n_dofs, sp.n_dofs)).tocsc()
    M.sum_duplicates()
    M = 0.5 * (M + M.T)
    return SparseSym(M.tocsc(), True)


def evolution_rhs(disc: Discretization, A_coeffs) -> np.ndarray:
    """rhs[i, l] = int <d_A (phi_i e_l) ^ mu^{-1} F_A>, shape (n1, m)."""
    A_loc = disc.V1.local_coeffs(A_coeffs)
    Aq = disc.at_quad_1form(A_loc)
    Hq = disc.magnetic_q(A_loc, Aq)
    return disc.scatter_1form(disc.local_residual_terms(A_loc, Aq, Hq))


# ------------------------------------------------------------------ solvers


def check_residual(M, x, b, tol=1e-12, what="solve"):
    r = M @ x - b
    nb = np.linalg.norm(b)
    nr = np.linalg.norm(r)
    if not np.all(np.isfinite(x)) or nr > tol * max(nb, np.finfo(float).tiny):
        if nb == 0.0 and nr == 0.0:
            return 0.0
        raise SolverError(f"{what}: residual {nr:.3e} exceeds {tol:g} * |b| = {tol * nb:.3e}")
    return nr / nb if nb else 0.0


def solve_spd(M: SparseSym, b) -> np.ndarray:
    if not M.spd:
        raise SolverError("solve_spd needs a matrix flagged positive definite")
    A = M.matrix.tocsc()
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SolverError(f"factorization failed: {exc}") from exc
    x = lu.solve(np.asarray(b, float))
    check_residual(A, x, b)
    return x


def solve_sym_indefinite(K, b, refine: int = 2) -> np.ndarray:
    """Direct solve of a symmetric (possibly indefinite) sparse system with refinement."""
    K = sps.csc_matrix(K)
    b = np.asarray(b, float)
    try:
        lu = spla.splu(K)
    except RuntimeError as exc:
        raise SolverError(f"factorization failed: {exc}") from exc
    x = lu.solve(b)
    for _ in range(refine):
        x = x + lu.solve(b - K @ x)
    if not np.all(np.isfinite(x)):
        raise SolverError("non-finite solution")
    return x
