"""Finite element spaces of Lie algebra-valued forms on a ``Mesh``.

Every space stores its local basis as polynomial coefficients in the
reference coordinates of each triangle.  Because line integrals of 1-forms
and point values of 0-forms are invariant under pullback, a conforming basis
function pulled back to any element is the reference basis function up to
the stored orientation sign; no Piola transform is needed.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import poly
from .lie import LieAlgebra
from .mesh import LOCAL_EDGES, REF_VERTICES, Mesh
from .quadrature import QuadratureRule, quadrature  # noqa: F401  (re-exported)

CONFORMING, BROKEN, PIECEWISE_CONSTANT = "conforming", "broken", "piecewise_constant"


@dataclass(frozen=True, eq=False)
class FormSpace:
    """Scalar finite element space; g-valued fields use one layer per Lie basis vector.

    ``basis`` has shape (nloc, n) for 0-forms and (nloc, 2, n) for 1-forms,
    ``dof_map[t, a]`` is the global index of local function a on triangle t and
    ``dof_sign[t, a]`` the orientation sign relating the two.
    """

    mesh: Mesh
    form_rank: int
    degree: int
    continuity: str
    basis: np.ndarray
    dof_map: np.ndarray
    dof_sign: np.ndarray
    n_dofs: int
    boundary_dofs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def n_local(self) -> int:
        return self.basis.shape[0]

    @property
    def free_dofs(self) -> np.ndarray:
        """DOFs left after eliminating zero-trace boundary DOFs."""
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.boundary_dofs] = False
        return np.flatnonzero(mask)

    def local_coeffs(self, coeffs) -> np.ndarray:
        """Global (n_dofs, m) coefficients -> signed local (T, nloc, m)."""
        return np.asarray(coeffs)[self.dof_map] * self.dof_sign[..., None]

    def local_poly(self, coeffs) -> np.ndarray:
        """Per-element polynomial coefficients (T, [2,] m, n) in reference coordinates."""
        loc = self.local_coeffs(coeffs)
        if self.form_rank == 1:
            return np.einsum("tam,acn->tcmn", loc, self.basis)
        return np.einsum("tam,an->tmn", loc, self.basis)


@dataclass
class Field:
    space: FormSpace
    algebra: LieAlgebra
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.space.n_dofs, self.algebra.dim):
            raise ValueError(
                f"coefficients {self.coeffs.shape} do not match space/algebra "
                f"({self.space.n_dofs}, {self.algebra.dim})")

    @classmethod
    def zeros(cls, space, algebra):
        return cls(space, algebra, np.zeros((space.n_dofs, algebra.dim)))

    def copy(self):
        return Field(self.space, self.algebra, self.coeffs.copy())

    def rotated(self, R):
        """Apply a constant adjoint rotation to the Lie coefficients."""
        return Field(self.space, self.algebra, self.coeffs @ np.asarray(R).T)


# ------------------------------------------------------ reference elements


def legendre01(k: int, s):
    """Shifted Legendre polynomials on [0, 1]: 1, 2s - 1."""
    s = np.asarray(s, float)
    if k == 0:
        return np.ones_like(s)
    if k == 1:
        return 2.0 * s - 1.0
    raise ValueError("only degree <= 1 edge moments are used")


def _edge_moment_functionals(p: int, rule: QuadratureRule) -> np.ndarray:
    """Rows: the 6 edge-moment DOFs of P1 1-forms acting on P_p 1-form coefficients.

    DOF (i, k) = int_0^1 u(a + s(b - a)) . (b - a) L_k(s) ds along local edge i.
    Coefficient vectors are ordered (component, monomial).
    """
    n = poly.nmono(p)
    rows = []
    for a, b in LOCAL_EDGES:
        pa, pb = REF_VERTICES[a], REF_VERTICES[b]
        pts = pa + np.outer(rule.edge_points, pb - pa)
        V = poly.vandermonde(p, pts)
        for k in range(2):
            w = rule.edge_weights * legendre01(k, rule.edge_points)
            row = np.concatenate([(pb - pa)[0] * (w @ V), (pb - pa)[1] * (w @ V)])
            rows.append(row)
    return np.array(rows).reshape(6, 2 * n)


@lru_cache(maxsize=None)
def p1_edge_basis() -> np.ndarray:
    """Reference basis (6, 2, 3) dual to the edge moments, local DOF 2*i + k."""
    rule = quadrature(4)
    L = _edge_moment_functionals(1, rule)
    coef = np.linalg.solve(L, np.eye(6)).T  # row a: coefficients of basis a
    out = coef.reshape(6, 2, 3)
    out.setflags(write=False)
    return out


def lagrange_nodes(s: int) -> np.ndarray:
    """Reference nodes: vertices, then s-1 nodes per local edge along its direction, then interior."""
    nodes = [REF_VERTICES[i] for i in range(3)]
    for a, b in LOCAL_EDGES:
        for k in range(1, s):
            nodes.append(REF_VERTICES[a] + (k / s) * (REF_VERTICES[b] - REF_VERTICES[a]))
    for j in range(1, s):
        for i in range(1, s - j):
            nodes.append(np.array([i / s, j / s]))
    return np.array(nodes)


@lru_cache(maxsize=None)
def lagrange_basis(s: int) -> np.ndarray:
    nodes = lagrange_nodes(s)
    V = poly.vandermonde(s, nodes)
    out = np.linalg.inv(V).T  # row h: coefficients of basis h
    out.setflags(write=False)
    return out


# ------------------------------------------------------------ constructors


def curl_conforming_p1(mesh: Mesh) -> FormSpace:
    """Full P1 Lambda^1 (curl-conforming BDM-type) space, 2 DOFs per edge.

    Global DOF 2*e + k is the k-th Legendre moment of the tangential trace
    along the global orientation of edge e.  Reversing an edge flips the
    degree-0 moment and leaves the degree-1 moment unchanged.
    """
    T = mesh.n_triangles
    dof_map = np.empty((T, 6), dtype=int)
    dof_sign = np.empty((T, 6))
    for i in range(3):
        e = mesh.tri_edges[:, i]
        sg = mesh.tri_edge_signs[:, i]
        dof_map[:, 2 * i] = 2 * e
        dof_map[:, 2 * i + 1] = 2 * e + 1
        dof_sign[:, 2 * i] = sg
        dof_sign[:, 2 * i + 1] = 1.0
    bnd = np.flatnonzero(mesh.boundary_edges)
    boundary = np.sort(np.concatenate([2 * bnd, 2 * bnd + 1]))
    return FormSpace(mesh, 1, 1, CONFORMING, p1_edge_basis(), dof_map, dof_sign,
                     2 * mesh.n_edges, boundary)


def lagrange_cg(mesh: Mesh, s: int) -> FormSpace:
    """Continuous piecewise-P_s 0-forms with equispaced nodes."""
    if not 1 <= s <= 6:
        raise ValueError(f"unsupported Lagrange degree {s}")
    T, V, E = mesh.n_triangles, mesh.n_vertices, mesh.n_edges
    ne = s - 1
    ni = (s - 1) * (s - 2) // 2
    nloc = 3 + 3 * ne + ni
    dof_map = np.empty((T, nloc), dtype=int)
    dof_map[:, :3] = mesh.triangles
    for i in range(3):
        e = mesh.tri_edges[:, i]
        fwd = mesh.tri_edge_signs[:, i] > 0
        for k in range(ne):
            kk = np.where(fwd, k, ne - 1 - k)
            dof_map[:, 3 + i * ne + k] = V + e * ne + kk
    base = V + E * ne
    for k in range(ni):
        dof_map[:, 3 + 3 * ne + k] = base + np.arange(T) * ni + k
    return FormSpace(mesh, 0, s, CONFORMING, lagrange_basis(s), dof_map,
                     np.ones((T, nloc)), base + T * ni)


def piecewise_constant(mesh: Mesh) -> FormSpace:
    T = mesh.n_triangles
    return FormSpace(mesh, 0, 0, PIECEWISE_CONSTANT, np.ones((1, 1)),
                     np.arange(T)[:, None], np.ones((T, 1)), T)


def monomial_1form_basis(q: int) -> np.ndarray:
    n = poly.nmono(q)
    return np.eye(2 * n).reshape(2 * n, 2, n)


def broken_1form(mesh: Mesh, q: int) -> FormSpace:
    """Element-wise P_q Lambda^1 in the reference monomial basis, no coupling."""
    if q < 1:
        raise ValueError("broken 1-form degree must be >= 1")
    T = mesh.n_triangles
    nloc = 2 * poly.nmono(q)
    return FormSpace(mesh, 1, q, BROKEN, monomial_1form_basis(q),
                     np.arange(T * nloc).reshape(T, nloc), np.ones((T, nloc)), T * nloc)


def break_space(space: FormSpace) -> FormSpace:
    """Broken twin of a conforming 1-form space, in the monomial basis."""
    return broken_1form(space.mesh, space.degree)


# ------------------------------------------------------------ conversions


def broken_poly(field_: Field) -> np.ndarray:
    """(T, 2, m, n) per-element coefficients of a broken monomial 1-form field."""
    sp = field_.space
    n = poly.nmono(sp.degree)
    return field_.coeffs.reshape(sp.mesh.n_triangles, 2, n, -1).transpose(0, 1, 3, 2)


def broken_from_poly(space: FormSpace, alg: LieAlgebra, coeffs) -> Field:
    """Inverse of ``broken_poly``; pads lower-degree input."""
    c = poly.pad(np.asarray(coeffs), space.degree)
    return Field(space, alg, c.transpose(0, 1, 3, 2).reshape(space.n_dofs, alg.dim))


def embed_broken(field_: Field, target: FormSpace) -> Field:
    """Exact element-wise embedding of a 1-form field into a broken space."""
    if target.continuity != BROKEN or target.degree < field_.space.degree:
        raise ValueError("target must be a broken space of at least the same degree")
    return broken_from_poly(target, field_.algebra, field_.space.local_poly(field_.coeffs))


def conforming_dofs_from_edges(space: FormSpace, alg: LieAlgebra, func, nquad: int = 8,
                               zero_boundary: bool = True) -> Field:
    """Interpolate a physical 1-form ``func(x, y) -> (npts, 2, m)`` by its edge moments.

    Boundary DOFs are zeroed unless ``zero_boundary`` is False.
    """
    mesh = space.mesh
    xs, ws = np.polynomial.legendre.leggauss(nquad)
    s, w = 0.5 * (xs + 1.0), 0.5 * ws
    coeffs = np.zeros((space.n_dofs, alg.dim))
    done = np.zeros(mesh.n_edges, dtype=bool)
    for t in range(mesh.n_triangles):
        c = mesh.tri_coords[t]
        for i, (a, b) in enumerate(LOCAL_EDGES):
            e = mesh.tri_edges[t, i]
            if done[e]:
                continue
            done[e] = True
            pa, pb = c[a], c[b]
            if mesh.tri_edge_signs[t, i] < 0:
                pa, pb = pb, pa
            pts = pa + np.outer(s, pb - pa)
            vals = np.asarray(func(pts[:, 0], pts[:, 1]), float)
            tang = np.einsum("qcm,c->qm", vals, pb - pa)
            for k in range(2):
                coeffs[2 * e + k] = (w * legendre01(k, s)) @ tang
    if zero_boundary:
        coeffs[space.boundary_dofs] = 0.0
    return Field(space, alg, coeffs)


def interpolate_cg(space: FormSpace, alg: LieAlgebra, func) -> Field:
    """Nodal interpolation of a physical function ``func(x, y) -> (npts, m)``."""
    nodes = lagrange_nodes(space.degree)
    coeffs = np.zeros((space.n_dofs, alg.dim))
    c = space.mesh.tri_coords
    jac = np.stack([c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]], axis=-1)
    phys = c[:, None, 0] + np.einsum("tij,hj->thi", jac, nodes)
    vals = np.asarray(func(phys[..., 0].ravel(), phys[..., 1].ravel()), float)
    coeffs[space.dof_map.ravel()] = vals.reshape(-1, alg.dim)
    return Field(space, alg, coeffs)


def project_piecewise_constant(mesh: Mesh, alg: LieAlgebra, func, rule=None) -> Field:
    """Element averages of a physical function ``func(x, y) -> (npts, m)``."""
    rule = rule or quadrature(10)
    c = mesh.tri_coords
    jac = np.stack([c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]], axis=-1)
    phys = c[:, None, 0] + np.einsum("tij,qj->tqi", jac, rule.points)
    vals = np.asarray(func(phys[..., 0].ravel(), phys[..., 1].ravel()), float)
    vals = vals.reshape(mesh.n_triangles, len(rule.weights), alg.dim)
    avg = 2.0 * np.einsum("q,tqm->tm", rule.weights, vals)
    return Field(piecewise_constant(mesh), alg, avg)


def tangential_jumps(space: FormSpace, coeffs, rule: QuadratureRule) -> float:
    """Largest tangential-trace jump of a 1-form field over interior edges.

    Traces are compared at edge quadrature points along the global edge
    orientation, which is recomputed from the vertex indices rather than read
    from the stored signs, so a corrupted sign table shows up as a jump.
    Boundary edges are skipped.
    """
    mesh = space.mesh
    loc = space.local_poly(coeffs)  # (T, 2, m, n)
    worst = 0.0
    s = rule.edge_points
    for e, adj in enumerate(mesh.edge_triangles()):
        if len(adj) != 2:
            continue
        traces = []
        for t, i in adj:
            a, b = LOCAL_EDGES[i]
            pa, pb = REF_VERTICES[a], REF_VERTICES[b]
            va, vb = mesh.triangles[t, a], mesh.triangles[t, b]
            sign = 1.0 if va < vb else -1.0
            ss = s if sign > 0 else 1.0 - s
            pts = pa + np.outer(ss, pb - pa)
            vals = poly.evaluate(loc[t], pts)  # (q, 2, m)
            tr = np.einsum("qcm,c->qm", vals, pb - pa) * sign
            traces.append(tr)
        worst = max(worst, float(np.abs(traces[0] - traces[1]).max()))
    return worst
