"""Exterior calculus for Lie algebra-valued forms in two dimensions.

Two representations share one set of rules:

* ``PointForm`` holds values at a batch of points.  A g-valued 0- or 2-form
  has shape ``(..., m)``, a 1-form ``(..., 2, m)`` with components on
  ``(dx, dy)``; real-valued forms drop the trailing Lie axis.
* ``PolyForm`` holds exact polynomial coefficients: ``(m, n)`` for 0- and
  2-forms and ``(2, m, n)`` for 1-forms, ``n`` monomials in the coordinates.

Derivatives act on coefficients only, never on sampled values.  Coordinates
are generic: the same code runs in physical coordinates (Euclidean Hodge
star) and in reference-element coordinates, where the pulled-back star is
supplied through ``HodgeOps``.
"""

from dataclasses import dataclass

import numpy as np

from . import poly
from .lie import LieAlgebra
from .mesh import LOCAL_EDGES, REF_VERTICES
from .quadrature import QuadratureRule

# (out component, left component, right component, sign) for the real wedge
# of a k-form and an l-form in 2D; 0- and 2-forms have a single component.
_WEDGE = {
    (0, 0): [(0, 0, 0, 1.0)],
    (0, 1): [(0, 0, 0, 1.0), (1, 0, 1, 1.0)],
    (1, 0): [(0, 0, 0, 1.0), (1, 1, 0, 1.0)],
    (1, 1): [(0, 0, 1, 1.0), (0, 1, 0, -1.0)],
    (0, 2): [(0, 0, 0, 1.0)],
    (2, 0): [(0, 0, 0, 1.0)],
}

ROT = np.array([[0.0, -1.0], [1.0, 0.0]])  # a dx + b dy -> a dy - b dx


def ncomp(rank: int) -> int:
    if rank not in (0, 1, 2):
        raise ValueError(f"form rank must be 0, 1 or 2 in two dimensions, got {rank}")
    return 2 if rank == 1 else 1


def _wedge_table(k, l):
    try:
        return _WEDGE[(k, l)]
    except KeyError:
        raise ValueError(f"rank overflow: {k}-form wedge {l}-form exceeds dimension 2") from None


@dataclass(frozen=True)
class HodgeOps:
    """Constant-coefficient vacuum Hodge operators.

    ``eps`` maps 1-form component vectors to 1-form component vectors;
    ``mu_inv_scale`` divides a 2-form's single component to give a 0-form.
    In physical coordinates these are the rotation ``ROT`` and 1.
    """

    eps: np.ndarray = ROT
    mu_inv_scale: float = 1.0
    vacuum: bool = True

    @classmethod
    def for_element(cls, jacobian) -> "HodgeOps":
        """Star pulled back to reference coordinates through x = x0 + J s."""
        jac = np.asarray(jacobian, float)
        return cls(jac.T @ ROT @ np.linalg.inv(jac).T, float(np.linalg.det(jac)))

    @property
    def metric(self) -> np.ndarray:
        """W with u ^ eps(v) = u^T W v (dx ^ dy component)."""
        return -ROT @ self.eps


# ---------------------------------------------------------------- pointwise


@dataclass(frozen=True)
class PointForm:
    rank: int
    value: np.ndarray
    real: bool = False

    def __post_init__(self):
        v = np.asarray(self.value, dtype=float)
        object.__setattr__(self, "value", v)
        c = ncomp(self.rank)
        if c == 2:
            axis = -1 if self.real else -2
            if v.ndim < -axis or v.shape[axis] != 2:
                raise ValueError(f"1-form value needs a component axis of length 2, got {v.shape}")

    def comps(self):
        if self.rank != 1:
            return [self.value]
        return [self.value[..., 0], self.value[..., 1]] if self.real else \
            [self.value[..., 0, :], self.value[..., 1, :]]

    def __add__(self, other):
        _same_kind(self, other)
        return PointForm(self.rank, self.value + other.value, self.real)

    def __sub__(self, other):
        _same_kind(self, other)
        return PointForm(self.rank, self.value - other.value, self.real)

    def __mul__(self, s):
        return PointForm(self.rank, self.value * s, self.real)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _same_kind(a, b):
    if a.rank != b.rank or a.real != b.real:
        raise ValueError("forms of different rank or kind")


def _wedge_point(u: PointForm, v: PointForm, contract):
    table = _wedge_table(u.rank, v.rank)
    uc, vc = u.comps(), v.comps()
    out = [0.0] * ncomp(u.rank + v.rank)
    for o, a, b, s in table:
        out[o] = out[o] + s * contract(uc[a], vc[b])
    return out


def wedge_bracket(u: PointForm, v: PointForm, alg: LieAlgebra) -> PointForm:
    """[u ^ v]: real wedge of components with the Lie bracket of coefficients."""
    c = alg.structure
    out = _wedge_point(u, v, lambda x, y: np.einsum("...i,...j,ijk->...k", x, y, c))
    rank = u.rank + v.rank
    return PointForm(rank, np.stack(out, axis=-2) if rank == 1 else out[0])


def wedge_inner(u: PointForm, v: PointForm, alg: LieAlgebra) -> PointForm:
    """<u ^ v>: real-valued form."""
    g = alg.gram
    out = _wedge_point(u, v, lambda x, y: np.einsum("...i,ij,...j->...", x, g, y))
    rank = u.rank + v.rank
    return PointForm(rank, np.stack(out, axis=-1) if rank == 1 else out[0], real=True)


def hodge_eps(u: PointForm, ops: HodgeOps = HodgeOps()) -> PointForm:
    if u.rank != 1:
        raise ValueError("eps acts on 1-forms")
    if u.real:
        return PointForm(1, np.einsum("cd,...d->...c", ops.eps, u.value), True)
    return PointForm(1, np.einsum("cd,...dm->...cm", ops.eps, u.value))


def hodge_mu_inv(b: PointForm, ops: HodgeOps = HodgeOps()) -> PointForm:
    if b.rank != 2:
        raise ValueError("mu^{-1} acts on 2-forms")
    return PointForm(0, b.value / ops.mu_inv_scale, b.real)


# --------------------------------------------------------------- polynomial


@dataclass(frozen=True)
class PolyForm:
    """Polynomial g-valued form; ``coeffs`` is (m, n) or (2, m, n)."""

    rank: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", c)
        want = 3 if self.rank == 1 else 2
        ncomp(self.rank)
        if c.ndim != want or (self.rank == 1 and c.shape[0] != 2):
            raise ValueError(f"bad coefficient shape {c.shape} for a {self.rank}-form")
        poly.degree_of(c.shape[-1])

    @property
    def degree(self) -> int:
        return poly.degree_of(self.coeffs.shape[-1])

    @property
    def m(self) -> int:
        return self.coeffs.shape[-2]

    def comps(self):
        return [self.coeffs[0], self.coeffs[1]] if self.rank == 1 else [self.coeffs]

    @classmethod
    def zero(cls, rank, m, degree=0):
        shape = (2, m, poly.nmono(degree)) if rank == 1 else (m, poly.nmono(degree))
        return cls(rank, np.zeros(shape))

    @classmethod
    def from_comps(cls, rank, comps):
        p = max(poly.degree_of(np.shape(c)[-1]) for c in comps)
        comps = [poly.pad(c, p) for c in comps]
        return cls(rank, np.stack(comps) if rank == 1 else comps[0])

    def padded(self, p: int) -> "PolyForm":
        return PolyForm(self.rank, poly.pad(self.coeffs, p))

    def __add__(self, other):
        if self.rank != other.rank:
            raise ValueError("rank mismatch")
        p = max(self.degree, other.degree)
        return PolyForm(self.rank, self.padded(p).coeffs + other.padded(p).coeffs)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, s):
        return PolyForm(self.rank, self.coeffs * s)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def lie_map(self, mat) -> "PolyForm":
        """Apply a linear map to the Lie coefficients (e.g. an adjoint rotation)."""
        return PolyForm(self.rank, np.einsum("kl,...ln->...kn", mat, self.coeffs))

    def at(self, pts) -> PointForm:
        """Values at points (npts, 2)."""
        vals = poly.evaluate(self.coeffs, pts)  # (npts, [2,] m)
        return PointForm(self.rank, vals)


def _wedge_poly(u: PolyForm, v: PolyForm, contract):
    table = _wedge_table(u.rank, v.rank)
    uc, vc = u.comps(), v.comps()
    out = [None] * ncomp(u.rank + v.rank)
    for o, a, b, s in table:
        term = s * contract(uc[a], vc[b])
        out[o] = term if out[o] is None else out[o] + term
    return out


def poly_wedge_bracket(u: PolyForm, v: PolyForm, alg: LieAlgebra) -> PolyForm:
    t = poly.product_tensor(u.degree, v.degree)
    c = alg.structure
    out = _wedge_poly(u, v, lambda x, y: np.einsum("ia,jb,ijk,abc->kc", x, y, c, t))
    return PolyForm.from_comps(u.rank + v.rank, out)


def poly_wedge_inner(u: PolyForm, v: PolyForm, alg: LieAlgebra) -> PolyForm:
    """<u ^ v> as a polynomial form with a single (m = 1) coefficient layer."""
    t = poly.product_tensor(u.degree, v.degree)
    g = alg.gram
    out = _wedge_poly(u, v, lambda x, y: np.einsum("ia,jb,ij,abc->c", x, y, g, t)[None])
    return PolyForm.from_comps(u.rank + v.rank, out)


def exterior_d(u: PolyForm) -> PolyForm:
    """Exact exterior derivative; degree drops by one."""
    p = u.degree
    dx, dy = poly.diff_matrix(p, 0), poly.diff_matrix(p, 1)
    if u.rank == 0:
        return PolyForm(1, np.stack([u.coeffs @ dx.T, u.coeffs @ dy.T]))
    if u.rank == 1:
        return PolyForm(2, u.coeffs[1] @ dx.T - u.coeffs[0] @ dy.T)
    raise ValueError("rank overflow: d of a 2-form is a 3-form, which vanishes in two dimensions")


def poly_hodge_eps(u: PolyForm, ops: HodgeOps = HodgeOps()) -> PolyForm:
    if u.rank != 1:
        raise ValueError("eps acts on 1-forms")
    return PolyForm(1, np.einsum("cd,dmn->cmn", ops.eps, u.coeffs))


def poly_hodge_mu_inv(b: PolyForm, ops: HodgeOps = HodgeOps()) -> PolyForm:
    if b.rank != 2:
        raise ValueError("mu^{-1} acts on 2-forms")
    return PolyForm(0, b.coeffs / ops.mu_inv_scale)


def curvature(A: PolyForm, alg: LieAlgebra) -> PolyForm:
    """F_A = dA + 1/2 [A ^ A]."""
    if A.rank != 1:
        raise ValueError("a connection is a 1-form")
    return exterior_d(A) + 0.5 * poly_wedge_bracket(A, A, alg)


def covariant_d(A: PolyForm, u: PolyForm, alg: LieAlgebra) -> PolyForm:
    """d_A u = du + [A ^ u]."""
    if u.rank > 1:
        raise ValueError("rank overflow: d_A of a 2-form vanishes in two dimensions")
    return exterior_d(u) + poly_wedge_bracket(A, u, alg)


def constant(rank: int, value) -> PolyForm:
    """Constant form: value has shape (m,) for rank 0/2, (2, m) for rank 1."""
    v = np.asarray(value, dtype=float)
    return PolyForm(rank, v[..., None])


def monomial_form(rank, alg_dim, terms) -> PolyForm:
    """Build a form from ``terms``: iterable of (coef, (i, j), comp, lie_index).

    ``comp`` is 0/1 for dx/dy on 1-forms and ignored otherwise; each term adds
    coef * x^i y^j on that component and Lie layer.
    """
    terms = list(terms)
    p = max((i + j for _, (i, j), _, _ in terms), default=0)
    u = PolyForm.zero(rank, alg_dim, p)
    c = u.coeffs.copy()
    for coef, (i, j), comp, lie_ix in terms:
        n = poly.index(i, j)
        if rank == 1:
            c[comp, lie_ix, n] += coef
        else:
            c[lie_ix, n] += coef
    return PolyForm(rank, c)


# -------------------------------------------------------------- integration


def integrate_element(form: PolyForm, rule: QuadratureRule, tri=REF_VERTICES) -> np.ndarray:
    """Integral of a 2-form over the triangle ``tri`` (counterclockwise vertices).

    Returns one value per Lie layer.  Exact when the degree is within the rule.
    """
    if form.rank != 2:
        raise ValueError("only 2-forms integrate over a triangle")
    if form.degree > rule.exactness:
        raise ValueError(f"degree {form.degree} exceeds rule exactness {rule.exactness}")
    tri = np.asarray(tri, float)
    jac = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
    pts = tri[0] + rule.points @ jac.T
    vals = poly.evaluate(form.coeffs, pts)  # (nq, m)
    return np.linalg.det(jac) * (rule.weights @ vals)


def integrate_element_exact(form: PolyForm) -> np.ndarray:
    """Integral of a 2-form over the reference triangle from monomial moments."""
    if form.rank != 2:
        raise ValueError("only 2-forms integrate over a triangle")
    return form.coeffs @ poly.reference_integrals(form.degree)


def edge_trace_values(form: PolyForm, a, b, s) -> np.ndarray:
    """Tangential trace of a form along the segment a -> b at parameters s.

    For a 1-form this is u(a + s (b - a)) . (b - a), i.e. the integrand in the
    parameter s; for a 0-form it is the value.  Shape (len(s), m).
    """
    a, b = np.asarray(a, float), np.asarray(b, float)
    pts = a + np.outer(s, b - a)
    vals = poly.evaluate(form.coeffs, pts)
    if form.rank == 1:
        return np.einsum("qcm,c->qm", vals, b - a)
    if form.rank == 0:
        return vals
    raise ValueError("2-forms have no tangential trace on an edge")


def integrate_boundary(form: PolyForm, rule: QuadratureRule, tri=REF_VERTICES) -> np.ndarray:
    """Integral of a 1-form over the counterclockwise boundary of ``tri``."""
    if form.rank != 1:
        raise ValueError("only 1-forms integrate over a curve")
    if form.degree > 2 * len(rule.edge_points) - 1:
        raise ValueError("degree exceeds edge rule exactness")
    tri = np.asarray(tri, float)
    total = np.zeros(form.m)
    for i, j in LOCAL_EDGES:
        total += rule.edge_weights @ edge_trace_values(form, tri[i], tri[j], rule.edge_points)
    return total


def pullback(u: PolyForm, origin, jac) -> PolyForm:
    """Pull a physical-coordinate form back through x = origin + J s."""
    jac = np.asarray(jac, float)
    sub = poly.substitute_affine(u.coeffs, origin, jac)
    if u.rank == 0:
        return PolyForm(0, sub)
    if u.rank == 1:
        return PolyForm(1, np.einsum("dc,dmn->cmn", jac, sub))
    return PolyForm(2, sub * np.linalg.det(jac))
