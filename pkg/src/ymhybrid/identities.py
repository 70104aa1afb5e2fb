"""Randomized checks of the algebraic identities of g-valued forms.

Each check draws random polynomial forms, evaluates both sides of an
identity with the exact polynomial calculus and reports the largest absolute
defect at random points.
"""

import numpy as np

from . import calculus as calc
from . import poly
from .lie import LieAlgebra, su2
from .quadrature import quadrature


class FormSampler:
    """Draws random polynomial g-valued forms and counts them."""

    def __init__(self, rng, alg: LieAlgebra, max_degree: int = 3):
        self.rng, self.alg, self.max_degree = rng, alg, max_degree
        self.count = 0

    def __call__(self, rank, degree=None):
        p = int(self.rng.integers(0, self.max_degree + 1)) if degree is None else degree
        n = poly.nmono(p)
        shape = (2, self.alg.dim, n) if rank == 1 else (self.alg.dim, n)
        self.count += 1
        return calc.PolyForm(rank, self.rng.uniform(-1.0, 1.0, size=shape))


def _gap(lhs, rhs, pts):
    a, b = lhs.at(pts).value, rhs.at(pts).value
    return float(np.abs(a - b).max(initial=0.0))


def _sign(k):
    return -1.0 if k % 2 else 1.0


def _ranks(total_max, count):
    """All rank tuples with the given length whose sum is at most ``total_max``."""
    out = [()]
    for _ in range(count):
        out = [t + (k,) for t in out for k in range(3)]
    return [t for t in out if sum(t) <= total_max]


def check_all(rng, rounds: int = 10, alg: LieAlgebra = None) -> tuple:
    """Run every identity ``rounds`` times; returns (defects by name, forms drawn)."""
    alg = alg or su2()
    draw = FormSampler(rng, alg)
    br, inn, d = calc.poly_wedge_bracket, calc.poly_wedge_inner, calc.exterior_d
    defects = {}

    def note(name, value):
        defects[name] = max(defects.get(name, 0.0), value)

    rule = quadrature(10)
    for _ in range(rounds):
        pts = rng.uniform(-1.0, 1.0, size=(6, 2))
        for k, l in _ranks(1, 2):
            u, v = draw(k), draw(l)
            note("square_leibniz", _gap(d(br(u, v, alg)), br(d(u), v, alg) + _sign(k) * br(u, d(v), alg), pts))
            note("angle_leibniz", _gap(d(inn(u, v, alg)), inn(d(u), v, alg) + _sign(k) * inn(u, d(v), alg), pts))
            A = draw(1)
            lhs = calc.covariant_d(A, br(u, v, alg), alg)
            rhs = (br(calc.covariant_d(A, u, alg), v, alg)
                   + _sign(k) * br(u, calc.covariant_d(A, v, alg), alg))
            note("covariant_product_rule", _gap(lhs, rhs, pts))
        for k, l in _ranks(2, 2):
            u, v = draw(k), draw(l)
            s = _sign(k * l)
            note("square_commute", _gap(br(u, v, alg), -s * br(v, u, alg), pts))
            note("angle_commute", _gap(inn(u, v, alg), s * inn(v, u, alg), pts))
        for k, l, p in _ranks(2, 3):
            u, v, w = draw(k), draw(l), draw(p)
            s = _sign(k * l)
            note("square_assoc", _gap(br(br(u, v, alg), w, alg) + s * br(v, br(u, w, alg), alg),
                                      br(u, br(v, w, alg), alg), pts))
            zero = inn(br(u, v, alg), w, alg) + s * inn(v, br(u, w, alg), alg)
            note("angle_assoc", _gap(zero, zero * 0.0, pts))
        # d_A d_A u = [F_A ^ u] for 0-forms (3-forms vanish in 2D)
        A, u = draw(1), draw(0)
        note("covariant_d_squared", _gap(calc.covariant_d(A, calc.covariant_d(A, u, alg), alg),
                                         br(calc.curvature(A, alg), u, alg), pts))
        # covariant integration by parts on a random triangle
        tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]) + rng.uniform(-0.3, 0.3, size=(3, 2))
        A = draw(1, 2)
        for k in (0, 1):
            u, v = draw(k, 2), draw(1 - k, 2)
            boundary = calc.integrate_boundary(inn(u, v, alg), rule, tri)
            volume = (calc.integrate_element(inn(calc.covariant_d(A, u, alg), v, alg), rule, tri)
                      + _sign(k) * calc.integrate_element(inn(u, calc.covariant_d(A, v, alg), alg), rule, tri))
            note("covariant_integration_by_parts", float(np.abs(boundary - volume).max()))
        # [u ^ eps u] = 0, also for a pulled-back star
        u = draw(1)
        J = rng.uniform(0.5, 1.5, size=(2, 2)) * np.array([[1, 0.3], [0.3, 1]])
        for ops in (calc.HodgeOps(), calc.HodgeOps.for_element(J)):
            note("bracket_eps_self", _gap(br(u, calc.poly_hodge_eps(u, ops), alg),
                                          calc.PolyForm.zero(2, alg.dim), pts))
    return defects, draw.count
