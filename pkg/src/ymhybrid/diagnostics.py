"""Charge, energy and conformity diagnostics.

Per-element charges are Lie vectors (one value per basis element e_a), i.e.
the coefficients of the element integral of the charge 2-form.  Every
integral is evaluated on pulled-back polynomials, so the results are exact up
to roundoff:

* hybrid charge   Q_K = closed int_dK Dhat + int_K [A ^ eps E]
* standard charge q_K = int_K d(eps E) + [A ^ eps E]
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import poly
from .assembly import Discretization
from .femspace import Field, broken_poly, tangential_jumps
from .mesh import LOCAL_EDGES, REF_VERTICES


class StokesMismatch(AssertionError):
    """The boundary and volume forms of int_K dDhat disagree."""


STOKES_TOL = 1e-13


@dataclass(frozen=True)
class DiagnosticsRecord:
    step: int
    time: float
    l2_rho_avg: float
    l2_rhohat_avg: float
    max_abs_Q_drift: float
    global_charge: np.ndarray  # int_Omega rho_h, one value per Lie layer
    global_charge_norm: float  # Gram norm of global_charge
    energy: float
    constraint_residual: float

    def csv_values(self):
        return (self.step, self.time, self.l2_rho_avg, self.l2_rhohat_avg, self.max_abs_Q_drift,
                self.global_charge_norm, self.energy, self.constraint_residual)


@lru_cache(maxsize=None)
def _boundary_functional(q: int) -> np.ndarray:
    """L[c, n]: closed reference-boundary integral of the monomial 1-form x^i y^j d(x_c)."""
    xs, ws = np.polynomial.legendre.leggauss(q + 1)
    s, w = 0.5 * (xs + 1.0), 0.5 * ws
    L = np.zeros((2, poly.nmono(q)))
    for a, b in LOCAL_EDGES:
        pa, pb = REF_VERTICES[a], REF_VERTICES[b]
        V = poly.vandermonde(q, pa + np.outer(s, pb - pa))
        L += np.outer(pb - pa, w @ V)
    L.setflags(write=False)
    return L


@lru_cache(maxsize=None)
def _curl_functional(q: int) -> np.ndarray:
    """K[c, n]: reference-triangle integral of d(x^i y^j d(x_c))."""
    mom = poly.reference_integrals(max(q - 1, 0))
    dx, dy = poly.diff_matrix(q, 0), poly.diff_matrix(q, 1)
    out = np.stack([-(mom @ dy), mom @ dx])
    out.setflags(write=False)
    return out


def _integral_2form(coeffs):
    """Reference integral of 2-form coefficients (..., n)."""
    p = poly.degree_of(coeffs.shape[-1])
    return coeffs @ poly.reference_integrals(p)


def bracket_term(disc: Discretization, A: Field, E: Field) -> np.ndarray:
    """int_K [A ^ eps E] for every element, shape (T, m)."""
    Ap = disc.V1.local_poly(A.coeffs)  # (T, 2, m, 3)
    Ep = disc.V1.local_poly(E.coeffs)
    epsE = np.einsum("tcd,tdmn->tcmn", disc.eps, Ep)
    prod = poly.product_tensor(1, 1)
    # 2-form coefficient of [u ^ v] is [u_x, v_y] - [u_y, v_x]
    pair = (np.einsum("tin,tjo,ijk,nop->tkp", Ap[:, 0], epsE[:, 1], disc.alg.structure, prod)
            - np.einsum("tin,tjo,ijk,nop->tkp", Ap[:, 1], epsE[:, 0], disc.alg.structure, prod))
    return _integral_2form(pair)


def boundary_flux(disc: Discretization, Dhat: Field, check: bool = True) -> np.ndarray:
    """Closed boundary integral of Dhat over every element (inside traces), (T, m).

    With ``check`` the volume form int_K dDhat is computed as well and a
    ``StokesMismatch`` is raised if the two differ beyond roundoff.
    """
    q = Dhat.space.degree
    D = broken_poly(Dhat)  # (T, 2, m, n)
    flux = np.einsum("tcmn,cn->tm", D, _boundary_functional(q))
    if check:
        vol = np.einsum("tcmn,cn->tm", D, _curl_functional(q))
        scale = max(1.0, float(np.abs(D).max(initial=0.0)))
        gap = float(np.abs(flux - vol).max(initial=0.0))
        if gap > STOKES_TOL * scale:
            raise StokesMismatch(f"Stokes check failed: |boundary - volume| = {gap:.3e}")
    return flux


def element_charges_hat(disc: Discretization, A: Field, E: Field, Dhat: Field) -> np.ndarray:
    """Hybrid per-element charges, (T, m)."""
    return boundary_flux(disc, Dhat) + bracket_term(disc, A, E)


def element_charges_std(disc: Discretization, A: Field, E: Field) -> np.ndarray:
    """Standard per-element charges int_K d_A(eps E), (T, m)."""
    Ep = disc.V1.local_poly(E.coeffs)
    epsE = np.einsum("tcd,tdmn->tcmn", disc.eps, Ep)
    curl = np.einsum("tcmn,cn->tm", epsE, _curl_functional(1))
    return curl + bracket_term(disc, A, E)


def element_charge_hat(disc, state, k: int) -> np.ndarray:
    return element_charges_hat(disc, state.A, state.E, state.Dhat)[k]


def element_charge_std(disc, state, k: int) -> np.ndarray:
    return element_charges_std(disc, state.A, state.E)[k]


def l2_pc_projection(charges, areas, gram) -> float:
    """L2 norm of the piecewise-constant field with element averages Q_K / |K|."""
    Q = np.asarray(charges, float)
    areas = np.asarray(areas, float)
    return float(np.sqrt(np.einsum("ti,ij,tj,t->", Q, gram, Q, 1.0 / areas)))


def energy(disc: Discretization, A: Field, E: Field) -> float:
    """1/2 int <E ^ eps E> + <F_A ^ mu^{-1} F_A>."""
    G = disc.alg.gram
    Eq = disc.at_quad_1form(disc.V1.local_coeffs(E.coeffs))
    electric = np.einsum("q,tqcm,tcd,tqdn,mn->", disc.w, Eq, disc.W, Eq, G)
    A_loc = disc.V1.local_coeffs(A.coeffs)
    F = disc.curvature_q(A_loc)
    magnetic = np.einsum("q,tqm,mn,tqn,t->", disc.w, F, G, F, 1.0 / disc.det)
    return 0.5 * float(electric + magnetic)


def conformity_residual(disc: Discretization, A: Field) -> float:
    """Largest tangential jump of A across interior edges."""
    return tangential_jumps(A.space, A.coeffs, disc.rule)


def global_charge(std_charges) -> np.ndarray:
    return np.asarray(std_charges).sum(axis=0)


def make_record(disc: Discretization, state, Q0) -> DiagnosticsRecord:
    """Diagnostics of a dynamics state against reference hybrid charges ``Q0``."""
    q_hat = element_charges_hat(disc, state.A, state.E, state.Dhat)
    q_std = element_charges_std(disc, state.A, state.E)
    total = global_charge(q_std)
    areas = disc.mesh.areas()
    G = disc.alg.gram
    return DiagnosticsRecord(
        step=state.step,
        time=state.t,
        l2_rho_avg=l2_pc_projection(q_std, areas, G),
        l2_rhohat_avg=l2_pc_projection(q_hat, areas, G),
        max_abs_Q_drift=float(np.abs(q_hat - Q0).max(initial=0.0)),
        global_charge=total,
        global_charge_norm=float(np.sqrt(total @ G @ total)),
        energy=energy(disc, state.A, state.E),
        constraint_residual=state.constraint_residual,
    )
