"""Lie algebras given by structure constants and an invariant inner product."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """A real Lie algebra in a fixed basis.

    ``structure[a, b, k]`` holds the coefficient of ``e_k`` in ``[e_a, e_b]``
    and ``gram[a, b] = <e_a, e_b>``.
    """

    name: str
    structure: np.ndarray
    gram: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.structure, dtype=float)
        g = np.asarray(self.gram, dtype=float)
        m = g.shape[0]
        if c.shape != (m, m, m) or g.shape != (m, m):
            raise ValueError("structure must be m x m x m and gram m x m")
        c.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "structure", c)
        object.__setattr__(self, "gram", g)

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    @property
    def abelian(self) -> bool:
        return not np.any(self.structure)

    def basis(self, a: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[a] = 1.0
        return e

    def __repr__(self):
        return f"LieAlgebra({self.name!r}, dim={self.dim})"


def su2() -> LieAlgebra:
    """su(2) in the basis e_a = -(i/2) sigma_a, so [e_1, e_2] = e_3 cyclically.

    With <x, y> = tr(x^* y) in the defining representation the Gram matrix is I/2.
    """
    eps = np.zeros((3, 3, 3))
    for a, b, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[a, b, k] = 1.0
        eps[b, a, k] = -1.0
    return LieAlgebra("su2", eps, 0.5 * np.eye(3))


def u1() -> LieAlgebra:
    return LieAlgebra("u1", np.zeros((1, 1, 1)), np.eye(1))


def by_name(name: str) -> LieAlgebra:
    try:
        return {"su2": su2, "u1": u1}[name]()
    except KeyError:
        raise ValueError(f"unknown Lie algebra {name!r}") from None


def _check(alg, *xs):
    for x in xs:
        if np.shape(x)[-1] != alg.dim:
            raise ValueError(f"expected trailing dimension {alg.dim}, got {np.shape(x)}")


def bracket(alg: LieAlgebra, x, y) -> np.ndarray:
    """[x, y]; broadcasts over leading axes."""
    _check(alg, x, y)
    return np.einsum("...a,...b,abk->...k", x, y, alg.structure)


def inner(alg: LieAlgebra, x, y):
    _check(alg, x, y)
    return np.einsum("...a,ab,...b->...", x, alg.gram, y)


def ad_matrix(alg: LieAlgebra, x) -> np.ndarray:
    """Matrix of y -> [x, y]."""
    _check(alg, x)
    return np.einsum("a,abk->kb", np.asarray(x, float), alg.structure)


def jacobi_defect(alg: LieAlgebra, x, y, z) -> np.ndarray:
    return (bracket(alg, x, bracket(alg, y, z))
            + bracket(alg, y, bracket(alg, z, x))
            + bracket(alg, z, bracket(alg, x, y)))


def invariance_defect(alg: LieAlgebra, x, y, z):
    return inner(alg, bracket(alg, x, y), z) + inner(alg, y, bracket(alg, x, z))


def structure_defects(alg: LieAlgebra) -> dict:
    """Largest violation of antisymmetry, Jacobi and invariance over basis triples."""
    c, g = alg.structure, alg.gram
    anti = np.abs(c + c.transpose(1, 0, 2)).max()
    # [e_a,[e_b,e_d]] + cyclic
    jac = (np.einsum("bdk,akl->abdl", c, c)
           + np.einsum("dak,bkl->abdl", c, c)
           + np.einsum("abk,dkl->abdl", c, c))
    inv = np.einsum("abk,kd->abd", c, g) + np.einsum("adk,bk->abd", c, g)
    return {"antisymmetry": anti, "jacobi": np.abs(jac).max(), "invariance": np.abs(inv).max()}


def adjoint_rotation(alg: LieAlgebra, axis_angle=None) -> np.ndarray:
    """Matrix of xi -> g xi g^{-1} for a constant group element g.

    For su2, ``axis_angle`` is a 3-vector whose direction is the rotation axis
    and whose length is the angle; g = exp(theta * n.e) acts as a rotation by
    theta about n.  For u1 conjugation is trivial and ``axis_angle`` is ignored.
    """
    if alg.name == "u1":
        return np.eye(1)
    if alg.name != "su2":
        raise ValueError(f"adjoint action not available for {alg.name!r}")
    w = np.zeros(3) if axis_angle is None else np.asarray(axis_angle, dtype=float)
    if w.shape != (3,):
        raise ValueError("su2 rotation needs an axis-angle 3-vector")
    theta = np.linalg.norm(w)
    if theta == 0.0:
        return np.eye(3)
    k = ad_matrix(alg, w / theta)
    # Rodrigues: exp(theta * ad_n) with ad_n skew and ad_n^3 = -ad_n
    return np.eye(3) + np.sin(theta) * k + (1.0 - np.cos(theta)) * (k @ k)


def random_rotation(alg: LieAlgebra, rng: np.random.Generator) -> np.ndarray:
    if alg.name == "u1":
        return np.eye(1)
    v = rng.normal(size=3)
    v *= rng.uniform(0.0, np.pi) / np.linalg.norm(v)
    return adjoint_rotation(alg, v)
