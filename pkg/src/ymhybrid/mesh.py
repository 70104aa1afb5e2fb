"""Structured triangulations of the unit square and the flat torus."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Local edge i is opposite local vertex i and runs counterclockwise.
LOCAL_EDGES = np.array([[1, 2], [2, 0], [0, 1]])
REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class Mesh:
    """Oriented triangle mesh.

    ``triangles`` index canonical vertices (periodic copies merged) in
    counterclockwise order; ``tri_coords`` holds the unwrapped geometric
    vertex positions of every triangle.  Edges are oriented from the lower to
    the higher canonical vertex index and ``tri_edge_signs[t, i]`` is +1 when
    local edge i of triangle t runs along that orientation.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    tri_coords: np.ndarray
    edges: np.ndarray
    tri_edges: np.ndarray
    tri_edge_signs: np.ndarray
    boundary_edges: np.ndarray
    periodic: bool

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_triangles

    def jacobians(self) -> np.ndarray:
        c = self.tri_coords
        return np.stack([c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]], axis=-1)

    def areas(self) -> np.ndarray:
        return 0.5 * np.linalg.det(self.jacobians())

    def min_edge_length(self) -> float:
        c = self.tri_coords
        lens = [np.linalg.norm(c[:, b] - c[:, a], axis=-1) for a, b in LOCAL_EDGES]
        return float(np.min(lens))

    def edge_triangles(self) -> list:
        """For each edge, the list of (triangle, local edge) pairs touching it."""
        out = [[] for _ in range(self.n_edges)]
        for t in range(self.n_triangles):
            for i in range(3):
                out[self.tri_edges[t, i]].append((t, i))
        return out


@dataclass(frozen=True)
class ElementGeometry:
    origin: np.ndarray
    jacobian: np.ndarray
    inverse: np.ndarray
    det: float

    def to_physical(self, ref_pts):
        return self.origin + np.asarray(ref_pts) @ self.jacobian.T

    def to_reference(self, pts):
        return (np.asarray(pts) - self.origin) @ self.inverse.T


def element_geometry(mesh: Mesh, k: int) -> ElementGeometry:
    c = mesh.tri_coords[k]
    jac = np.column_stack([c[1] - c[0], c[2] - c[0]])
    return ElementGeometry(c[0].copy(), jac, np.linalg.inv(jac), float(np.linalg.det(jac)))


def structured_square(nx: int, ny: int, periodic: bool = False) -> Mesh:
    """Unit square cut into nx*ny cells, each split along its up-right diagonal."""
    lo = 3 if periodic else 1
    if nx < lo or ny < lo:
        raise ValueError(f"need nx, ny >= {lo} (periodic={periodic}), got {nx}, {ny}")
    if periodic:
        def vid(i, j):
            return (j % ny) * nx + (i % nx)
        xs, ys = np.meshgrid(np.arange(nx) / nx, np.arange(ny) / ny)
    else:
        def vid(i, j):
            return j * (nx + 1) + i
        xs, ys = np.meshgrid(np.arange(nx + 1) / nx, np.arange(ny + 1) / ny)
    vertices = np.column_stack([xs.ravel(), ys.ravel()])

    tris, coords = [], []
    for j in range(ny):
        for i in range(nx):
            p00, p10, p11, p01 = (i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)
            for tri in ((p00, p10, p11), (p00, p11, p01)):
                tris.append([vid(*p) for p in tri])
                coords.append([(p[0] / nx, p[1] / ny) for p in tri])
    triangles = np.array(tris, dtype=int)
    tri_coords = np.array(coords, dtype=float)

    edge_index = {}
    edges = []
    tri_edges = np.empty((len(tris), 3), dtype=int)
    signs = np.empty((len(tris), 3))
    for t, tri in enumerate(triangles):
        for i, (a, b) in enumerate(LOCAL_EDGES):
            va, vb = tri[a], tri[b]
            key = (min(va, vb), max(va, vb))
            if key not in edge_index:
                edge_index[key] = len(edges)
                edges.append(key)
            tri_edges[t, i] = edge_index[key]
            signs[t, i] = 1.0 if va < vb else -1.0
    edges = np.array(edges, dtype=int)
    counts = np.bincount(tri_edges.ravel(), minlength=len(edges))
    boundary = counts == 1
    for a in (vertices, triangles, tri_coords, edges, tri_edges, signs, boundary):
        a.setflags(write=False)
    return Mesh(vertices, triangles, tri_coords, edges, tri_edges, signs, boundary, periodic)


def canonical_vertex(mesh: Mesh, point) -> np.ndarray:
    """Representative of a point under the periodic identification."""
    p = np.asarray(point, dtype=float)
    return np.mod(p, 1.0) if mesh.periodic else p


def dump(mesh: Mesh, path) -> None:
    """Write a debugging dump.

    Format: a header line ``V T periodic``, then V lines ``x y``, then T lines
    ``i j k`` (canonical vertex indices, counterclockwise).
    """
    lines = [f"{mesh.n_vertices} {mesh.n_triangles} {int(mesh.periodic)}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines += [" ".join(str(v) for v in tri) for tri in mesh.triangles]
    Path(path).write_text("\n".join(lines) + "\n")
