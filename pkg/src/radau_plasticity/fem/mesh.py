"""Structured hexahedral meshes with displacement-driven boundary conditions.

Every prescribed degree of freedom moves linearly in time, ``u = rate * t``;
a fixed DOF simply has rate zero.  This covers all benchmarks here and keeps
a mesh fully described by arrays (hashable for the reference cache).
"""

from dataclasses import dataclass

import numpy as np


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray
    elements: np.ndarray
    bc_dofs: np.ndarray
    bc_rates: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        elements = np.asarray(self.elements, dtype=np.int64)
        if nodes.ndim != 2 or nodes.shape[1] != 3:
            raise MeshError("nodes must have shape (n, 3)")
        if elements.ndim != 2 or elements.shape[1] != 8:
            raise MeshError("elements must have shape (n, 8)")
        if elements.min() < 0 or elements.max() >= len(nodes):
            raise MeshError("connectivity refers to missing nodes")
        dofs = np.asarray(self.bc_dofs, dtype=np.int64)
        rates = np.asarray(self.bc_rates, dtype=float)
        if dofs.shape != rates.shape or len(np.unique(dofs)) != len(dofs):
            raise MeshError("boundary DOFs must be unique and match their rates")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "bc_dofs", dofs)
        object.__setattr__(self, "bc_rates", rates)

    @property
    def n_dofs(self):
        return 3 * len(self.nodes)

    @property
    def free_dofs(self):
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.bc_dofs] = False
        return np.flatnonzero(mask)

    def prescribed(self, t):
        return self.bc_rates * t

    def element_dofs(self):
        return (3 * self.elements[:, :, None] + np.arange(3)).reshape(len(self.elements), 24)

    def fingerprint(self):
        """Arrays that define the discrete problem, for hashing."""
        return [self.nodes, self.elements, self.bc_dofs, self.bc_rates]


class _BCBuilder:
    def __init__(self):
        self.bc = {}

    def set(self, nodes, component, rate):
        rate = np.broadcast_to(np.asarray(rate, dtype=float), np.shape(nodes))
        for n, r in zip(np.atleast_1d(nodes), np.atleast_1d(rate)):
            self.bc[3 * int(n) + component] = float(r)

    def arrays(self):
        dofs = np.array(sorted(self.bc), dtype=np.int64)
        return dofs, np.array([self.bc[d] for d in dofs])


def _grid(nx, ny, nz):
    """Node index grid and hex connectivity for a structured block."""
    ids = np.arange((nx + 1) * (ny + 1) * (nz + 1)).reshape(nz + 1, ny + 1, nx + 1)
    elems = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                elems.append([
                    ids[k, j, i], ids[k, j, i + 1], ids[k, j + 1, i + 1], ids[k, j + 1, i],
                    ids[k + 1, j, i], ids[k + 1, j, i + 1], ids[k + 1, j + 1, i + 1], ids[k + 1, j + 1, i],
                ])
    return ids, np.array(elems, dtype=np.int64)


def box_nodes(origin, size, divisions):
    nx, ny, nz = divisions
    xs = [np.linspace(o, o + s, n + 1) for o, s, n in zip(origin, size, divisions)]
    Z, Y, X = np.meshgrid(xs[2], xs[1], xs[0], indexing="ij")
    ids, elems = _grid(nx, ny, nz)
    return np.column_stack([X.ravel(), Y.ravel(), Z.ravel()]), elems


def simple_shear_mesh(L=1.0, rate=0.001):
    """Unit-element shear: z=0 clamped, u_y = rate*L*t and u_z = 0 on z=L, u_x = 0 everywhere.

    Holding u_z on the top face is what keeps the state homogeneous; with it
    free, a single fully integrated element tilts its top face and bends.
    """
    nodes, elems = box_nodes((0.0, 0.0, 0.0), (L, L, L), (1, 1, 1))
    bc = _BCBuilder()
    bottom = np.flatnonzero(np.isclose(nodes[:, 2], 0.0))
    top = np.flatnonzero(np.isclose(nodes[:, 2], L))
    bc.set(np.arange(len(nodes)), 0, 0.0)
    for comp in (1, 2):
        bc.set(bottom, comp, 0.0)
    bc.set(top, 1, rate * L)
    bc.set(top, 2, 0.0)
    return Mesh(nodes, elems, *bc.arrays())


def biaxial_mesh(L=1.0, rate_x=0.0005, rate_y=-0.001):
    """Centered cube with plane-stress biaxial stretch, u_x and u_y driven on opposite faces."""
    h = 0.5 * L
    nodes, elems = box_nodes((-h, -h, -h), (L, L, L), (1, 1, 1))
    bc = _BCBuilder()
    x, y, z = nodes.T
    bc.set(np.flatnonzero(np.isclose(x, -h)), 0, 0.0)
    bc.set(np.flatnonzero(np.isclose(x, h)), 0, rate_x)
    bc.set(np.flatnonzero(np.isclose(y, h)), 1, 0.0)
    bc.set(np.flatnonzero(np.isclose(y, -h)), 1, rate_y)
    bc.set(np.flatnonzero(np.isclose(z, -h)), 2, 0.0)
    return Mesh(nodes, elems, *bc.arrays())


def annulus_quarter_mesh(r_inner=20.0, r_outer=40.0, thickness=1.0, n_circ=10, n_rad=10, n_thick=1, rate=1.0):
    """Quarter ring in the first quadrant, inner rim pulled radially at ``rate``.

    Rollers on the symmetry planes x=0 and y=0, u_z=0 on z=0.
    """
    ids, elems = _grid(n_rad, n_circ, n_thick)
    r = np.linspace(r_inner, r_outer, n_rad + 1)
    theta = np.linspace(0.0, 0.5 * np.pi, n_circ + 1)
    z = np.linspace(0.0, thickness, n_thick + 1)
    Z, T, R = np.meshgrid(z, theta, r, indexing="ij")
    X, Y = R * np.cos(T), R * np.sin(T)
    # exact zeros on the symmetry planes
    X[:, -1, :] = 0.0
    Y[:, 0, :] = 0.0
    nodes = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    bc = _BCBuilder()
    inner = ids[:, :, 0].ravel()
    th = T.ravel()[inner]
    cos_t = np.where(np.isclose(th, 0.5 * np.pi), 0.0, np.cos(th))
    sin_t = np.where(np.isclose(th, 0.0), 0.0, np.sin(th))
    bc.set(inner, 0, rate * cos_t)
    bc.set(inner, 1, rate * sin_t)
    bc.set(ids[:, -1, :].ravel(), 0, 0.0)
    bc.set(ids[:, 0, :].ravel(), 1, 0.0)
    bc.set(ids[0].ravel(), 2, 0.0)
    return Mesh(nodes, elems, *bc.arrays())


def write_mesh_text(mesh, path, displacements=None):
    """Plain vertex/connectivity dump: ``v x y z`` lines then ``h n0 .. n7`` lines."""
    coords = mesh.nodes if displacements is None else mesh.nodes + np.asarray(displacements).reshape(-1, 3)
    with open(path, "w") as fh:
        fh.write(f"# {len(coords)} vertices, {len(mesh.elements)} hexahedra (0-based)\n")
        for p in coords:
            fh.write("v %.17g %.17g %.17g\n" % tuple(p))
        for e in mesh.elements:
            fh.write("h " + " ".join(str(int(i)) for i in e) + "\n")
