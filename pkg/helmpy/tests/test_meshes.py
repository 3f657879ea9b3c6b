"""Random adapted mesh checks: tiling, claims, weights and projections."""
import numpy as np

from helmpy.femspace import Projection, build_space, evaluate
from helmpy.fourier import chi_E
from helmpy.hierarchy import build_hierarchy
from helmpy.utils import gauss_lobatto


def hierarchies():
    return [build_hierarchy([.4, .2, .1], 1., .2, d=1),
            build_hierarchy([.4, .2, .1], 1., .2, d=2)]


def raster_points(hier, degree=2):
    """Fine Gauss-Lobatto raster points of a hierarchy."""
    s = gauss_lobatto(degree)[0]
    axes = []
    for i, n in enumerate(hier.shape_cells):
        lat = np.append((np.arange(n)[:, None] + s[:-1]).ravel(), n)
        axes.append(hier.origin[i] + lat * hier.unit)
    grid = np.meshgrid(*axes, indexing='ij')
    return np.stack([g.ravel() for g in grid], axis=-1)


class Meshes:
    """Invariants of random adapted meshes."""
    n_meshes = 50

    def random_meshes(self):
        for hier in hierarchies():
            for _ in range(self.n_meshes):
                yield hier, hier.random_mesh(self.rng)

    def test_tiling(self):
        for hier, mesh in self.random_meshes():
            self.assertTrue(mesh.validate())

    def test_partition_of_unity(self):
        for hier, mesh in self.random_meshes():
            x = raster_points(hier)
            total = sum(chi_E(hier, g, x) for g in mesh.elements)
            self.assertTrue((total == 1).all())

    def test_lumped_weights(self):
        for hier, mesh in self.random_meshes():
            space = build_space(mesh)
            self.assertTrue((space.sigma > 0).all())
            volume = np.prod([2 * (l + hier.pml_width)
                              for l in hier.half_widths])
            self.assertAlmostEqual(space.sigma.sum(), volume, places=10)


class Projections:
    """Projections between random meshes."""
    n_meshes = 10

    def test_same_mesh_identity(self):
        hier = hierarchies()[1]
        for _ in range(self.n_meshes):
            mesh = hier.random_mesh(self.rng)
            space = build_space(mesh)
            u = self.rng.standard_normal(len(space))
            u[space.boundary] = 0
            out = Projection(space, build_space(mesh)).u(u)
            np.testing.assert_allclose(out, u, rtol=0, atol=1e-14)

    def test_constants_preserved(self):
        for hier in hierarchies():
            for _ in range(self.n_meshes):
                old = build_space(hier.random_mesh(self.rng), dirichlet=False)
                new = build_space(hier.random_mesh(self.rng), dirichlet=False)
                out = Projection(old, new).u(np.ones(len(old)))
                np.testing.assert_allclose(out, 1, rtol=0, atol=1e-12)

    def test_conformity(self):
        hier = hierarchies()[1]
        t = np.array([.1, .37, .5, .81])
        for _ in range(self.n_meshes):
            mesh = hier.random_mesh(self.rng)
            space = build_space(mesh)
            u = self.rng.standard_normal(len(space))
            for coarse, fine in mesh.hanging_edges:
                axis = int(np.flatnonzero(
                    (hier.hi[coarse] == hier.lo[fine]) |
                    (hier.lo[coarse] == hier.hi[fine]))[0])
                face = np.where(hier.hi[coarse, axis] == hier.lo[fine, axis],
                                hier.lo[fine, axis], hier.hi[fine, axis])
                other = 1 - axis
                lat = np.empty((len(t), 2))
                lat[:, axis] = face
                lat[:, other] = (hier.lo[fine, other] + t *
                                 (hier.hi[fine, other] - hier.lo[fine, other]))
                x = hier.origin + lat * hier.unit
                a = evaluate(u, x, space, np.full(len(t), coarse))
                b = evaluate(u, x, space, np.full(len(t), fine))
                np.testing.assert_allclose(a, b, rtol=0, atol=1e-11)
