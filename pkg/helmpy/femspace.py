"""
Conforming Gauss-Lobatto element spaces on adapted meshes.

A :class:`NodeSet` holds the distinct Gauss-Lobatto points of all active
(non-scatterer) leaves of an adapted mesh. Points on a coarse edge that are
not Gauss-Lobatto points of the coarse element are hanging: their values
are interpolated from the coarse edge polynomial and they are not part of
the node set. The sparse `gather` matrix maps nodal values to the
constraint-resolved element-local values, so all element quantities are
composed with the hanging-node interpolation at assembly.

Conventions
-----------
* Element-local nodes are tensor-product Gauss-Lobatto points with the first
  axis running slowest.
* Nodal fields are 1D arrays over the node set. The auxiliary absorbing
  layer field s is an array (n_pml_elements, d, n_local).
* Quadrature points are the local nodes (mass lumping).
"""
import itertools
import logging
from functools import cached_property

import numpy as np
from scipy import linalg, sparse

from helmpy.utils import (MeshError, gauss_lobatto, lagrange_basis,
                          lagrange_derivative, tensor_basis, reference_nodes,
                          reference_weights)


log = logging.getLogger(__name__)

#: Resolution of the integer point keys in lattice units
KEY_SCALE = 2**20


def block_diagonal(blocks):
    """Sparse block diagonal matrix of an array of blocks (n, r, c)."""
    n, r, c = blocks.shape
    rows = np.arange(n)[:, None, None] * r + np.arange(r)[None, :, None]
    cols = np.arange(n)[:, None, None] * c + np.arange(c)[None, None, :]
    return sparse.csr_matrix(
        (blocks.ravel(), (np.broadcast_to(rows, blocks.shape).ravel(),
                          np.broadcast_to(cols, blocks.shape).ravel())),
        shape=(n * r, n * c))


def reference_gradients(degree, dimension):
    """Derivative matrices G_c[q, a] of the local basis on [0, 1]^d."""
    s = gauss_lobatto(degree)[0]
    D = lagrange_derivative(s)
    if dimension == 1:
        return [D]
    eye = np.eye(degree + 1)
    return [np.kron(D, eye), np.kron(eye, D)]


def claimed_nodes(degree, lo, hi, n_cells):
    """Fine raster indices along one axis claimed by the lattice interval
    [lo, hi), closed at the domain end n_cells, and their coordinates
    relative to the interval.
    """
    s = gauss_lobatto(degree)[0]
    stop = degree * hi + (1 if hi == n_cells else 0)
    idx = np.arange(degree * lo, stop)
    c, m = np.divmod(idx, degree)
    return idx, (c + s[m] - lo) / (hi - lo)


class NodeSet(object):
    """Node set, lumped weights and constraint map of an adapted mesh.

    Attributes
    ----------
    mesh : AdaptedMesh
    elements : ndarray
        Active (non-scatterer) leaf ids; element quantities follow this order.
    points : ndarray (n, d)
        Physical node coordinates, sorted lexicographically.
    sigma : ndarray (n,)
        Lumped weights, the integrals of the nodal basis functions.
    gather : scipy.sparse.csr_matrix (n_elements*n_local, n)
        Nodal values to constraint-resolved element-local values.
    boundary, obstacle, fixed : ndarrays of bool
        Nodes on the outer boundary (Dirichlet zero), on the scatterer
        boundary, and either.
    pml_elements : ndarray
        Positions of the absorbing layer elements in `elements`.
    """

    def __init__(self, mesh, degree=2, dirichlet=True):
        hier = mesh.hierarchy
        self.mesh = mesh
        self.hierarchy = hier
        self.degree = degree
        self.dirichlet = dirichlet
        self.dimension = d = hier.dimension
        s, w = gauss_lobatto(degree)
        self.reference = reference_nodes(s, d)
        self.reference_weights = reference_weights(w, d)
        self.nloc = len(self.reference_weights)

        leaves = mesh.elements
        active = ~hier.void[leaves]
        self.elements = leaves[active]
        self.leaf_position = np.full(len(leaves), -1, dtype=np.int64)
        self.leaf_position[active] = np.arange(active.sum())
        lo = hier.lo[self.elements].astype(float)
        ext = (hier.hi[self.elements] - hier.lo[self.elements]).astype(float)
        self.local_lattice = lo[:, None, :] + ext[:, None, :] * self.reference
        self.sizes = ext * hier.unit
        self.local_points = hier.origin + self.local_lattice * hier.unit
        self.local_weights = (self.reference_weights[None, :] *
                              np.prod(self.sizes, axis=1)[:, None])
        self.pml_elements = np.flatnonzero(hier.pml[self.elements])
        self._build_nodes()
        log.debug('Node set with %i nodes, %i hanging points on %i elements.'
                  % (len(self), self.n_hanging, len(self.elements)))
        return

    def _containers(self, plat):
        """Leaves around each point and whether the point is a local node."""
        hier, mesh = self.hierarchy, self.mesh
        s = gauss_lobatto(self.degree)[0]
        N = np.array(hier.shape_cells)
        near = np.rint(plat)
        integral = np.abs(plat - near) < 1e-9
        low = np.where(integral, near - 1, np.floor(plat)).astype(np.int64)
        high = np.where(integral, near, np.floor(plat)).astype(np.int64)
        low, high = np.clip(low, 0, N - 1), np.clip(high, 0, N - 1)
        combos = itertools.product((0, 1), repeat=self.dimension)
        pos = np.stack([mesh.owner[tuple(np.where(c, high[:, i], low[:, i])
                                         for i, c in enumerate(combo))]
                        for combo in combos], axis=1)
        gids = mesh.elements[pos]
        t = (plat[:, None, :] - hier.lo[gids]) / (hier.hi[gids] - hier.lo[gids])
        node_axis = np.abs(t[..., None] - s).min(axis=-1) < 1e-9
        boundary = (integral & ((near == 0) | (near == N))).any(axis=1)
        return gids, node_axis, boundary

    def _build_nodes(self):
        hier, d = self.hierarchy, self.dimension
        s = gauss_lobatto(self.degree)[0]
        lat = self.local_lattice.reshape(-1, d)
        keys = np.rint(lat * KEY_SCALE).astype(np.int64)
        ukeys, first, inverse = np.unique(keys, axis=0, return_index=True,
                                          return_inverse=True)
        inverse = inverse.reshape(-1)
        plat = lat[first]
        gids, node_axis, boundary = self._containers(plat)
        void = hier.void[gids]
        is_node = node_axis.all(axis=-1)
        hanging = (~void & ~is_node).any(axis=1)
        true = ~hanging
        n_true = int(true.sum())
        index = np.full(len(plat), -1, dtype=np.int64)
        index[true] = np.arange(n_true)

        rows, cols, vals = [np.flatnonzero(true)], [index[true]], [np.ones(n_true)]
        if hanging.any():
            lookup = {tuple(k): i for i, k in enumerate(ukeys.tolist())}
            memo = {}

            def resolve(i, depth=0):
                if true[i]:
                    return {index[i]: 1.}
                if i in memo:
                    return memo[i]
                if depth > 64:
                    raise MeshError('Hanging node constraints do not resolve.')
                master, axis, best = None, None, -1
                for c in np.flatnonzero(~void[i] & ~is_node[i]):
                    g = gids[i, c]
                    free = np.flatnonzero(~node_axis[i, c])
                    if len(free) != 1:
                        raise MeshError('Point %r lies inside element %i.'
                                        % (plat[i].tolist(), g))
                    extent = hier.hi[g, free[0]] - hier.lo[g, free[0]]
                    if extent > best:
                        master, axis, best = g, free[0], extent
                lo = hier.lo[master, axis]
                weights = lagrange_basis(s, (plat[i, axis] - lo) / best)
                out = {}
                for b, wb in enumerate(weights):
                    if abs(wb) < 1e-14:
                        continue
                    y = plat[i].copy()
                    y[axis] = lo + best * s[b]
                    k = lookup[tuple(np.rint(y * KEY_SCALE).astype(np.int64))]
                    for col, v in resolve(k, depth + 1).items():
                        out[col] = out.get(col, 0.) + wb * v
                memo[i] = out
                return out

            for i in np.flatnonzero(hanging):
                con = resolve(i)
                rows.append(np.full(len(con), i))
                cols.append(np.fromiter(con.keys(), dtype=np.int64))
                vals.append(np.fromiter(con.values(), dtype=float))
        point_matrix = sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(len(plat), n_true))
        self.gather = point_matrix[inverse]
        self.n_hanging = int(hanging.sum())
        self.lattice_points = plat[true]
        self.points = hier.origin + self.lattice_points * hier.unit
        self.boundary = boundary[true] & self.dirichlet
        self.obstacle = void[true].any(axis=1) & (~void[true]).any(axis=1)
        self.fixed = self.boundary | self.obstacle
        self.sigma = self.gather.T @ self.local_weights.ravel()
        return

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return '<NodeSet %i nodes, %i elements, p=%i>' % (
            len(self), len(self.elements), self.degree)

    @property
    def fine_shape(self):
        """Shape of the raster of Gauss-Lobatto points of the finest level."""
        return tuple(self.degree * n + 1 for n in self.hierarchy.shape_cells)

    @cached_property
    def fine_sampler(self):
        """Sparse map of element-local values to the fine raster, each
        fine point taken from the element whose half-open box claims it."""
        hier, p = self.hierarchy, self.degree
        s = gauss_lobatto(p)[0]
        rows, cols, vals = [], [], []
        cache = {}
        for e, gid in enumerate(self.elements):
            idx, mats = [], []
            for i, n in enumerate(hier.shape_cells):
                lo, hi = int(hier.lo[gid, i]), int(hier.hi[gid, i])
                ix, t = claimed_nodes(p, lo, hi, n)
                key = (hi - lo, hi == n)
                if key not in cache:
                    cache[key] = lagrange_basis(s, t)
                idx.append(ix)
                mats.append(cache[key])
            block = mats[0]
            for m in mats[1:]:
                block = np.kron(block, m)
            grid = np.meshgrid(*idx, indexing='ij')
            flat = np.ravel_multi_index([g.ravel() for g in grid],
                                        self.fine_shape)
            rows.append(np.repeat(flat, self.nloc))
            cols.append(np.tile(e * self.nloc + np.arange(self.nloc), len(flat)))
            vals.append(block.ravel())
        n_fine = int(np.prod(self.fine_shape))
        return sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n_fine, len(self.elements) * self.nloc))

    def local(self, u):
        """Constraint-resolved element-local values (n_elements, n_local)."""
        return (self.gather @ u).reshape(len(self.elements), self.nloc)

    def sample(self, u):
        """Values of a nodal field on the fine raster (array of fine_shape)."""
        return (self.fine_sampler @ (self.gather @ u)).reshape(self.fine_shape)

    def element_rows(self, positions):
        """Rows of element-local values belonging to element positions."""
        positions = np.asarray(positions, dtype=np.int64)
        return (positions[:, None] * self.nloc + np.arange(self.nloc)).ravel()

    def position(self, gids):
        """Positions of active element ids in `elements`."""
        gids = np.asarray(gids, dtype=np.int64)
        pos = np.minimum(np.searchsorted(self.elements, gids),
                         len(self.elements) - 1)
        if gids.size and not (self.elements[pos] == gids).all():
            raise MeshError('Elements are not active leaves of the mesh.')
        return pos

    def zeros_s(self):
        """A zero absorbing layer auxiliary field."""
        return np.zeros((len(self.pml_elements), self.dimension, self.nloc))


def build_space(mesh, p=2, dirichlet=True):
    """Build the :class:`NodeSet` of degree p on an adapted mesh.

    Arguments
    ---------
    mesh : AdaptedMesh
    p : int
        Polynomial degree.
    dirichlet : bool
        Whether the outer boundary carries homogeneous Dirichlet values.
    """
    return NodeSet(mesh, p, dirichlet)


def evaluate(u, x, space, elements=None):
    """Evaluate a nodal field at physical points.

    Arguments
    ---------
    u : ndarray
        Nodal values on `space`.
    x : array-like (..., d)
        Points in the closed domain.
    space : NodeSet
    elements : array-like, optional
        Element ids to evaluate in (one per point); by default the leaf
        whose lattice cell contains the point.

    Returns
    -------
    ndarray : values, zero inside the scatterer.
    """
    hier = space.hierarchy
    d = space.dimension
    lat = hier.lattice(np.reshape(x, (-1, d)))
    N = np.array(hier.shape_cells)
    if ((lat < -1e-9) | (lat > N + 1e-9)).any():
        raise MeshError('Points outside the domain.')
    if elements is None:
        cell = np.clip(np.floor(lat), 0, N - 1).astype(np.int64)
        pos = space.leaf_position[space.mesh.owner[tuple(cell.T)]]
    else:
        pos = space.position(np.reshape(elements, -1))
    dtype = np.result_type(np.asarray(u).dtype, float)
    values = np.zeros(len(lat), dtype=dtype)
    ok = pos >= 0
    gids = space.elements[pos[ok]]
    t = (lat[ok] - hier.lo[gids]) / (hier.hi[gids] - hier.lo[gids])
    basis = tensor_basis(gauss_lobatto(space.degree)[0], t)
    values[ok] = (basis * space.local(u)[pos[ok]]).sum(axis=-1)
    return values


class SpatialOperator(object):
    """The mass lumped operator L(u, s)(x) = (alpha(grad u + s), grad w_x)
    / (beta(x) sigma_x) on a node set, assembled element by element.

    Attributes
    ----------
    stiffness : sparse (n, n)
    coupling : sparse (n, n_s)
        Acting on the flattened absorbing layer field.
    gradient : sparse (n_s, n)
        Gradient of the nodal field at the absorbing layer element nodes.
    contrast : sparse or None
        Material contrast coupling of the scattering source, acting on the
        flattened incoming wavelet gradient at `contrast_points`.
    """

    def __init__(self, space, spec):
        self.space = space
        d, nloc = space.dimension, space.nloc
        alpha, _ = spec.coefficients(space.local_points)
        _, self.beta = spec.coefficients(space.points)
        self.inv_mass = 1. / (self.beta * space.sigma)
        grads = reference_gradients(space.degree, d)
        scale = [1. / space.sizes[:, c] for c in range(d)]

        aw = alpha * space.local_weights
        blocks = sum(np.einsum('qa,eq,qb->eab', G, aw * sc[:, None]**2, G)
                     for G, sc in zip(grads, scale))
        G = space.gather
        self.stiffness = (G.T @ block_diagonal(blocks) @ G).tocsr()

        pml = space.pml_elements
        Gp = G[space.element_rows(pml)]
        self.coupling = (Gp.T @ block_diagonal(
            self._coupling_blocks(grads, scale, aw, pml))).tocsr()
        self.gradient = (block_diagonal(np.concatenate(
            [np.broadcast_to(Gc, (len(pml), nloc, nloc)) * sc[pml, None, None]
             for Gc, sc in zip(grads, scale)], axis=1)) @ Gp).tocsr()

        contrast = np.abs(alpha - spec.alpha0) > 0
        src = np.flatnonzero(contrast.any(axis=1))
        self.contrast, self.contrast_points = None, None
        if src.size:
            cw = (alpha - spec.alpha0) * space.local_weights
            Gs = G[space.element_rows(src)]
            self.contrast = (Gs.T @ block_diagonal(
                self._coupling_blocks(grads, scale, cw, src))).tocsr()
            self.contrast_points = space.local_points[src]
        self.beta_contrast = np.abs(self.beta - spec.beta0) > 0
        return

    @staticmethod
    def _coupling_blocks(grads, scale, weights, positions):
        """Blocks B[e][a, c*nloc+q] = weight_q G_c[q, a] / h_c."""
        return np.concatenate(
            [np.einsum('qa,eq->eaq', Gc, weights[positions] *
                       sc[positions, None])
             for Gc, sc in zip(grads, scale)], axis=2)

    def apply(self, u, s=None):
        """L(u, s) at all nodes, zero at fixed nodes."""
        out = self.stiffness @ u
        if s is not None and s.size:
            out = out + self.coupling @ s.ravel()
        out = out * self.inv_mass
        out[self.space.fixed] = 0
        return out

    def grad(self, u):
        """Gradient at the absorbing layer element nodes, shape of s."""
        space = self.space
        return (self.gradient @ u).reshape(
            len(space.pml_elements), space.dimension, space.nloc)


def apply_operator(u, s, space, spec):
    """Apply the discrete operator L(u, s) on `space`."""
    return SpatialOperator(space, spec).apply(u, s)


def _element_basis(space, positions, lattice):
    """Local basis of elements at lattice points (n, nq, d) -> (n, nq, nloc)."""
    hier = space.hierarchy
    gids = space.elements[positions]
    lo = hier.lo[gids][:, None, :]
    ext = (hier.hi[gids] - hier.lo[gids])[:, None, :]
    return tensor_basis(gauss_lobatto(space.degree)[0], (lattice - lo) / ext)


def _cell_matrix(basis, positions, n_columns):
    """Sparse evaluation matrix (cell quadrature points x element-local)."""
    n, nq, nloc = basis.shape
    rows = np.broadcast_to(np.arange(n * nq).reshape(n, nq, 1), basis.shape)
    cols = np.broadcast_to(positions[:, None, None] * nloc +
                           np.arange(nloc)[None, None, :], basis.shape)
    return sparse.csr_matrix((basis.ravel(), (rows.ravel(), cols.ravel())),
                             shape=(n * nq, n_columns))


def union_cells(old, new):
    """Overlay cells of two adapted meshes of the same hierarchy.

    Returns
    -------
    (lo, hi, old_positions, new_positions) : lattice bounds of the finer of
    the two overlapping active leaves and the positions of the containing
    elements in both node sets.
    """
    hier = new.hierarchy
    gnew = new.elements
    corner = old.mesh.owner[tuple(hier.lo[gnew].T)]
    gold = old.mesh.elements[corner]
    inside = hier.contains(gold, gnew)
    cell_gids = [gnew[inside]]
    old_gids, new_gids = [gold[inside]], [gnew[inside]]
    for g in gnew[~inside]:
        leaves = old.mesh.elements[np.unique(old.mesh.owner[hier.cell_slices(g)])]
        cell_gids.append(leaves)
        old_gids.append(leaves)
        new_gids.append(np.full(len(leaves), g))
    cells = np.concatenate(cell_gids)
    return (hier.lo[cells], hier.hi[cells], old.position(np.concatenate(old_gids)),
            new.position(np.concatenate(new_gids)))


class Projection(object):
    """Projections of nodal and absorbing layer fields between the spaces of
    two adapted meshes, using quadrature on their union overlay.

    Onto an unchanged space both projections are the identity.
    """

    def __init__(self, old, new):
        assert old.degree == new.degree, 'Spaces need the same degree.'
        self.old, self.new = old, new
        self.identity = (old.mesh == new.mesh and
                         old.dirichlet == new.dirichlet)
        if self.identity:
            return
        hier = new.hierarchy
        lo, hi, e_old, e_new = union_cells(old, new)
        ext = (hi - lo).astype(float)
        lattice = lo[:, None, :] + ext[:, None, :] * new.reference
        weights = (new.reference_weights[None, :] *
                   np.prod(ext * hier.unit, axis=1)[:, None]).ravel()
        phi_old = _cell_matrix(_element_basis(old, e_old, lattice), e_old,
                               len(old.elements) * old.nloc)
        phi_new = _cell_matrix(_element_basis(new, e_new, lattice), e_new,
                               len(new.elements) * new.nloc)
        W = sparse.diags(weights)
        A_old = phi_old @ old.gather
        A_new = phi_new @ new.gather
        self.matrix = (sparse.diags(1. / new.sigma) @ A_new.T @ W @ A_old).tocsr()

        local = (sparse.diags(1. / new.local_weights.ravel()) @ phi_new.T @
                 W @ phi_old).tocsr()
        self.s_matrix = local[new.element_rows(new.pml_elements)][
            :, old.element_rows(old.pml_elements)]
        return

    def u(self, u):
        """Project a nodal field, outer boundary values stay zero."""
        if self.identity:
            return np.array(u, copy=True)
        out = self.matrix @ u
        out[self.new.boundary] = 0
        return out

    def s(self, s):
        """Project the elementwise absorbing layer field."""
        if self.identity:
            return np.array(s, copy=True)
        out = self.new.zeros_s()
        for c in range(self.new.dimension):
            out[:, c, :] = (self.s_matrix @ s[:, c, :].ravel()).reshape(
                len(self.new.pml_elements), self.new.nloc)
        return out


def project_u(u_old, space_old, space_new):
    """Project a nodal field from `space_old` to `space_new`."""
    return Projection(space_old, space_new).u(u_old)


def project_s(s_old, space_old, space_new):
    """Project an absorbing layer field from `space_old` to `space_new`."""
    return Projection(space_old, space_new).s(s_old)


def project_element(space, u, gids):
    """Project u from the children of elements onto the elements' spaces.

    The projection is orthogonal in the quadrature inner product of the
    children's Gauss-Lobatto points, so polynomials of the coarse space are
    reproduced exactly. The children of each element must be active leaves
    of `space`.

    Returns
    -------
    (coarse, eta) : element-local values of the projection per element
        (n, n_local) and the maximum nodal projection error over the
        children's Gauss-Lobatto points.
    """
    hier = space.hierarchy
    gids = np.atleast_1d(np.asarray(gids, dtype=np.int64))
    s = gauss_lobatto(space.degree)[0]
    local = space.local(u)
    coarse = np.zeros((len(gids), space.nloc), dtype=local.dtype)
    eta = np.zeros(len(gids))
    if not gids.size:
        return coarse, eta
    first = hier.child_ids[hier.child_ptr[gids]]
    ext = hier.hi[gids] - hier.lo[gids]
    ratios = ext // (hier.hi[first] - hier.lo[first])
    for ratio in np.unique(ratios, axis=0):
        sel = np.flatnonzero((ratios == ratio).all(axis=1))
        kids = hier.children(gids[sel])[0].reshape(len(sel), -1)
        U = local[space.position(kids.ravel())].reshape(len(sel), -1)
        g0 = gids[sel[0]]
        rel_lo = (hier.lo[kids[0]] - hier.lo[g0]) / ext[sel[0]]
        rel_ext = (hier.hi[kids[0]] - hier.lo[kids[0]]) / ext[sel[0]]
        pts = rel_lo[:, None, :] + rel_ext[:, None, :] * space.reference
        phi = tensor_basis(s, pts).reshape(-1, space.nloc)
        wts = (space.reference_weights[None, :] *
               np.prod(rel_ext, axis=1)[:, None]).ravel()
        gram = phi.T @ (wts[:, None] * phi)
        P = linalg.solve(gram, ((U * wts) @ phi).T, assume_a='pos').T
        coarse[sel] = P
        eta[sel] = np.abs(U - P @ phi.T).max(axis=1)
    return coarse, eta
