"""
The a-priori nested Cartesian mesh levels and adapted meshes drawn from them.

Element geometry is kept in integer lattice units of the finest mesh width
h_K, with the lattice origin at the lower corner of the computational domain
(-L-W). Elements are addressed by global integer ids, ordered by level and
row-major lattice index within each level. Inside the region of interest
level k has the mesh width h_k, in the absorbing layer strips the axis across
the strip always has the finest width h_K.
"""
import itertools
import logging
import warnings
from collections import namedtuple
from functools import cached_property

import numpy as np

from helmpy.utils import ConfigError, MeshError


log = logging.getLogger(__name__)


class ElementId(namedtuple('ElementId', ['id', 'level', 'index', 'lo', 'hi'])):
    """An element of the hierarchy.

    Attributes
    ----------
    id : int
        Global element id.
    level : int
        Level 1..K.
    index : tuple
        Lattice index within the level per axis.
    lo, hi : tuple
        Element bounds in lattice units.
    """
    __slots__ = ()


def _integer_ratio(a, b, what):
    ratio = a / b
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9 * max(1., ratio):
        raise ConfigError('%s is not a positive integer (%r/%r = %r).'
                          % (what, a, b, ratio))
    return n


def _axis_edges(ratio, pml_cells, interior_cells):
    left = np.arange(pml_cells)
    inner = pml_cells + ratio * np.arange(interior_cells // ratio + 1)
    right = pml_cells + interior_cells + np.arange(1, pml_cells + 1)
    return np.concatenate([left, inner, right]).astype(np.int64)


def _summed_table(mask):
    table = mask.astype(np.int64)
    for ax in range(mask.ndim):
        table = np.cumsum(table, axis=ax)
    return np.pad(table, [(1, 0)] * mask.ndim)


def _box_sums(table, lo, hi):
    """Sums of the table's source array over lattice boxes [lo, hi)."""
    d = lo.shape[1]
    total = np.zeros(len(lo), dtype=np.int64)
    for corner in itertools.product((0, 1), repeat=d):
        idx = tuple(np.where(c, hi[:, i], lo[:, i]) for i, c in enumerate(corner))
        total += (-1)**(d - sum(corner)) * table[idx]
    return total


class NestedHierarchy(object):
    """Nested mesh levels T^1 ... T^K with absorbing layer strip grading.

    Use :func:`build_hierarchy` to construct one with validation.

    Attributes
    ----------
    widths : tuple
        Mesh widths h_1 > ... > h_K.
    unit : float
        The finest width h_K, the lattice unit.
    shape_cells : tuple
        Number of finest lattice cells per axis.
    level, lo, hi, parent : ndarrays
        Per global element id: level (1-based), lattice bounds and parent id
        (-1 on level 1).
    void : ndarray of bool
        Elements inside the sound-soft scatterer.
    pml : ndarray of bool
        Elements in the absorbing layer (outside the region of interest).
    """

    def __init__(self, widths, half_widths, pml_width, scatterer=()):
        self.widths = tuple(float(h) for h in widths)
        self.n_levels = len(self.widths)
        self.half_widths = tuple(float(l) for l in half_widths)
        self.dimension = d = len(self.half_widths)
        self.pml_width = float(pml_width)
        self.unit = self.widths[-1]
        self.level_cells = [_integer_ratio(h, self.unit, 'h_k/h_K')
                            for h in self.widths]
        self.pml_cells = int(round(self.pml_width / self.unit))
        self.interior_cells = tuple(
            _integer_ratio(2 * l, self.widths[0], '2L/h_1') *
            self.level_cells[0] for l in self.half_widths)
        self.shape_cells = tuple(l + 2 * self.pml_cells
                                 for l in self.interior_cells)
        self.origin = -np.array(self.half_widths) - self.pml_width

        self.edges = [[_axis_edges(r, self.pml_cells, l)
                       for l in self.interior_cells]
                      for r in self.level_cells]
        self.shape = [tuple(len(e) - 1 for e in ed) for ed in self.edges]
        self.offset = np.cumsum([0] + [int(np.prod(s)) for s in self.shape])
        self._build_elements()
        self._build_topology()
        self.pml = np.zeros(len(self.level), dtype=bool)
        for i, l in enumerate(self.interior_cells):
            self.pml |= (self.hi[:, i] <= self.pml_cells)
            self.pml |= (self.lo[:, i] >= self.pml_cells + l)
        self.scatterer = tuple(scatterer)
        self._build_void()
        return

    def _build_elements(self):
        lo, hi, level = [], [], []
        for k, ed in enumerate(self.edges):
            grids = np.meshgrid(*[np.arange(len(e) - 1) for e in ed],
                                indexing='ij')
            idx = [g.ravel() for g in grids]
            lo.append(np.stack([e[i] for e, i in zip(ed, idx)], axis=-1))
            hi.append(np.stack([e[i + 1] for e, i in zip(ed, idx)], axis=-1))
            level.append(np.full(len(idx[0]), k + 1))
        self.lo = np.concatenate(lo)
        self.hi = np.concatenate(hi)
        self.level = np.concatenate(level)
        for a in (self.lo, self.hi, self.level):
            a.flags.writeable = False
        return

    def _build_topology(self):
        n = len(self.level)
        parent = np.full(n, -1, dtype=np.int64)
        for k in range(1, self.n_levels):
            ids = self.level_ids(k + 1)
            pidx = [np.searchsorted(e, self.lo[ids, i], side='right') - 1
                    for i, e in enumerate(self.edges[k - 1])]
            parent[ids] = self.offset[k - 1] + np.ravel_multi_index(
                pidx, self.shape[k - 1])
        has = parent >= 0
        order = np.argsort(parent[has], kind='stable')
        self.child_ids = np.flatnonzero(has)[order]
        counts = np.bincount(parent[has], minlength=n)
        self.child_ptr = np.concatenate([[0], np.cumsum(counts)])
        self.parent = parent
        return

    def _build_void(self):
        mask = np.zeros(self.shape_cells, dtype=bool)
        for box in self.scatterer:
            box = np.asarray(box, dtype=float)
            if box.shape != (self.dimension, 2):
                raise ConfigError('Scatterer box %r needs (low, high) per axis.'
                                  % (box.tolist(),))
            lat = (box - self.origin[:, None]) / self.unit
            ilat = np.rint(lat).astype(int)
            if np.abs(lat - ilat).max() > 1e-9 or (ilat[:, 0] < 0).any() or \
                    (ilat[:, 1] > self.shape_cells).any():
                raise ConfigError('Scatterer box %r is not lattice-aligned.'
                                  % (box.tolist(),))
            mask[tuple(slice(a, b) for a, b in ilat)] = True
        self.void_cells = mask
        counts = _box_sums(_summed_table(mask), self.lo, self.hi)
        volume = np.prod(self.hi - self.lo, axis=1)
        straddle = (counts > 0) & (counts < volume)
        if straddle.any():
            raise ConfigError('Scatterer is not lattice-aligned with the '
                              'coarsest level (h_1=%r).' % self.widths[0])
        self.void = counts == volume
        self.void.flags.writeable = False
        return

    def __repr__(self):
        return '<NestedHierarchy widths=%r cells=%r>' % (
            self.widths, self.shape_cells)

    def __len__(self):
        return len(self.level)

    def level_ids(self, level):
        """Global ids of all elements of `level` (1-based)."""
        return np.arange(self.offset[level - 1], self.offset[level])

    def element(self, gid):
        """The :class:`ElementId` of global id `gid`."""
        gid = int(gid)
        k = int(self.level[gid])
        index = np.unravel_index(gid - self.offset[k - 1], self.shape[k - 1])
        return ElementId(gid, k, tuple(int(i) for i in index),
                         tuple(self.lo[gid].tolist()),
                         tuple(self.hi[gid].tolist()))

    def bounds(self, gids):
        """Physical lower and upper corners of elements."""
        return (self.origin + self.lo[gids] * self.unit,
                self.origin + self.hi[gids] * self.unit)

    def lattice(self, x):
        """Lattice coordinates of physical points x (..., d)."""
        return (np.asarray(x, dtype=float) - self.origin) / self.unit

    def finest_mesh(self):
        return AdaptedMesh(self, self.level_ids(self.n_levels))

    def coarsest_mesh(self):
        return AdaptedMesh(self, self.level_ids(1))

    def children(self, gids):
        """Concatenated children ids of `gids` (in order) and their counts."""
        gids = np.atleast_1d(np.asarray(gids, dtype=np.int64))
        starts, stops = self.child_ptr[gids], self.child_ptr[gids + 1]
        counts = stops - starts
        if not counts.sum():
            return np.zeros(0, dtype=np.int64), counts
        idx = np.repeat(stops - counts.cumsum(), counts) + np.arange(counts.sum())
        return self.child_ids[idx], counts

    def get_subelements(self, gid):
        """Ids of the level k+1 elements contained in element `gid`."""
        if self.level[gid] >= self.n_levels:
            raise MeshError('Element %i is on the finest level.' % gid)
        return self.child_ids[self.child_ptr[gid]:self.child_ptr[gid + 1]]

    def ancestors(self, gids):
        """All strict ancestors of `gids` as sorted unique ids."""
        found = []
        current = self.parent[np.asarray(gids, dtype=np.int64)]
        current = np.unique(current[current >= 0])
        while current.size:
            found.append(current)
            current = self.parent[current]
            current = np.unique(current[current >= 0])
        if not found:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(found))

    def contains(self, outer, inner):
        """Whether elements `outer` contain elements `inner` (lattice test)."""
        return ((self.lo[outer] <= self.lo[inner]) &
                (self.hi[inner] <= self.hi[outer])).all(axis=-1)

    def get_parent_elements(self, mesh):
        """Elements of levels < K that strictly contain a leaf of `mesh`."""
        return np.setdiff1d(self.ancestors(mesh.elements), mesh.elements)

    def get_child_elements(self, parents):
        """The adapted mesh whose parent elements are `parents`.

        Raises
        ------
        MeshError
            If a parent lies on the finest level or the set misses an
            ancestor of one of its members.
        """
        parents = np.unique(np.asarray(parents, dtype=np.int64))
        kids = np.zeros(0, dtype=np.int64)
        if parents.size:
            if (self.level[parents] >= self.n_levels).any():
                raise MeshError('Parent elements must be coarser than h_K.')
            up = self.parent[parents]
            if not np.isin(up[up >= 0], parents).all():
                raise MeshError('Parent set is not closed under ancestors.')
            kids = self.children(parents)[0]
        leaves = np.union1d(np.setdiff1d(self.level_ids(1), parents),
                            np.setdiff1d(kids, parents))
        return AdaptedMesh(self, leaves)

    def _gaps(self, lo_a, hi_a, lo_b, hi_b):
        return np.maximum(0, np.maximum(lo_b - hi_a, lo_a - hi_b))

    def element_distance(self, e1, e2):
        """Euclidean distance between the closed element boxes."""
        gap = self._gaps(self.lo[e1], self.hi[e1], self.lo[e2], self.hi[e2])
        return np.sqrt((gap.astype(float)**2).sum(axis=-1)) * self.unit

    def mark_nearby_elements(self, marked, radius):
        """All elements within `radius` of a marked element of the same level.

        Per level k < K the level-k elements whose closed boxes lie closer
        than `radius` to some marked level-k element are returned together
        with the marked set. Touching elements always count; an element at
        exactly `radius` does not.
        """
        assert radius >= 0, 'radius must be non-negative.'
        marked = np.unique(np.asarray(marked, dtype=np.int64))
        r = radius / self.unit
        tol = 1e-9 * max(1., r)
        found = [marked]
        for k in range(self.n_levels - 1):
            here = marked[self.level[marked] == k + 1]
            if not here.size:
                continue
            edges, shape = self.edges[k], self.shape[k]
            mask = np.zeros(shape, dtype=bool)
            for gid in here:
                lo, hi = self.lo[gid], self.hi[gid]
                block, gaps = [], []
                for i, e in enumerate(edges):
                    j0 = np.searchsorted(e[1:], lo[i] - r - tol, side='left')
                    j1 = np.searchsorted(e[:-1], hi[i] + r + tol, side='right')
                    j = np.arange(j0, j1)
                    g = self._gaps(lo[i], hi[i], e[j], e[j + 1]).astype(float)
                    block.append(j)
                    gaps.append(g**2)
                dist2 = gaps[0]
                for g in gaps[1:]:
                    dist2 = np.add.outer(dist2, g)
                mask[np.ix_(*block)] |= (dist2 <= tol) | (dist2 < r**2 - tol)
            found.append(self.offset[k] + np.flatnonzero(mask.ravel()))
        return np.unique(np.concatenate(found))

    def level_map(self, parents):
        """Raster over the finest cells of the finest covering parent level,
        0 where no parent covers the cell."""
        raster = np.zeros(self.shape_cells, dtype=int)
        parents = np.asarray(parents, dtype=np.int64)
        for gid in parents[np.argsort(self.level[parents], kind='stable')]:
            raster[self.cell_slices(gid)] = self.level[gid]
        return raster

    def cell_slices(self, gid):
        """Slices of the finest cell raster covered by element `gid`."""
        return tuple(slice(a, b) for a, b in zip(self.lo[gid], self.hi[gid]))

    def random_mesh(self, rng, probability=.5):
        """A random adapted mesh, refining each element with `probability`."""
        parents = [np.zeros(0, dtype=np.int64)]
        candidates = self.level_ids(1)
        for k in range(1, self.n_levels):
            chosen = candidates[rng.random(len(candidates)) < probability]
            parents.append(chosen)
            candidates = self.children(chosen)[0]
        return self.get_child_elements(np.concatenate(parents))


def build_hierarchy(h_list, L, W, d=None, scatterer=()):
    """Build and validate a :class:`NestedHierarchy`.

    Arguments
    ---------
    h_list : sequence of float
        Strictly decreasing mesh widths with integer ratios.
    L : float | sequence
        Half-widths of the region of interest per axis.
    W : float
        Absorbing layer width, rounded up to a multiple of h_K if needed.
    d : int, optional
        Dimension if L is a scalar.
    scatterer : sequence of boxes
        Sound-soft scatterer boxes aligned with the coarsest level.
    """
    h_list = [float(h) for h in h_list]
    if not h_list:
        raise ConfigError('Need at least one mesh width.')
    if any(h <= 0 for h in h_list):
        raise ConfigError('Mesh widths must be positive: %r' % h_list)
    if any(a <= b for a, b in zip(h_list[:-1], h_list[1:])):
        raise ConfigError('Mesh widths must be strictly decreasing: %r'
                          % h_list)
    for a, b in zip(h_list[:-1], h_list[1:]):
        _integer_ratio(a, b, 'Nesting ratio h_k/h_k+1')
    L = tuple(np.atleast_1d(L).astype(float))
    if d is not None and len(L) == 1:
        L = L * d
    hK = h_list[-1]
    cells = W / hK
    if abs(cells - round(cells)) > 1e-9 * max(1., cells):
        W = np.ceil(cells) * hK
        warnings.warn('PML width rounded up to %r, a multiple of h_K.' % W)
    return NestedHierarchy(h_list, L, W, scatterer=scatterer)


class AdaptedMesh(object):
    """A set of leaf elements of a hierarchy tiling the domain.

    Attributes
    ----------
    hierarchy : NestedHierarchy
    elements : ndarray
        Sorted unique global ids of the leaves.
    """

    def __init__(self, hierarchy, elements):
        self.hierarchy = hierarchy
        self.elements = np.unique(np.asarray(elements, dtype=np.int64))
        self.elements.flags.writeable = False
        return

    def __len__(self):
        return len(self.elements)

    def __eq__(self, other):
        return (isinstance(other, AdaptedMesh) and
                other.hierarchy is self.hierarchy and
                np.array_equal(other.elements, self.elements))

    def __hash__(self):
        return hash((id(self.hierarchy), self.elements.tobytes()))

    def __repr__(self):
        return '<AdaptedMesh %i elements %r>' % (len(self), self.histogram())

    @property
    def levels(self):
        return self.hierarchy.level[self.elements]

    def histogram(self):
        """Number of leaves per level (levels 1..K)."""
        return np.bincount(self.levels, minlength=self.hierarchy.n_levels + 1)[1:]

    def position(self, gids):
        """Positions of element ids in `elements`."""
        gids = np.asarray(gids, dtype=np.int64)
        pos = np.searchsorted(self.elements, gids)
        pos = np.minimum(pos, len(self.elements) - 1)
        if gids.size and not (self.elements[pos] == gids).all():
            raise MeshError('Elements are not leaves of the mesh.')
        return pos

    @cached_property
    def owner(self):
        """Raster of the leaf position owning each finest lattice cell."""
        hier = self.hierarchy
        raster = np.full(hier.shape_cells, -1, dtype=np.int64)
        for pos, gid in enumerate(self.elements):
            raster[hier.cell_slices(gid)] = pos
        return raster

    def validate(self):
        """Check tiling and nesting in lattice arithmetic.

        Raises
        ------
        MeshError
        """
        hier = self.hierarchy
        counts = np.zeros(hier.shape_cells, dtype=np.int64)
        for gid in self.elements:
            counts[hier.cell_slices(gid)] += 1
        if not (counts == 1).all():
            raise MeshError('Leaves do not tile the domain exactly once.')
        child = self.elements
        up = hier.parent[child]
        while (up >= 0).any():
            valid = up >= 0
            if not hier.contains(up[valid], child[valid]).all():
                raise MeshError('Leaf is not contained in its ancestor.')
            child, up = up[valid], hier.parent[up[valid]]
        return True

    @cached_property
    def hanging_edges(self):
        """Pairs (coarse, fine) of neighbouring leaves whose shared face is
        only part of the coarse element's face."""
        hier = self.hierarchy
        owner = self.owner
        pairs = []
        for ax in range(hier.dimension):
            n = owner.shape[ax]
            a = np.take(owner, np.arange(n - 1), axis=ax).ravel()
            b = np.take(owner, np.arange(1, n), axis=ax).ravel()
            diff = a != b
            ga, gb = self.elements[a[diff]], self.elements[b[diff]]
            other = [i for i in range(hier.dimension) if i != ax]
            ext_a = (hier.hi[ga] - hier.lo[ga])[:, other].sum(axis=1)
            ext_b = (hier.hi[gb] - hier.lo[gb])[:, other].sum(axis=1)
            coarse = np.where(ext_a >= ext_b, ga, gb)
            fine = np.where(ext_a >= ext_b, gb, ga)
            keep = ext_a != ext_b
            pairs.append(np.stack([coarse[keep], fine[keep]], axis=-1))
        pairs = np.concatenate(pairs)
        return np.unique(pairs, axis=0) if len(pairs) else pairs
