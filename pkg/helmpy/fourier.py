"""
Incremental time Fourier transform over changing adapted meshes.

The transform sum_n dt exp(i omega t^n) u^n is accumulated per active
element as element-local increments. When an element leaves the mesh its
increment is evaluated at the Gauss-Lobatto raster of the finest level
(exact for nested polynomial spaces) and deposited at the raster points its
half-open box claims, so every raster point is written by exactly one
element per mesh epoch.
"""
import logging
from dataclasses import dataclass

import numpy as np

from helmpy.femspace import claimed_nodes
from helmpy.utils import MeshError, gauss_lobatto, lagrange_basis, tensor_basis


log = logging.getLogger(__name__)


def chi_E(hierarchy, gid, x):
    """Characteristic function of the half-open box of element `gid`.

    The box is closed at the upper boundary of the computational domain.

    Returns
    -------
    ndarray of int (one per point)
    """
    d = hierarchy.dimension
    lat = hierarchy.lattice(np.reshape(x, (-1, d)))
    lo, hi = hierarchy.lo[gid], hierarchy.hi[gid]
    top = hi == np.array(hierarchy.shape_cells)
    tol = 1e-9
    below = (lat < hi - tol) | (top & (lat <= hi + tol))
    return ((lat >= lo - tol) & below).all(axis=1).astype(int)


def fine_shape(hierarchy, degree):
    """Shape of the finest level Gauss-Lobatto raster."""
    return tuple(degree * n + 1 for n in hierarchy.shape_cells)


class FourierAccumulator(object):
    """Running Fourier transform at -omega on the finest raster.

    Attributes
    ----------
    values : ndarray (complex, fine raster shape)
        The deposited transform U_h.
    space : NodeSet or None
        The space of the live increments.
    increments : ndarray (n_elements, n_local) complex
        Live element increments, ordered as `space.elements`.
    """

    def __init__(self, hierarchy, omega, degree=2):
        self.hierarchy = hierarchy
        self.omega = omega
        self.degree = degree
        self.values = np.zeros(fine_shape(hierarchy, degree), dtype=complex)
        self.space = None
        self.increments = None
        self._basis = {}
        return

    @property
    def elements(self):
        if self.space is None:
            return np.zeros(0, dtype=np.int64)
        return self.space.elements

    def update_increments(self, space, u, t, dt):
        """Add dt exp(i omega t) u to the increment of every live element."""
        if self.space is None:
            self.initialise_new_increments(space)
        assert space.mesh == self.space.mesh, 'Increments live on another mesh.'
        self.increments += dt * np.exp(1j * self.omega * t) * space.local(u)
        return self

    def update_ft(self, new_space=None):
        """Deposit the increments of the elements that are not in the new
        space; no new space retires all of them."""
        if self.space is None:
            return self
        retiring = ~np.isin(self.space.elements, new_space.elements
                            if new_space is not None else [])
        for e in np.flatnonzero(retiring):
            self._deposit(self.space.elements[e], self.increments[e])
        log.debug('Deposited %i element increments.' % retiring.sum())
        return self

    def initialise_new_increments(self, new_space):
        """Zero increments for new elements, surviving ones keep theirs."""
        nloc = (self.degree + 1)**self.hierarchy.dimension
        increments = np.zeros((len(new_space.elements), nloc), dtype=complex)
        if self.space is not None:
            keep = np.isin(new_space.elements, self.space.elements)
            old = np.searchsorted(self.space.elements, new_space.elements[keep])
            increments[keep] = self.increments[old]
        self.space = new_space
        self.increments = increments
        return self

    def flush(self):
        """Deposit all live increments and return the transform."""
        self.update_ft(None)
        self.space, self.increments = None, None
        return self.values

    def _axis_basis(self, lo, hi, n):
        key = (lo, hi, hi == n)
        if key not in self._basis:
            idx, t = claimed_nodes(self.degree, lo, hi, n)
            s = gauss_lobatto(self.degree)[0]
            self._basis[key] = idx, lagrange_basis(s, t)
        return self._basis[key]

    def _deposit(self, gid, increment):
        hier, p = self.hierarchy, self.degree
        axes = [self._axis_basis(int(hier.lo[gid, i]), int(hier.hi[gid, i]), n)
                for i, n in enumerate(hier.shape_cells)]
        if hier.dimension == 1:
            idx, L = axes[0]
            self.values[idx] += L @ increment
        else:
            (i1, L1), (i2, L2) = axes
            block = increment.reshape(p + 1, p + 1)
            self.values[np.ix_(i1, i2)] += L1 @ block @ L2.T
        return


def sample_fine(space, u):
    """A nodal field of `space` on the finest Gauss-Lobatto raster."""
    return space.sample(u)


def compute_ft(history, omega):
    """Accumulate the transform over a recorded run.

    Arguments
    ---------
    history : iterable of (space, u, t, dt)
        The field after every completed time step with its space.
    omega : float

    Returns
    -------
    ndarray : the transform on the finest raster.
    """
    acc = None
    for space, u, t, dt in history:
        if acc is None:
            acc = FourierAccumulator(space.hierarchy, omega, space.degree)
        if acc.space is None or acc.space.mesh != space.mesh:
            acc.update_ft(space)
            acc.initialise_new_increments(space)
        acc.update_increments(space, u, t, dt)
    assert acc is not None, 'Empty history.'
    return acc.flush()


def naive_ft(history, omega):
    """The transform by sampling every step on the finest raster."""
    values = None
    for space, u, t, dt in history:
        step = dt * np.exp(1j * omega * t) * space.sample(u)
        values = step if values is None else values + step
    return values


@dataclass
class HarmonicField:
    """A complex field on the Gauss-Lobatto raster of uniform cells.

    Attributes
    ----------
    values : ndarray
        Raster values, shape (degree*n_i + 1, ...).
    unit : float
        Cell width.
    degree : int
    origin : ndarray
        Physical lower corner of the raster.
    void_cells : ndarray of bool
        Cells inside the scatterer (shape of the cell raster).
    """
    values: np.ndarray
    unit: float
    degree: int
    origin: np.ndarray
    void_cells: np.ndarray

    @classmethod
    def from_hierarchy(cls, values, hierarchy, degree):
        return cls(values, hierarchy.unit, degree, np.array(hierarchy.origin),
                   hierarchy.void_cells)

    @property
    def dimension(self):
        return self.values.ndim

    @property
    def shape_cells(self):
        return tuple((n - 1) // self.degree for n in self.values.shape)

    def axes(self):
        """Physical raster coordinates per axis."""
        s = gauss_lobatto(self.degree)[0]
        out = []
        for i, n in enumerate(self.shape_cells):
            lat = np.append((np.arange(n)[:, None] + s[:-1]).ravel(), n)
            out.append(self.origin[i] + lat * self.unit)
        return out

    def points(self):
        """Raster point coordinates, row-major (n_points, d)."""
        grids = np.meshgrid(*self.axes(), indexing='ij')
        return np.stack([g.ravel() for g in grids], axis=-1)

    def vertices(self):
        """Values at the cell vertices."""
        return self.values[(slice(None, None, self.degree),) * self.dimension]

    def is_void(self, x):
        """Whether points x (n, d) lie in scatterer cells."""
        lat = (np.reshape(x, (-1, self.dimension)) - self.origin) / self.unit
        N = np.array(self.shape_cells)
        cell = np.clip(np.floor(lat), 0, N - 1).astype(np.int64)
        return self.void_cells[tuple(cell.T)]

    def evaluate(self, x):
        """Evaluate the cellwise polynomial at physical points x (n, d)."""
        p, d = self.degree, self.dimension
        lat = (np.reshape(x, (-1, d)) - self.origin) / self.unit
        N = np.array(self.shape_cells)
        if ((lat < -1e-9) | (lat > N + 1e-9)).any():
            raise MeshError('Points outside the raster.')
        cell = np.clip(np.floor(lat), 0, N - 1).astype(np.int64)
        basis = tensor_basis(gauss_lobatto(p)[0], lat - cell)
        offsets = np.stack(np.meshgrid(*[np.arange(p + 1)] * d, indexing='ij'),
                           axis=-1).reshape(-1, d)
        idx = p * cell[:, None, :] + offsets[None, :, :]
        local = self.values[tuple(np.moveaxis(idx, -1, 0))]
        return (basis * local).sum(axis=-1)
