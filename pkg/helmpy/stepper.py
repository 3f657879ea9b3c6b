"""
Explicit leapfrog time stepping with the absorbing layer auxiliary field.

The scheme advances the mass lumped semi-discrete system

    D_t^2 u + (z1+z2) D_2t u + z1 z2 u + L(u, s) = f
    D_t s + Z1 s + Z2 grad u = 0  (at the element nodes, midpoint in time)

with the damping rates z1(x1), z2(x2) of the absorbing layer. Without
damping it reduces to u+ = -u- + 2u + dt^2 (-L(u) + f).
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from helmpy.femspace import SpatialOperator
from helmpy.problem import discrete_source, incoming_wavelet
from helmpy.utils import gauss_lobatto, lagrange_derivative


log = logging.getLogger(__name__)


def zeta(x, L, W, R=1e-10):
    """Quadratic damping rate of the absorbing layer.

    Zero for |x| <= L, rising to |log R| 3/(2W) at |x| = L+W.
    """
    depth = np.clip((np.abs(np.asarray(x, dtype=float)) - L) / W, 0, None)
    return np.abs(np.log(R)) * 3. / (2 * W) * depth**2


class PMLProfile(object):
    """Damping rates per axis of a rectangular absorbing layer.

    Arguments
    ---------
    half_widths : tuple
        Half-widths L_i of the region of interest.
    width : float
        Layer width W.
    reflection : float
        Expected artificial reflection R.
    """

    def __init__(self, half_widths, width, reflection=1e-10):
        self.half_widths = tuple(half_widths)
        self.width = float(width)
        self.reflection = reflection
        return

    def __repr__(self):
        return '<PMLProfile L=%r W=%r R=%g>' % (self.half_widths, self.width,
                                               self.reflection)

    def rates(self, x):
        """Rates zeta_i(x_i) at points x (..., d), same shape as x."""
        x = np.asarray(x, dtype=float)
        return np.stack([zeta(x[..., i], l, self.width, self.reflection)
                         for i, l in enumerate(self.half_widths)], axis=-1)

    def node_coefficients(self, x, dt, damping=0.):
        """The nodal update coefficients (z1, z2, z3) at points x.

        `damping` is added to the sum of the rates (first order boundary
        absorption).
        """
        rates = self.rates(x)
        total = rates.sum(axis=-1) + damping
        product = rates.prod(axis=-1) if rates.shape[-1] == 2 else 0.
        return (-1 + .5 * dt * total, 2 - dt**2 * product, 1 + .5 * dt * total)

    def element_coefficients(self, x, dt):
        """Diagonals of (Z1, Z2, Z3) of the s update at points x (..., d)."""
        rates = self.rates(x)
        # diag(z1-z2, z2-z1), z1 alone in 1D
        mixed = 2 * rates - rates.sum(axis=-1, keepdims=True)
        return 1 - .5 * dt * rates, -dt * mixed, 1 + .5 * dt * rates


def reference_eigenvalue(p, dimension):
    """Largest eigenvalue of the lumped stiffness on the unit element."""
    s, w = gauss_lobatto(p)
    D = lagrange_derivative(s)
    K = D.T @ np.diag(w) @ D
    M = np.diag(w)
    if dimension == 2:
        K, M = np.kron(K, M) + np.kron(M, K), np.kron(M, M)
    return linalg.eigh(K, M, eigvals_only=True).max()


def wave_speed_bounds(spec, hierarchy, p=2):
    """(alpha_max, beta_min, c_max) sampled on the fine Gauss-Lobatto raster."""
    s = gauss_lobatto(p)[0]
    axes = []
    for i, n in enumerate(hierarchy.shape_cells):
        lat = (np.arange(n)[:, None] + s[None, :-1]).ravel()
        axes.append(hierarchy.origin[i] + np.append(lat, n) * hierarchy.unit)
    grid = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)
    alpha, beta = spec.coefficients(grid.reshape(-1, hierarchy.dimension))
    return alpha.max(), beta.min(), np.sqrt(alpha / beta).max()


def cfl_timestep(T_up, spec, hierarchy, c_cfl=0.9, p=2):
    """Time step and steps per mesh update.

    m is the smallest integer with T_up/m <= c_cfl 2/sqrt(lambda), lambda
    bounding the largest eigenvalue of the discrete operator on the finest
    level.

    Returns
    -------
    (dt, m)
    """
    assert T_up > 0, 'T_up must be positive.'
    alpha_max, beta_min, _ = wave_speed_bounds(spec, hierarchy, p)
    lam = (alpha_max / beta_min * reference_eigenvalue(p, hierarchy.dimension) /
           hierarchy.unit**2)
    m = max(1, int(np.ceil(T_up / (c_cfl * 2 / np.sqrt(lam)) - 1e-12)))
    log.debug('CFL bound lambda=%.6g gives m=%i.' % (lam, m))
    return T_up / m, m


@dataclass
class WaveState:
    """Nodal field at two time levels and the absorbing layer field."""
    u: np.ndarray
    u_old: np.ndarray
    s: np.ndarray
    n: int
    t0: float
    dt: float

    @property
    def t(self):
        return self.t0 + self.n * self.dt


def initial_state(space, t0, dt):
    """Zero initial data, u at t0 - dt included."""
    return WaveState(np.zeros(len(space)), np.zeros(len(space)),
                     space.zeros_s(), 0, t0, dt)


def sound_soft_mask(space, spec, t):
    """Nodes on the scatterer boundary and their values -u_I(x, t).

    Returns
    -------
    (nodes, values) : index array and Dirichlet data of the scattered field
    """
    nodes = np.flatnonzero(space.obstacle)
    if not nodes.size or spec.source != 'plane':
        return nodes, np.zeros(len(nodes))
    return nodes, -incoming_wavelet(space.points[nodes], t, spec)


class TimeStepper(object):
    """The explicit update on a fixed node set.

    Arguments
    ---------
    space : NodeSet
    spec : ProblemSpec
    dt : float
    pml : PMLProfile, optional
        Absorbing layer, no damping if not given.
    boundary_damping : ndarray, optional
        Additional nodal damping rate (first order absorbing boundary).
    """

    def __init__(self, space, spec, dt, pml=None, boundary_damping=None):
        self.space = space
        self.spec = spec
        self.dt = dt
        self.operator = SpatialOperator(space, spec)
        damping = 0. if boundary_damping is None else boundary_damping
        # R=1 has zero rates
        profile = pml or PMLProfile(spec.half_widths, 1., reflection=1.)
        self.z1, self.z2, self.z3 = profile.node_coefficients(
            space.points, dt, damping)
        # to the (element, axis, node) layout of s
        self.s1, self.s2, self.s3 = [
            np.swapaxes(c, 1, 2) for c in profile.element_coefficients(
                space.local_points[space.pml_elements], dt)]
        return

    def step(self, state):
        """Advance `state` by one time step."""
        dt, space = self.dt, self.space
        f = discrete_source(self.operator, state.t, self.spec, dt)
        rhs = (self.z1 * state.u_old + self.z2 * state.u +
               dt**2 * (-self.operator.apply(state.u, state.s) + f))
        u = rhs / self.z3
        u[space.boundary] = 0
        nodes, values = sound_soft_mask(space, self.spec, state.t + dt)
        u[nodes] = values
        s = state.s
        if s.size:
            grad = self.operator.grad(.5 * (state.u + u))
            s = (self.s1 * s + self.s2 * grad) / self.s3
        return WaveState(u, state.u, s, state.n + 1, state.t0, dt)


def do_time_step(state, stepper):
    """One leapfrog step of `state` with a :class:`TimeStepper`."""
    return stepper.step(state)
