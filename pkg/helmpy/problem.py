"""
Materials, the incoming wavelet, source terms and the named test cases.

Points are arrays with the coordinates along the last axis. In 1D a scalar
or a 1D array of coordinates is accepted as well.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from helmpy import defaultsettings
from helmpy.utils import ConfigError, composite_gauss


log = logging.getLogger(__name__)

#: Support half-width of the wavelet profile
XI0 = np.pi

_PSI_SCALE = 1. / (3840 * np.pi * (21 - 2 * np.pi**2))

MATERIALS = ('1d_bump', '2d_bump', '2d_trap', 'homogeneous')
SOURCES = ('plane', 'point')


def psi(xi):
    """Wavelet profile (xi-pi)^4 (xi+pi)^4 / (3840 pi (21 - 2 pi^2)).

    Zero outside (-pi, pi) and normalised such that its Fourier transform
    at -1 is one.
    """
    xi = np.asarray(xi, dtype=float)
    inside = np.abs(xi) < XI0
    return np.where(inside, _PSI_SCALE * (xi**2 - np.pi**2)**4, 0.)


def dpsi(xi):
    """Derivative of :func:`psi`."""
    xi = np.asarray(xi, dtype=float)
    inside = np.abs(xi) < XI0
    return np.where(inside, 8 * _PSI_SCALE * xi * (xi**2 - np.pi**2)**3, 0.)


def wavelet_transform(k=-1., panels=64):
    """Fourier transform int exp(-i k xi) psi(xi) dxi by composite
    Gauss-Legendre quadrature."""
    return composite_gauss(lambda xi: np.exp(-1j * k * xi) * psi(xi),
                           -XI0, XI0, panels=panels)


def _points(x, dimension):
    x = np.asarray(x, dtype=float)
    if dimension == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    assert x.shape[-1] == dimension, 'Points must have %i coordinates.' % dimension
    return x


def _bump(r):
    return np.where(r <= .5, 1 + 3 * (1 - 2*r)**2 * (1 + 2*r)**2, 1.)


def material(case, x):
    """Material coefficients (alpha, beta) of a named case at points x.

    Arguments
    ---------
    case : str
        One of '1d_bump', '2d_bump', '2d_trap' or 'homogeneous'.
    x : array-like
        Points, coordinates along the last axis ('homogeneous' needs the
        coordinate axis also in 1D).

    Returns
    -------
    (alpha, beta) : ndarrays of the point shape
    """
    if case == '1d_bump':
        x = _points(x, 1)
        alpha = _bump(np.abs(x[..., 0]))
    elif case == '2d_bump':
        x = _points(x, 2)
        alpha = _bump(np.sqrt((x**2).sum(axis=-1)))
    elif case == '2d_trap':
        x = _points(x, 2)
        alpha = np.ones(x.shape[:-1])
    elif case == 'homogeneous':
        alpha = np.ones(np.shape(x)[:-1])
    else:
        raise ConfigError('Unknown material case %r, valid are %s.'
                          % (case, ', '.join(MATERIALS)))
    return alpha, np.ones_like(alpha)


@dataclass(frozen=True)
class ProblemSpec:
    """Geometry, materials and source of a scattering problem.

    Attributes
    ----------
    dimension : int
        1 or 2.
    omega : float
        Angular frequency.
    direction : tuple
        Unit propagation direction of the incoming wavelet.
    half_widths : tuple
        Half-widths L_i of the region of interest (-L_i, L_i).
    pml_width : float
        Width W of the absorbing layer around the region of interest.
    material : str
        Material case tag.
    source : str
        'plane' (incoming plane wavelet) or 'point' (external source F).
    inhomogeneity : tuple of (low, high)
        Box outside of which alpha and beta equal alpha0 and beta0.
    scatterer : tuple of boxes
        Sound-soft scatterer as a union of boxes, each ((low, high), ...).
    """
    dimension: int
    omega: float
    direction: tuple
    half_widths: tuple
    pml_width: float
    material: str
    source: str = 'plane'
    inhomogeneity: tuple = ()
    scatterer: tuple = ()
    source_center: tuple = (.5, .5)
    alpha0: float = 1.
    beta0: float = 1.
    case: str = field(default='', compare=False)

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigError('Dimension must be 1 or 2, got %r.'
                              % self.dimension)
        if not self.omega > 0:
            raise ConfigError('omega must be positive, got %r.' % self.omega)
        if len(self.direction) != self.dimension:
            raise ConfigError('direction must have %i components.'
                              % self.dimension)
        if abs(np.linalg.norm(self.direction) - 1) > 1e-14:
            raise ConfigError('direction %r is not a unit vector.'
                              % (self.direction,))
        if len(self.half_widths) != self.dimension or \
                min(self.half_widths) <= 0:
            raise ConfigError('Need %i positive half widths, got %r.'
                              % (self.dimension, self.half_widths))
        if not self.pml_width > 0:
            raise ConfigError('PML width must be positive.')
        if self.material not in MATERIALS:
            raise ConfigError('Unknown material case %r.' % self.material)
        if self.source not in SOURCES:
            raise ConfigError('Unknown source kind %r.' % self.source)
        if self.source == 'point' and self.dimension != 2:
            raise ConfigError('The point source is only defined in 2D.')
        if self.inhomogeneity and len(self.inhomogeneity) != self.dimension:
            raise ConfigError('inhomogeneity needs one box side per axis.')

    @classmethod
    def from_case(cls, case, omega, **override):
        """Create the spec of a named case with the absorbing layer of half
        a wave length.
        """
        if case not in defaultsettings.cases:
            raise ConfigError('Unknown case %r, valid are %s.' % (
                case, ', '.join(sorted(defaultsettings.cases))))
        kw = {k: v for k, v in defaultsettings.cases[case].items()
              if k in cls.__dataclass_fields__}
        kw.update(override)
        c0 = np.sqrt(kw.get('alpha0', 1.) / kw.get('beta0', 1.))
        kw.setdefault('pml_width', c0 * np.pi / omega)
        return cls(omega=float(omega), case=case, **kw)

    @property
    def c0(self):
        """Exterior wave speed."""
        return np.sqrt(self.alpha0 / self.beta0)

    @property
    def wavelength(self):
        return 2 * np.pi * self.c0 / self.omega

    @property
    def support_time(self):
        """Half-width xi0/omega of the wavelet support in time."""
        return XI0 / self.omega

    def coefficients(self, x):
        """alpha and beta at points x."""
        return material(self.material, _points(x, self.dimension))

    def _phase_range(self):
        """Min and max of (r.x)/c0 over the inhomogeneity and scatterer."""
        boxes = list(self.scatterer)
        if not boxes and self.inhomogeneity:
            boxes = [self.inhomogeneity]
        if not boxes:
            return 0., 0.
        r = np.asarray(self.direction)
        lows, highs = [], []
        for box in boxes:
            lo, hi = np.asarray(box, dtype=float).T
            lows.append(np.minimum(r*lo, r*hi).sum())
            highs.append(np.maximum(r*lo, r*hi).sum())
        return min(lows) / self.c0, max(highs) / self.c0

    def start_time(self):
        """Time t0 at which the source first touches the inhomogeneity."""
        if self.source == 'point':
            return -self.support_time
        return self._phase_range()[0] - self.support_time

    def final_time(self):
        """Time t_f after which the source has left the inhomogeneity."""
        if self.source == 'point':
            return self.support_time
        return self._phase_range()[1] + self.support_time


def incoming_wavelet(x, t, spec):
    """Incoming plane wavelet omega*psi(omega*(t - r.x/c0))."""
    x = _points(x, spec.dimension)
    phase = x @ np.asarray(spec.direction) / spec.c0
    return spec.omega * psi(spec.omega * (t - phase))


def incoming_wavelet_gradient(x, t, spec):
    """Spatial gradient of :func:`incoming_wavelet`, shape x.shape."""
    x = _points(x, spec.dimension)
    phase = x @ np.asarray(spec.direction) / spec.c0
    slope = -spec.omega**2 / spec.c0 * dpsi(spec.omega * (t - phase))
    return slope[..., None] * np.asarray(spec.direction)


def incoming_transform(x, spec, panels=64):
    """Time Fourier transform at -omega of the incoming wavelet at points x.

    Equals exp(i omega r.x/c0) up to quadrature error.
    """
    x = _points(x, spec.dimension)
    phase = x @ np.asarray(spec.direction) / spec.c0
    out = np.empty(phase.shape, dtype=complex)
    for i, tau in np.ndenumerate(phase):
        integrand = lambda t: np.exp(1j*spec.omega*t) * spec.omega * psi(
            spec.omega * (t - tau))
        out[i] = composite_gauss(integrand, tau - spec.support_time,
                                 tau + spec.support_time, panels=panels)
    return out


def point_source_F(x, spec):
    """Smeared point source F = 200/lambda^2 f0(rho/(lambda/2)) with
    f0(xi) = (xi^2-1)^4 on |xi| <= 1."""
    x = _points(x, 2)
    lam = spec.wavelength
    rho = np.sqrt(((x - np.asarray(spec.source_center))**2).sum(axis=-1))
    xi = rho / (lam / 2)
    return np.where(xi <= 1, 200. / lam**2 * (xi**2 - 1)**4, 0.)


def point_source_tail(spec):
    """Amplitude A of the late free-space response u ~ A/t of the point source.

    The source has time integral int psi times F, and in 2D a constant
    total strength Q leaves the tail Q / (2 pi t) behind the front. The
    stopping threshold eps0 is therefore reached only near t = A / eps0.
    """
    lam = spec.wavelength
    # int_0^1 (1 - xi^2)^4 xi dxi = 1/10
    strength = 200. / lam**2 * 2 * np.pi * (lam / 2)**2 / 10
    return wavelet_transform(0.).real * strength / (2 * np.pi)


def external_source(x, t, spec):
    """Time dependent external source omega*psi(omega*t)*F(x)."""
    return spec.omega * psi(spec.omega * t) * point_source_F(x, spec)


def discrete_source(operator, t_n, spec, dt):
    """Nodal source term of the explicit update at time t_n.

    For the plane wavelet this is the scattering source

        -(beta-beta0)/beta D_t^2 u_I - ((alpha-alpha0) grad u_I, grad w_x)
            / (beta sigma_x)

    assembled with the mesh quadrature of `operator` (a
    :class:`helmpy.femspace.SpatialOperator`); for the point source it is
    the nodal interpolant of the external source.
    """
    space = operator.space
    if spec.source == 'point':
        return external_source(space.points, t_n, spec)
    f = np.zeros(len(space))
    if t_n > spec.final_time():
        return f
    bmask = operator.beta_contrast
    if bmask.any():
        xb = space.points[bmask]
        d2 = (incoming_wavelet(xb, t_n + dt, spec) -
              2 * incoming_wavelet(xb, t_n, spec) +
              incoming_wavelet(xb, t_n - dt, spec)) / dt**2
        beta = operator.beta[bmask]
        f[bmask] -= (beta - spec.beta0) / beta * d2
    if operator.contrast is not None:
        grad = incoming_wavelet_gradient(operator.contrast_points, t_n, spec)
        # (element, component, node) ordering of the contrast operator
        g = np.swapaxes(grad, 1, 2).ravel()
        f -= (operator.contrast @ g) * operator.inv_mass
    return f
