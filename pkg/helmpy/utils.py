"""
Module for utility functionality shared by the numerical modules.
"""
import datetime as dt
import functools
import logging
import multiprocessing
import warnings

import numpy as np
from scipy.special import roots_legendre


log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Raised for invalid run configurations (cases, hierarchies, omega)."""
    pass


class MeshError(ValueError):
    """Raised for element sets that are not valid adapted meshes."""
    pass


class RunAbort(RuntimeError):
    """Raised when a run exceeds its time horizon without stopping."""
    pass


@functools.lru_cache(maxsize=None)
def gauss_lobatto(p):
    """Gauss-Lobatto points and weights of degree p on [0, 1].

    Arguments
    ---------
    p : int
        Polynomial degree, p+1 points are returned.

    Returns
    -------
    (points, weights) : ndarrays of length p+1
        Weights sum to 1.
    """
    if p < 1:
        raise ConfigError('Polynomial degree must be >= 1, got %r.' % p)
    legendre = np.polynomial.legendre.Legendre.basis(p)
    inner = np.sort(legendre.deriv().roots().real)
    x = np.concatenate([[-1.], inner, [1.]])
    w = 2. / (p * (p + 1) * legendre(x)**2)
    points, weights = (x + 1) / 2, w / 2
    points.flags.writeable = False
    weights.flags.writeable = False
    return points, weights


@functools.lru_cache(maxsize=None)
def gauss_legendre(n):
    """Gauss-Legendre points and weights with n points on [0, 1]."""
    x, w = roots_legendre(n)
    return (x + 1) / 2, w / 2


def lagrange_basis(nodes, t):
    """Evaluate the Lagrange polynomials of `nodes` at positions `t`.

    Returns
    -------
    ndarray of shape t.shape + (len(nodes),)
    """
    nodes = np.asarray(nodes, dtype=float)
    t = np.asarray(t, dtype=float)
    diff = t[..., None] - nodes
    basis = np.ones(t.shape + (len(nodes),))
    for a, xa in enumerate(nodes):
        for b, xb in enumerate(nodes):
            if a != b:
                basis[..., a] *= diff[..., b] / (xa - xb)
    return basis


def lagrange_derivative(nodes):
    """Derivative matrix D[q, a] = l_a'(nodes[q]) of the Lagrange basis."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.)
    bary = 1. / diff.prod(axis=1)
    D = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(D, 0.)
    D[np.arange(n), np.arange(n)] = -D.sum(axis=1)
    return D


def tensor_basis(nodes, t):
    """Tensor-product Lagrange basis at points t of shape (..., d).

    The local node index runs over the first axis slowest, matching
    `reference_nodes`.
    """
    t = np.asarray(t, dtype=float)
    basis = lagrange_basis(nodes, t[..., 0])
    for i in range(1, t.shape[-1]):
        other = lagrange_basis(nodes, t[..., i])
        size = basis.shape[-1] * other.shape[-1]
        basis = (basis[..., :, None] * other[..., None, :]).reshape(
            t.shape[:-1] + (size,))
    return basis


def reference_nodes(nodes, dimension):
    """Tensor-product nodes on [0, 1]^d, shape ((p+1)^d, d)."""
    grids = np.meshgrid(*[nodes]*dimension, indexing='ij')
    return np.stack([g.ravel() for g in grids], axis=-1)


def reference_weights(weights, dimension):
    """Tensor-product quadrature weights matching `reference_nodes`."""
    w = np.asarray(weights)
    for _ in range(dimension - 1):
        w = np.outer(w, weights).ravel()
    return w


def composite_gauss(function, a, b, panels=64, order=10):
    """Integrate a vectorised function over [a, b] with a composite
    Gauss-Legendre rule."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    lengths = np.diff(edges)
    points = edges[:-1, None] + lengths[:, None] * x[None, :]
    values = function(points)
    return (values * w[None, :] * lengths[:, None]).sum()


def execution_time(start):
    """Log and return the run time since the `start` datetime."""
    delta = dt.datetime.now() - start
    log.info('Execution took %s hh:mm:ss' % delta)
    return delta.total_seconds()


def run_parallel(function, jobs, processes=1):
    """Map `function` over `jobs`, optionally with multiprocessing.

    Arguments
    ---------
    function : callable
        A module-level (picklable) function taking one job argument.
    jobs : list
        Job arguments, results are returned in the same order.
    processes : int
        Number of worker processes, 1 runs in the current process.
    """
    jobs = list(jobs)
    if processes <= 1 or len(jobs) <= 1:
        return [function(j) for j in jobs]
    ncpu = min(len(jobs), processes, multiprocessing.cpu_count())
    warnings.warn('Using multiprocessing on %s CPUs.' % ncpu)
    pool = multiprocessing.Pool(ncpu)
    try:
        results = pool.map(function, jobs)
    finally:
        pool.close()
        pool.join()
    return results
