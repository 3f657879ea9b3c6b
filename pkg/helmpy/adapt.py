"""
Front tracking mesh updates and the stopping rule.

A parent element stays refined while it has refined children, touches the
support of the source at the current time, or while the field on its
children is not reproduced by the coarse polynomial to within eta0. The
marked set is dilated by c_max T_up so the front cannot leave the fine
region before the next update.
"""
import logging

import numpy as np

from helmpy.femspace import project_element


log = logging.getLogger(__name__)


def in_support(hierarchy, gids, t, spec):
    """Whether element boxes meet the closed support of the source at t.

    For the plane wavelet this is the slab |t - r.x/c0| <= xi0/omega, for the
    point source the support of F while |t| <= xi0/omega.
    """
    gids = np.atleast_1d(np.asarray(gids, dtype=np.int64))
    lo, hi = hierarchy.bounds(gids)
    support = spec.support_time
    if spec.source == 'point':
        if abs(t) > support:
            return np.zeros(len(gids), dtype=bool)
        center = np.asarray(spec.source_center)
        gap = np.maximum(0, np.maximum(lo - center, center - hi))
        return np.sqrt((gap**2).sum(axis=1)) <= spec.wavelength / 2
    r = np.asarray(spec.direction)
    first = np.minimum(r * lo, r * hi).sum(axis=1) / spec.c0
    last = np.maximum(r * lo, r * hi).sum(axis=1) / spec.c0
    return (t - last <= support) & (t - first >= -support)


def refinement_flags(space, u, t, spec, gids, eta0):
    """Refinement criterion for parents whose children are leaves of space."""
    gids = np.atleast_1d(np.asarray(gids, dtype=np.int64))
    flags = in_support(space.hierarchy, gids, t, spec)
    check = ~flags
    if check.any():
        _, eta = project_element(space, u, gids[check])
        flags[check] = eta > eta0
    return flags


def needs_refinement(gid, space, u, t, spec, eta0):
    """Whether the element `gid` has to stay refined."""
    return bool(refinement_flags(space, u, t, spec, [gid], eta0)[0])


def mark_elements(parents, space, u, t, spec, eta0):
    """Parents to keep refined: those with refined children and the flagged
    parents whose children are all leaves."""
    hier = space.hierarchy
    parents = np.asarray(parents, dtype=np.int64)
    if not parents.size:
        return parents
    kids, counts = hier.children(parents)
    owner = np.repeat(np.arange(len(parents)), counts)
    has_sub = np.bincount(owner, weights=np.isin(kids, parents),
                          minlength=len(parents)) > 0
    leaf_parents = parents[~has_sub & ~hier.void[parents]]
    flags = refinement_flags(space, u, t, spec, leaf_parents, eta0)
    log.debug('%i of %i leaf parents flagged.' % (flags.sum(), len(flags)))
    return np.union1d(parents[has_sub], leaf_parents[flags])


def update_mesh(space, u, t, spec, radius, eta0):
    """The next adapted mesh for the field u on `space` at time t.

    Arguments
    ---------
    space : NodeSet
        Space of the current mesh carrying u.
    radius : float
        Dilation radius of the marked set, c_max T_up.
    eta0 : float
        Projection error threshold.

    Returns
    -------
    AdaptedMesh
    """
    hier = space.hierarchy
    parents = hier.get_parent_elements(space.mesh)
    marked = mark_elements(parents, space, u, t, spec, eta0)
    marked = hier.mark_nearby_elements(marked, radius)
    marked = marked[~hier.void[marked]]
    marked = np.union1d(marked, hier.ancestors(marked))
    mesh = hier.get_child_elements(marked)
    log.debug('Marked %i of %i parents, %i leaves.'
              % (len(marked), len(parents), len(mesh)))
    return mesh


def should_stop(u, t, spec, eps0):
    """True once the source has passed and the field is below eps0."""
    return bool(t > spec.final_time() and np.abs(u).max(initial=0) <= eps0)
