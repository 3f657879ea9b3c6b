"""
Running the adaptive solver, the uniform mesh solvers and the error metrics.

The adaptive run alternates mesh updates with m explicit steps each, and
accumulates the Fourier transform of the scattered field while marching::

    field, report = solve_helmholtz(spec, settings)

References are solved on uniform meshes: half the finest width with the
absorbing layer, or (in 1D) on the region of interest with a first order
absorbing boundary.
"""
import datetime as dt
import logging
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from helmpy.adapt import should_stop, update_mesh
from helmpy.femspace import Projection, build_space
from helmpy.fourier import FourierAccumulator, HarmonicField
from helmpy.hierarchy import build_hierarchy
from helmpy.problem import point_source_tail
from helmpy.stepper import (PMLProfile, TimeStepper, WaveState, cfl_timestep,
                            do_time_step, initial_state, sound_soft_mask,
                            wave_speed_bounds)
from helmpy.utils import (ConfigError, RunAbort, execution_time,
                          gauss_legendre, reference_nodes, reference_weights)


log = logging.getLogger(__name__)

RunEvent = namedtuple('RunEvent', ['kind', 'j', 'space', 'state'])


@dataclass
class SolverSettings:
    """Discretisation and adaptivity settings of a run.

    Attributes
    ----------
    levels : tuple
        Mesh widths h_1 > ... > h_K.
    t_up : float
        Mesh update interval, pi/omega if None.
    eta0, eps0 : float
        Projection error and stopping thresholds, omega/100 if None.
    t_max : float
        Abort if the run has not stopped this long after t0.
    """
    levels: tuple
    degree: int = 2
    t_up: float = None
    eta0: float = None
    eps0: float = None
    cfl: float = .9
    reflection: float = 1e-10
    t_max: float = 100.


@dataclass
class RunSetup:
    hierarchy: object
    pml: PMLProfile
    t_up: float
    dt: float
    m: int
    radius: float
    eta0: float
    eps0: float


@dataclass
class RunReport:
    """Result metrics of one run."""
    case: str
    omega: float
    method: str
    n_dof: float
    m: int
    dt: float
    t_stop: float
    j_stop: int = 0
    err2: float = np.nan
    node_counts: list = field(default_factory=list)
    histograms: list = field(default_factory=list)
    wall_time: float = 0.

    def row(self):
        """Table row of the scalar metrics."""
        return dict(case=self.case, omega=self.omega, method=self.method,
                    err2=self.err2, n_dof=self.n_dof, j_stop=self.j_stop,
                    m=self.m, dt=self.dt, t_stop=self.t_stop,
                    wall_time=self.wall_time)


@dataclass
class CaseResult:
    reports: list
    field: HarmonicField
    reference: HarmonicField = None
    decomposition: pd.DataFrame = None
    level_maps: list = field(default_factory=list)


def prepare(spec, settings):
    """Hierarchy, time step and thresholds of an adaptive run."""
    hier = build_hierarchy(settings.levels, spec.half_widths, spec.pml_width,
                           scatterer=spec.scatterer)
    t_up = settings.t_up or np.pi / spec.omega
    dt, m = cfl_timestep(t_up, spec, hier, settings.cfl, settings.degree)
    c_max = wave_speed_bounds(spec, hier, settings.degree)[2]
    pml = PMLProfile(spec.half_widths, hier.pml_width, settings.reflection)
    eta0 = spec.omega / 100 if settings.eta0 is None else settings.eta0
    eps0 = spec.omega / 100 if settings.eps0 is None else settings.eps0
    if spec.source == 'point' and eps0 > 0:
        tail = point_source_tail(spec)
        log.info('Point source tail %.3g/t, max|u| <= %.3g expected near '
                 't=%.1f.' % (tail, eps0, tail / eps0))
    return RunSetup(hier, pml, t_up, dt, m, c_max * t_up, eta0, eps0)


def _reset_obstacle(space, spec, state):
    nodes, values = sound_soft_mask(space, spec, state.t)
    state.u[nodes] = values
    nodes, values = sound_soft_mask(space, spec, state.t - state.dt)
    state.u_old[nodes] = values
    return state


def march(spec, settings, setup=None):
    """Generate the events of an adaptive run.

    Yields
    ------
    RunEvent
        ('update', j, space, state) after each mesh update, ('step', j,
        space, state) after each time step and a final ('stop', ...).

    Raises
    ------
    RunAbort
        If the run has not stopped within settings.t_max after t0.
    """
    setup = setup or prepare(spec, settings)
    hier, p = setup.hierarchy, settings.degree
    t0 = spec.start_time()
    space = build_space(hier.finest_mesh(), p)
    state = initial_state(space, t0, setup.dt)
    stepper = None
    j = 0
    while True:
        if should_stop(state.u, state.t, spec, setup.eps0):
            yield RunEvent('stop', j, space, state)
            return
        if state.t - t0 > settings.t_max:
            raise RunAbort('Run has not stopped after %s time units (t=%.4f).'
                           % (settings.t_max, state.t))
        j += 1
        mesh = update_mesh(space, state.u, state.t, spec, setup.radius,
                           setup.eta0)
        if mesh != space.mesh:
            new = build_space(mesh, p)
            projection = Projection(space, new)
            state = WaveState(projection.u(state.u), projection.u(state.u_old),
                              projection.s(state.s), state.n, t0, setup.dt)
            state = _reset_obstacle(new, spec, state)
            space, stepper = new, None
        if stepper is None:
            stepper = TimeStepper(space, spec, setup.dt, setup.pml)
        log.info('Mesh update %i at t=%.4f: %i nodes %r'
                 % (j, state.t, len(space), space.mesh.histogram().tolist()))
        yield RunEvent('update', j, space, state)
        for _ in range(setup.m):
            state = stepper.step(state)
            yield RunEvent('step', j, space, state)


def _report(spec, setup, method, counts, histograms, state, start):
    return RunReport(spec.case, spec.omega, method,
                     n_dof=float(np.mean(counts)) if counts else 0.,
                     m=setup.m, dt=setup.dt, t_stop=state.t,
                     j_stop=len(counts), node_counts=counts,
                     histograms=histograms, wall_time=execution_time(start))


def solve_helmholtz(spec, settings, record=None, on_update=None):
    """Solve the scattering problem with the adaptive time domain method.

    Arguments
    ---------
    spec : ProblemSpec
    settings : SolverSettings
    record : callable, optional
        Called as record(space, state) after every time step.
    on_update : callable, optional
        Called as on_update(j, space, state) after every mesh update.

    Returns
    -------
    (HarmonicField, RunReport) : the transform of the scattered field on
        the finest raster and the run metrics.
    """
    start = dt.datetime.now()
    setup = prepare(spec, settings)
    acc = FourierAccumulator(setup.hierarchy, spec.omega, settings.degree)
    counts, histograms = [], []
    for event in march(spec, settings, setup):
        if event.kind == 'step':
            acc.update_increments(event.space, event.state.u, event.state.t,
                                  setup.dt)
            if record is not None:
                record(event.space, event.state)
        elif event.kind == 'update':
            acc.update_ft(event.space)
            acc.initialise_new_increments(event.space)
            counts.append(len(event.space))
            histograms.append(event.space.mesh.histogram())
            if on_update is not None:
                on_update(event.j, event.space, event.state)
    values = acc.flush()
    report = _report(spec, setup, 'AFEM', counts, histograms, event.state,
                     start)
    log.info('Stopped at t=%.4f after %i updates, mean %.1f nodes.'
             % (report.t_stop, report.j_stop, report.n_dof))
    return HarmonicField.from_hierarchy(values, setup.hierarchy,
                                        settings.degree), report


def solve_wave_equation(spec, settings, record=None):
    """March the adaptive wave equation solver without the transform.

    Returns
    -------
    (space, state, RunReport) : the final space and state.
    """
    start = dt.datetime.now()
    setup = prepare(spec, settings)
    counts, histograms = [], []
    for event in march(spec, settings, setup):
        if event.kind == 'step' and record is not None:
            record(event.space, event.state)
        elif event.kind == 'update':
            counts.append(len(event.space))
            histograms.append(event.space.mesh.histogram())
    report = _report(spec, setup, 'AFEM', counts, histograms, event.state,
                     start)
    return event.space, event.state, report


def _uniform_run(space, spec, stepper, t_stop):
    t0 = spec.start_time()
    state = initial_state(space, t0, stepper.dt)
    n_steps = int(np.ceil((t_stop - t0) / stepper.dt - 1e-9))
    U = np.zeros(len(space), dtype=complex)
    for _ in range(n_steps):
        state = do_time_step(state, stepper)
        U += stepper.dt * np.exp(1j * spec.omega * state.t) * state.u
    return space.sample(U)


def solve_uniform_reference(spec, h, degree=2, dt=None, t_stop=None,
                            reflection=1e-10, t_up=None, cfl=.9):
    """Classical explicit solve on the uniform mesh of width h.

    Arguments
    ---------
    h : float
        Mesh width, commensurate with the domain.
    dt : float, optional
        Time step, by default from the CFL rule with T_up (default pi/omega).
    t_stop : float
        Final time of the run.

    Returns
    -------
    (HarmonicField, NodeSet)
    """
    assert t_stop is not None, 't_stop is required.'
    hier = build_hierarchy([h], spec.half_widths, spec.pml_width,
                           scatterer=spec.scatterer)
    if dt is None:
        dt = cfl_timestep(t_up or np.pi / spec.omega, spec, hier, cfl,
                          degree)[0]
    space = build_space(hier.coarsest_mesh(), degree)
    pml = PMLProfile(spec.half_widths, hier.pml_width, reflection)
    log.info('Uniform solve h=%g with %i nodes, dt=%.4g.' % (h, len(space), dt))
    values = _uniform_run(space, spec, TimeStepper(space, spec, dt, pml), t_stop)
    return HarmonicField.from_hierarchy(values, hier, degree), space


def solve_1d_abc_reference(spec, variant='U2', h=None, degree=2, t_stop=None,
                           t_up=None, cfl=.9, horizon=100.):
    """1D uniform solve on the region of interest with the first order
    absorbing boundary condition du/dt + c0 du/dn = 0.

    Arguments
    ---------
    variant : str
        'U2' runs until t_stop, 'U3' until t0 + horizon.

    Returns
    -------
    HarmonicField
    """
    if spec.dimension != 1:
        raise ConfigError('The absorbing boundary reference is 1D only.')
    if variant not in ('U2', 'U3'):
        raise ConfigError('Unknown reference variant %r.' % variant)
    t0 = spec.start_time()
    t_stop = t0 + horizon if variant == 'U3' else t_stop
    assert t_stop is not None, 't_stop is required.'
    hier = build_hierarchy([h], spec.half_widths, 0.)
    dt = cfl_timestep(t_up or np.pi / spec.omega, spec, hier, cfl, degree)[0]
    space = build_space(hier.coarsest_mesh(), degree, dirichlet=False)
    _, beta = spec.coefficients(space.points)
    edge = np.isclose(np.abs(space.points[:, 0]), spec.half_widths[0])
    damping = np.where(edge, spec.alpha0 / (spec.c0 * beta * space.sigma), 0.)
    stepper = TimeStepper(space, spec, dt, boundary_damping=damping)
    log.info('Absorbing boundary reference %s h=%g until t=%.3f.'
             % (variant, h, t_stop))
    values = _uniform_run(space, spec, stepper, t_stop)
    return HarmonicField.from_hierarchy(values, hier, degree)


def reference_solution(spec, settings, t_stop):
    """The uniform h_K/2 reference with its own CFL time step."""
    return solve_uniform_reference(
        spec, settings.levels[-1] / 2., settings.degree, t_stop=t_stop,
        reflection=settings.reflection, t_up=settings.t_up, cfl=settings.cfl)[0]


def error_l2(Ua, Ub, half_widths, chunk=100000):
    """L2 norm of Ua - Ub over the region of interest (-L, L)^d.

    Integrates cellwise with p+2 Gauss-Legendre points on the cells of the
    finer field, cells in the scatterer are skipped.
    """
    fine = Ua if Ua.unit <= Ub.unit else Ub
    h, d = fine.unit, fine.dimension
    x, w = gauss_legendre(fine.degree + 2)
    local = reference_nodes(x, d) * h
    weights = reference_weights(w, d) * h**d
    axes = [-l + h * np.arange(int(round(2 * l / h))) for l in half_widths]
    corners = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, d)
    centers = corners + h / 2
    corners = corners[~(Ua.is_void(centers) | Ub.is_void(centers))]
    total = 0.
    for i in range(0, len(corners), chunk):
        pts = (corners[i:i + chunk, None, :] + local).reshape(-1, d)
        diff = (Ua.evaluate(pts) - Ub.evaluate(pts)).reshape(-1, len(weights))
        total += (np.abs(diff)**2 @ weights).sum()
    return np.sqrt(total)


def dof_growth_rates(reports):
    """Growth of the average node count between successive frequencies.

    Returns
    -------
    pandas.DataFrame with columns omega, n_dof, ratio, rate (log2 ratio).
    """
    table = pd.DataFrame([(r.omega, r.n_dof) for r in reports],
                         columns=['omega', 'n_dof']).sort_values('omega')
    table = table.reset_index(drop=True)
    table['ratio'] = table.n_dof / table.n_dof.shift(1)
    table['rate'] = np.log2(table.ratio)
    return table


def error_decomposition(spec, settings, field, t_stop):
    """Split the 1D error into discretisation, layer and horizon parts.

    Returns
    -------
    pandas.DataFrame with one row and the norms Uh-U1 (adaptive vs h_K/2
    reference), U1-U2 (absorbing layer vs exact boundary) and U2-U3 (finite
    vs long horizon).
    """
    h = settings.levels[-1] / 2.
    U1 = reference_solution(spec, settings, t_stop)
    kw = dict(h=h, degree=settings.degree, t_stop=t_stop, t_up=settings.t_up,
              cfl=settings.cfl)
    U2 = solve_1d_abc_reference(spec, 'U2', **kw)
    U3 = solve_1d_abc_reference(spec, 'U3', **kw)
    L = spec.half_widths
    row = {'Uh-U1': error_l2(field, U1, L), 'U1-U2': error_l2(U1, U2, L),
           'U2-U3': error_l2(U2, U3, L)}
    return pd.DataFrame([row], index=pd.Index([spec.omega], name='omega'))


def run_case(config):
    """Run a configured case with its references.

    A module-level function so that frequency sweeps can map it over a
    process pool.

    Arguments
    ---------
    config : helmpy.config.RunConfig

    Returns
    -------
    CaseResult
    """
    spec = config.problem_spec()
    settings = config.solver_settings()
    maps = []

    def on_update(j, space, state):
        hier = space.hierarchy
        maps.append(hier.level_map(hier.get_parent_elements(space.mesh)))

    field, report = solve_helmholtz(
        spec, settings, on_update=on_update if config.level_maps else None)
    result = CaseResult([report], field, level_maps=maps)
    if config.reference:
        result.reference = reference_solution(spec, settings, report.t_stop)
        report.err2 = error_l2(field, result.reference, spec.half_widths)
    if config.uniform_baseline:
        start = dt.datetime.now()
        base, space = solve_uniform_reference(
            spec, settings.levels[-1], settings.degree, report.dt,
            report.t_stop, settings.reflection)
        baseline = RunReport(spec.case, spec.omega, 'FEM', n_dof=len(space),
                             m=report.m, dt=report.dt, t_stop=report.t_stop,
                             j_stop=report.j_stop, node_counts=[len(space)],
                             wall_time=execution_time(start))
        if result.reference is not None:
            baseline.err2 = error_l2(base, result.reference, spec.half_widths)
        result.reports.append(baseline)
    if config.decomposition:
        if spec.dimension != 1:
            raise ConfigError('The error decomposition is 1D only.')
        result.decomposition = error_decomposition(spec, settings, field,
                                                   report.t_stop)
    return result
