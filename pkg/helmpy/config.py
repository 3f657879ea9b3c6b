"""
Run configuration: defaults, namelist files and command line overrides.

A configuration file is a Fortran namelist with one group per solver
module, e.g.::

    &problem
        case = '1d_bump'
        omega = '10pi'
    /
    &hierarchy
        levels = 0.2, 0.02
    /
    &stepper
        degree = 2
        cfl = 0.9
    /

Values not given fall back to :mod:`helmpy.defaultsettings`; frequency
dependent ones (eta0, eps0, t_up, levels) are derived from omega.
"""
import logging
import os.path as osp
from dataclasses import dataclass, field, fields, replace

import numpy as np
import f90nml
import parse

from helmpy import defaultsettings
from helmpy.utils import ConfigError


log = logging.getLogger(__name__)

#: Namelist group of every configuration key
GROUPS = {
    'problem': ['case', 'omega', 'reflection'],
    'hierarchy': ['levels'],
    'stepper': ['degree', 'cfl', 't_up'],
    'adapt': ['eta0', 'eps0'],
    'driver': ['t_max', 'reference', 'uniform_baseline', 'decomposition',
               'sweep', 'out_dir', 'threads', 'level_maps'],
}


def parse_omega(value):
    """Angular frequency from a number or the `Npi` shorthand.

    >>> parse_omega('10pi') == 10 * np.pi
    True
    """
    if isinstance(value, (int, float, np.number)):
        omega = float(value)
    else:
        text = str(value).strip().replace(' ', '')
        if text == 'pi':
            omega = np.pi
        else:
            res = parse.parse('{:g}pi', text) or parse.parse('{:g}*pi', text)
            if res is not None:
                omega = res[0] * np.pi
            else:
                try:
                    omega = float(text)
                except ValueError:
                    raise ConfigError('Cannot read omega from %r.' % value)
    if not omega > 0:
        raise ConfigError('omega must be positive, got %r.' % value)
    return omega


def parse_width(value):
    """A mesh width from a number or a fraction string like '1/50'."""
    if isinstance(value, (int, float, np.number)):
        return float(value)
    res = parse.parse('{:g}/{:g}', str(value).strip())
    try:
        return res[0] / res[1] if res else float(value)
    except (ValueError, ZeroDivisionError):
        raise ConfigError('Cannot read a mesh width from %r.' % value)


def default_levels(case, omega):
    """Frequency scaled mesh widths of a case, with n = omega/pi.

    n <= 10 gives (1/5, 1/(5n)), larger n three levels (1/5, 1/q, 1/(10q))
    with q = n/2. Cases with another coarse width use (h_1, 1/(5n)).
    """
    n = max(1, int(round(omega / np.pi)))
    coarse = defaultsettings.cases[case].get('coarse_width', 1/5.)
    if coarse != 1/5.:
        return (coarse, 1. / (5 * n))
    if n <= 10:
        return (1/5., 1. / (5 * n))
    q = int(round(n / 2.))
    return (1/5., 1. / q, 1. / (10 * q))


@dataclass
class RunConfig:
    """The fully resolved configuration of a run.

    Frequency dependent values are absolute (already multiplied by omega).
    """
    case: str = defaultsettings.case
    omega: float = None
    levels: tuple = None
    degree: int = defaultsettings.degree
    t_up: float = None
    eta0: float = None
    eps0: float = None
    cfl: float = defaultsettings.cfl
    reflection: float = defaultsettings.reflection
    t_max: float = defaultsettings.t_max
    reference: bool = defaultsettings.reference
    uniform_baseline: bool = defaultsettings.uniform_baseline
    decomposition: bool = False
    sweep: tuple = ()
    out_dir: str = defaultsettings.out_dir
    threads: int = defaultsettings.threads
    level_maps: bool = False
    source: str = field(default='', repr=False)
    explicit: frozenset = field(default=frozenset(), repr=False)

    def __post_init__(self):
        if self.case not in defaultsettings.cases:
            raise ConfigError('Unknown case %r, valid are %s.' % (
                self.case, ', '.join(sorted(defaultsettings.cases))))
        case = defaultsettings.cases[self.case]
        self.omega = parse_omega(defaultsettings.omega if self.omega is None
                                 else self.omega)
        if self.levels is None:
            self.levels = default_levels(self.case, self.omega)
        self.levels = tuple(parse_width(h) for h in np.atleast_1d(self.levels))
        if self.t_up is None:
            self.t_up = defaultsettings.t_up_factor * np.pi / self.omega
        if self.eta0 is None:
            self.eta0 = defaultsettings.eta0_factor * self.omega
        if self.eps0 is None:
            self.eps0 = case.get('eps0_factor',
                                 defaultsettings.eps0_factor) * self.omega
        self.sweep = tuple(parse_omega(o) for o in np.atleast_1d(self.sweep)
                           if o != '')
        self.degree, self.threads = int(self.degree), int(self.threads)
        if self.degree < 1:
            raise ConfigError('degree must be >= 1, got %r.' % self.degree)
        if not 0 < self.cfl <= 1:
            raise ConfigError('cfl must be in (0, 1], got %r.' % self.cfl)
        return

    def problem_spec(self):
        from helmpy.problem import ProblemSpec
        return ProblemSpec.from_case(self.case, self.omega)

    def solver_settings(self):
        from helmpy.driver import SolverSettings
        return SolverSettings(self.levels, self.degree, self.t_up, self.eta0,
                              self.eps0, self.cfl, self.reflection, self.t_max)

    def for_omega(self, omega):
        """The same configuration at another frequency.

        Frequency dependent values are rederived unless they were given.
        """
        explicit = {k: getattr(self, k) for k in ('levels', 't_up', 'eta0',
                                                   'eps0')
                    if k in self.explicit}
        new = replace(self, omega=omega, levels=explicit.get('levels'),
                      t_up=explicit.get('t_up'), eta0=explicit.get('eta0'),
                      eps0=explicit.get('eps0'), sweep=())
        return new

    def namelist(self):
        """The configuration as a :class:`f90nml.Namelist`."""
        nml = f90nml.Namelist()
        for group, keys in GROUPS.items():
            values = {}
            for k in keys:
                v = getattr(self, k)
                if isinstance(v, tuple):
                    v = list(v)
                values[k] = v
            values = {k: v for k, v in values.items() if v != []}
            nml[group] = values
        return nml


def read_config(path):
    """Read the settings of a namelist configuration file as a flat dict."""
    if not osp.exists(path):
        raise ConfigError('Configuration file %s does not exist.' % path)
    nml = f90nml.read(path)
    settings = {}
    known = {k: g for g, keys in GROUPS.items() for k in keys}
    for group, values in nml.items():
        if group not in GROUPS:
            raise ConfigError('Unknown namelist group &%s in %s.'
                              % (group, path))
        for k, v in values.items():
            if known.get(k) != group:
                raise ConfigError('Unknown setting %s in &%s.' % (k, group))
            settings[k] = v
    return settings


def resolve_config(path=None, **overrides):
    """Defaults <- namelist file <- overrides (None values are ignored)."""
    settings = read_config(path) if path else {}
    settings.update({k: v for k, v in overrides.items() if v is not None})
    names = {f.name for f in fields(RunConfig)}
    unknown = set(settings) - names
    if unknown:
        raise ConfigError('Unknown settings: %s' % ', '.join(sorted(unknown)))
    config = RunConfig(source=path or '', explicit=frozenset(settings),
                       **settings)
    log.debug('Resolved configuration %r' % config)
    return config


def write_config(config, path):
    """Write the resolved configuration as a namelist file."""
    config.namelist().write(path, force=True)
    return path
