# -*- coding: utf-8 -*-

"""Top-level package for helmpy, an adaptive time domain Helmholtz solver."""

__author__ = """helmpy developers"""
__version__ = '0.1.0'

from helmpy.problem import ProblemSpec
from helmpy.hierarchy import build_hierarchy
from helmpy.driver import SolverSettings, solve_helmholtz
