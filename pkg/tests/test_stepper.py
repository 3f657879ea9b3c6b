#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Tests for the `helmpy.stepper` module.
"""
import unittest
import cProfile, pstats

import numpy as np
from scipy import linalg

from helmpy import stepper
from helmpy.femspace import SpatialOperator, build_space
from helmpy.hierarchy import build_hierarchy
from helmpy.problem import ProblemSpec, incoming_wavelet


OMEGA = 10 * np.pi


def homogeneous_1d():
    return ProblemSpec(dimension=1, omega=OMEGA, direction=(1.,),
                       half_widths=(1.,), pml_width=.1,
                       material='homogeneous')


def state(u, u_old, space, t0=10., dt=1e-3):
    """A state long after the source has passed."""
    return stepper.WaveState(u, u_old, space.zeros_s(), 0, t0, dt)


class TestDamping(unittest.TestCase):

    def test_zeta(self):
        R, L, W = 1e-10, 1., .1
        self.assertEqual(stepper.zeta(.5, L, W, R), 0)
        self.assertEqual(stepper.zeta(-1., L, W, R), 0)
        top = abs(np.log(R)) * 3 / (2 * W)
        self.assertAlmostEqual(stepper.zeta(1.1, L, W, R), top)
        self.assertAlmostEqual(stepper.zeta(-1.05, L, W, R), top / 4)

    def test_coefficients(self):
        pml = stepper.PMLProfile((1., 1.), .1)
        x = np.array([[0., 0.], [1.05, 0.], [1.05, -1.05]])
        z1, z2, z3 = pml.node_coefficients(x, .01)
        np.testing.assert_allclose(z1[0], -1)
        np.testing.assert_allclose(z2[:2], 2)
        np.testing.assert_allclose(z3[0], 1)
        self.assertLess(z2[2], 2)
        np.testing.assert_allclose(z3 - z1, 2)
        Z1, Z2, Z3 = pml.element_coefficients(x, .01)
        rates = pml.rates(x)
        np.testing.assert_allclose(Z2[:, 0], -.01 * (rates[:, 0] - rates[:, 1]))
        np.testing.assert_allclose(Z2[:, 1], -.01 * (rates[:, 1] - rates[:, 0]))
        np.testing.assert_allclose(Z1 + Z3, 2)


class TestCFL(unittest.TestCase):

    def test_reference_eigenvalues(self):
        self.assertAlmostEqual(stepper.reference_eigenvalue(2, 1), 24, places=8)
        self.assertAlmostEqual(stepper.reference_eigenvalue(2, 2), 48, places=8)

    def test_steps_per_update_1d(self):
        spec = ProblemSpec.from_case('1d_bump', OMEGA)
        hier = build_hierarchy([1/5., 1/50.], spec.half_widths, spec.pml_width)
        dt, m = stepper.cfl_timestep(.1, spec, hier)
        self.assertEqual(m, 28)
        self.assertAlmostEqual(dt * m, .1)

    def test_steps_per_update_2d(self):
        spec = ProblemSpec.from_case('2d_bump', OMEGA)
        hier = build_hierarchy([1/5., 1/50.], spec.half_widths, spec.pml_width)
        self.assertEqual(stepper.cfl_timestep(.1, spec, hier)[1], 39)

    def test_wave_speed(self):
        spec = ProblemSpec.from_case('1d_bump', OMEGA)
        hier = build_hierarchy([1/5., 1/50.], spec.half_widths, spec.pml_width)
        alpha_max, beta_min, c_max = stepper.wave_speed_bounds(spec, hier)
        self.assertAlmostEqual(alpha_max, 4)
        self.assertEqual(beta_min, 1)
        self.assertAlmostEqual(c_max, 2)


class TestTimeStepper(unittest.TestCase):

    def setUp(self):
        self.spec = homogeneous_1d()
        self.hier = build_hierarchy([.1], 1., .1, d=1)
        self.space = build_space(self.hier.finest_mesh())

    def test_zero_stays_zero(self):
        step = stepper.TimeStepper(self.space, self.spec, 1e-3)
        zero = np.zeros(len(self.space))
        new = step.step(state(zero, zero.copy(), self.space))
        self.assertEqual(np.abs(new.u).max(), 0)
        self.assertEqual(new.n, 1)
        self.assertAlmostEqual(new.t, 10. + 1e-3)

    def test_do_time_step(self):
        step = stepper.TimeStepper(self.space, self.spec, 1e-3)
        u = np.random.default_rng(3).standard_normal(len(self.space))
        u[self.space.boundary] = 0
        st = state(u, .5 * u, self.space)
        a, b = stepper.do_time_step(st, step), step.step(st)
        np.testing.assert_array_equal(a.u, b.u)
        np.testing.assert_array_equal(a.u_old, u)
        self.assertEqual(a.n, 1)

    def test_undamped_update(self):
        dt = 1e-3
        step = stepper.TimeStepper(self.space, self.spec, dt)
        rng = np.random.default_rng(0)
        u, u_old = rng.standard_normal((2, len(self.space)))
        u[self.space.boundary] = u_old[self.space.boundary] = 0
        new = step.step(state(u, u_old, self.space, dt=dt))
        expected = -u_old + 2 * u - dt**2 * step.operator.apply(u)
        expected[self.space.boundary] = 0
        np.testing.assert_allclose(new.u, expected, atol=1e-12)

    def test_energy_conservation(self):
        hier = build_hierarchy([1/5., 1/50.], 1., .1, d=1)
        space = build_space(hier.finest_mesh())
        dt = stepper.cfl_timestep(.1, self.spec, hier)[0]
        step = stepper.TimeStepper(space, self.spec, dt)
        op = step.operator
        x = space.points[:, 0]
        u0 = np.exp(-(x / .1)**2) * (1 - (x / 1.1)**2)
        st = state(u0, u0.copy(), space, dt=dt)

        def energy(st):
            velocity = (st.u - st.u_old) / dt
            return ((op.beta * space.sigma * velocity) @ velocity +
                    st.u @ (op.stiffness @ st.u_old))

        st = step.step(st)
        e0 = energy(st)
        for _ in range(2000):
            st = step.step(st)
        self.assertAlmostEqual(energy(st) / e0, 1, places=8)
        self.assertLess(np.abs(st.u).max(), 10 * np.abs(u0).max())

    def test_second_order(self):
        space, spec = self.space, self.spec
        op = SpatialOperator(space, spec)
        free = ~space.fixed
        K = op.stiffness.toarray()[np.ix_(free, free)]
        M = np.diag((op.beta * space.sigma)[free])
        lam, vec = linalg.eigh(K, M)
        w, v = np.sqrt(lam[0]), np.zeros(len(space))
        v[free] = vec[:, 0] / np.abs(vec[:, 0]).max()
        T, errors = 1., []
        for n in (100, 200):
            dt = T / n
            step = stepper.TimeStepper(space, spec, dt)
            st = state(v.copy(), np.cos(w * dt) * v, space, dt=dt)
            for _ in range(n):
                st = step.step(st)
            errors.append(np.abs(st.u - np.cos(w * T) * v).max())
        self.assertAlmostEqual(errors[0] / errors[1], 4, delta=.8)

    def test_causality(self):
        step = stepper.TimeStepper(self.space, self.spec, 1e-3)
        x = self.space.points[:, 0]
        u = np.where(np.abs(x) < 1e-9, 1., 0.)
        st = state(u, u.copy(), self.space)
        for _ in range(5):
            st = step.step(st)
        self.assertTrue((st.u[np.abs(x) > .5 + 1e-9] == 0).all())
        self.assertGreater(np.abs(st.u[np.abs(x) > .4 + 1e-9]).max(), 0)

    def test_absorbing_layer(self):
        hier = build_hierarchy([1/100.], 1., .1, d=1)
        space = build_space(hier.finest_mesh())
        dt, _ = stepper.cfl_timestep(.1, self.spec, hier)
        pml = stepper.PMLProfile((1.,), .1, 1e-10)
        step = stepper.TimeStepper(space, self.spec, dt, pml)
        x = space.points[:, 0]
        u0 = np.exp(-(x / .2)**2)
        st = state(u0, u0.copy(), space, dt=dt)
        for _ in range(int(np.ceil(5. / dt))):
            st = step.step(st)
        inner = np.abs(x) <= 1
        self.assertLess(np.abs(st.u[inner]).max(), 1e-3)


class TestSoundSoft(unittest.TestCase):

    def test_no_scatterer(self):
        spec = ProblemSpec.from_case('1d_bump', OMEGA)
        hier = build_hierarchy([.1], spec.half_widths, spec.pml_width)
        nodes, values = stepper.sound_soft_mask(build_space(
            hier.finest_mesh()), spec, 0.)
        self.assertEqual(len(nodes), 0)

    def test_trap_values(self):
        spec = ProblemSpec.from_case('2d_trap', OMEGA)
        hier = build_hierarchy([.1], spec.half_widths, spec.pml_width,
                               scatterer=spec.scatterer)
        space = build_space(hier.finest_mesh())
        nodes, values = stepper.sound_soft_mask(space, spec, 0.)
        self.assertGreater(len(nodes), 0)
        self.assertEqual(np.abs(values).max(), 0)
        t = .55
        nodes, values = stepper.sound_soft_mask(space, spec, t)
        np.testing.assert_allclose(
            values, -incoming_wavelet(space.points[nodes], t, spec))
        self.assertGreater(np.abs(values).max(), 0)

    def test_obstacle_enforced(self):
        spec = ProblemSpec.from_case('2d_trap', OMEGA)
        hier = build_hierarchy([.1], spec.half_widths, spec.pml_width,
                               scatterer=spec.scatterer)
        space = build_space(hier.finest_mesh())
        dt = 1e-3
        step = stepper.TimeStepper(space, spec, dt)
        st = stepper.initial_state(space, .5, dt)
        st = step.step(st)
        nodes, values = stepper.sound_soft_mask(space, spec, .5 + dt)
        np.testing.assert_array_equal(st.u[nodes], values)


if __name__ == '__main__':
    cProfile.run('unittest.main()', 'pstats')
    # print profile stats ordered by time
    pstats.Stats('pstats').strip_dirs().sort_stats('time').print_stats(5)
