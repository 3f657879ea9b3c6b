#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Tests for the `helmpy.cli` and `helmpy.config` modules.
"""
import os.path as osp
import shutil
import tempfile
import unittest
import cProfile, pstats

import numpy as np

from helmpy import cli, config
from helmpy.utils import ConfigError


class TestParsing(unittest.TestCase):

    def test_omega(self):
        for text in ('10pi', '10*pi', ' 10 pi'):
            self.assertAlmostEqual(config.parse_omega(text), 10 * np.pi)
        self.assertEqual(config.parse_omega('pi'), np.pi)
        self.assertEqual(config.parse_omega('31.4'), 31.4)
        self.assertEqual(config.parse_omega(2), 2.)
        for bad in ('-1', 'abc', 0):
            with self.assertRaises(ConfigError):
                config.parse_omega(bad)

    def test_width(self):
        self.assertEqual(config.parse_width('1/50'), 1 / 50.)
        self.assertEqual(config.parse_width('0.2'), .2)
        with self.assertRaises(ConfigError):
            config.parse_width('a/b')

    def test_default_levels(self):
        pi = np.pi
        self.assertEqual(config.default_levels('1d_bump', 10 * pi),
                         (1/5., 1/50.))
        self.assertEqual(config.default_levels('1d_bump', 20 * pi),
                         (1/5., 1/10., 1/100.))
        self.assertEqual(config.default_levels('2d_bump', 40 * pi),
                         (1/5., 1/20., 1/200.))
        self.assertEqual(config.default_levels('2d_trap', 10 * pi),
                         (1/10., 1/50.))


class TestRunConfig(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_defaults(self):
        conf = config.RunConfig()
        self.assertEqual(conf.case, '1d_bump')
        self.assertAlmostEqual(conf.omega, 10 * np.pi)
        self.assertAlmostEqual(conf.eta0, .1 * np.pi)
        self.assertAlmostEqual(conf.t_up, .1)
        self.assertEqual(config.RunConfig(case='2d_trap').eps0,
                         .05 * conf.omega)

    def test_invalid(self):
        with self.assertRaises(ConfigError):
            config.RunConfig(case='3d_bump')
        with self.assertRaises(ConfigError):
            config.RunConfig(cfl=1.5)
        with self.assertRaises(ConfigError):
            config.resolve_config(unknown=1)
        with self.assertRaises(ConfigError):
            config.resolve_config(seed=1)
        with self.assertRaises(ConfigError):
            config.resolve_config(osp.join(self.tmp, 'missing.nml'))

    def test_unknown_namelist_setting(self):
        path = osp.join(self.tmp, 'bad.nml')
        with open(path, 'w') as f:
            f.write('&stepper\n    eta0 = 1.0\n/\n')
        with self.assertRaises(ConfigError):
            config.read_config(path)

    def test_roundtrip(self):
        conf = config.resolve_config(omega='20pi', levels=['1/5', '1/100'])
        path = config.write_config(conf, osp.join(self.tmp, 'run.nml'))
        back = config.resolve_config(path)
        for k in ('case', 'omega', 'levels', 'degree', 't_up', 'eta0', 'eps0',
                  'cfl', 't_max', 'reference', 'out_dir'):
            self.assertEqual(getattr(back, k), getattr(conf, k), k)

    def test_overrides(self):
        path = osp.join(self.tmp, 'run.nml')
        with open(path, 'w') as f:
            f.write("&problem\n    omega = '20pi'\n/\n&stepper\n    degree = 3\n/\n")
        conf = config.resolve_config(path, degree=4, eta0=None)
        self.assertEqual(conf.degree, 4)
        self.assertAlmostEqual(conf.omega, 20 * np.pi)
        self.assertAlmostEqual(conf.eta0, .2 * np.pi)

    def test_for_omega(self):
        conf = config.resolve_config(eps0=1.)
        other = conf.for_omega(20 * np.pi)
        self.assertEqual(other.eps0, 1.)
        self.assertAlmostEqual(other.eta0, .2 * np.pi)
        self.assertEqual(other.levels, (1/5., 1/10., 1/100.))


class TestMain(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def run_main(self, *args):
        return cli.main(['run', '--out-dir', self.tmp, '-q'] + list(args))

    def test_no_command(self):
        self.assertEqual(cli.main([]), cli.EXIT_CONFIG)

    def test_invalid_configurations(self):
        self.assertEqual(self.run_main('--case', 'cube'), cli.EXIT_CONFIG)
        self.assertEqual(self.run_main('--omega=-1'), cli.EXIT_CONFIG)
        self.assertEqual(self.run_main('--levels', '1/5,1/7'),
                         cli.EXIT_CONFIG)

    def test_abort(self):
        path = osp.join(self.tmp, 'abort.nml')
        with open(path, 'w') as f:
            f.write('&adapt\n    eps0 = 0.0\n/\n&driver\n    t_max = 0.5\n/\n')
        self.assertEqual(self.run_main(path, '--no-reference'),
                         cli.EXIT_ABORT)

    def test_run_1d(self):
        self.assertEqual(self.run_main('--no-reference'), 0)
        for name in ('reports.csv', 'run_config.nml',
                     '1d_bump_omega31.4159_nodes.csv',
                     '1d_bump_omega31.4159_raster.txt'):
            self.assertTrue(osp.exists(osp.join(self.tmp, name)), name)

    def test_check(self):
        self.assertEqual(cli.main(['check', '--seed', '2', '--test',
                                   'transforms', '-q']), 0)


if __name__ == '__main__':
    cProfile.run('unittest.main()', 'pstats')
    # print profile stats ordered by time
    pstats.Stats('pstats').strip_dirs().sort_stats('time').print_stats(5)
