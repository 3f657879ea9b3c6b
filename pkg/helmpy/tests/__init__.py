# -*- coding: utf-8 -*-

"""Randomised property checks of the mesh, space and transform machinery.

The checks are mixin classes defined in the ``test_*.py`` modules of this
package. They expect a ``rng`` (numpy Generator) attribute and are run with
a seeded generator through::

    helmpy check --seed 3

or from python with :func:`run_checks`.
"""
import glob
import importlib
import inspect
import os.path as osp
import unittest

import numpy as np


def check_classes():
    """All mixin classes of the ``test_*.py`` modules by lower case name."""
    classes = {}
    for path in sorted(glob.glob(osp.join(osp.dirname(__file__), 'test_*.py'))):
        name = osp.splitext(osp.basename(path))[0]
        module = importlib.import_module('helmpy.tests.' + name)
        for cname, obj in vars(module).items():
            if (inspect.isclass(obj) and not cname.startswith('_') and
                    obj.__module__ == module.__name__):
                classes[cname.lower()] = obj
    return classes


def make_test_case(mixin, seed=0):
    """A TestCase class of a mixin with a seeded generator."""
    SEED = seed

    class TestCase(mixin, unittest.TestCase):
        seed = SEED

        def setUp(self):
            self.rng = np.random.default_rng(self.seed)

    TestCase.__name__ = mixin.__name__
    return TestCase


def run_checks(seed=0, test='all', verbosity=1):
    """Run the property checks.

    Arguments
    ---------
    seed : int
        Seed of the random meshes and fields.
    test : str
        Name of a check class (case insensitive) or 'all'.

    Returns
    -------
    unittest.TestResult
    """
    classes = check_classes()
    if test != 'all':
        assert test.lower() in classes, 'Not a valid check: %s, valid are %s' % (
            test, ', '.join(sorted(classes)))
        classes = {test.lower(): classes[test.lower()]}
    loader = unittest.TestLoader()
    suite = unittest.TestSuite(
        [loader.loadTestsFromTestCase(make_test_case(c, seed))
         for c in classes.values()])
    return unittest.TextTestRunner(verbosity=verbosity).run(suite)
