#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Tests for the `helmpy.hierarchy` module.
"""
import unittest
import cProfile, pstats

import numpy as np

from helmpy.hierarchy import AdaptedMesh, build_hierarchy
from helmpy.utils import ConfigError, MeshError


def three_level_hierarchy():
    return build_hierarchy([2/5., 1/5., 1/10.], 1., 1/5., d=2)


class TestBuildHierarchy(unittest.TestCase):

    def test_level_counts(self):
        hier = three_level_hierarchy()
        self.assertEqual(hier.shape_cells, (24, 24))
        self.assertEqual([len(hier.level_ids(k)) for k in (1, 2, 3)],
                         [81, 196, 576])

    def test_children_1d(self):
        hier = build_hierarchy([1/5., 1/50.], 1., .1, d=1)
        coarse = hier.level_ids(1)
        self.assertEqual(len(coarse), 20)
        counts = hier.children(coarse)[1]
        self.assertEqual(sorted(set(counts.tolist())), [1, 10])
        self.assertEqual((counts == 10).sum(), 10)
        self.assertEqual((counts == 1).sum(), 10)
        self.assertTrue(hier.pml[coarse[counts == 1]].all())

    def test_element(self):
        hier = three_level_hierarchy()
        gid = hier.level_ids(2)[45]
        el = hier.element(gid)
        self.assertEqual(el.level, 2)
        self.assertEqual(el.index, (3, 3))
        self.assertEqual(el.lo, (4, 4))
        self.assertEqual(el.hi, (6, 6))
        parent = hier.element(hier.parent[gid])
        self.assertEqual((parent.lo, parent.hi), ((2, 2), (6, 6)))

    def test_invalid_widths(self):
        with self.assertRaises(ConfigError):
            build_hierarchy([.1, .2], 1., .2, d=1)
        with self.assertRaises(ConfigError):
            build_hierarchy([.2, .15], 1., .15, d=1)
        with self.assertRaises(ConfigError):
            build_hierarchy([.3, .1], 1., .1, d=1)

    def test_pml_rounding(self):
        with self.assertWarns(UserWarning):
            hier = build_hierarchy([.2, .1], 1., .15, d=1)
        self.assertAlmostEqual(hier.pml_width, .2)

    def test_scatterer_alignment(self):
        hier = build_hierarchy([.4, .2, .1], 1., .2, d=2,
                               scatterer=[((-.2, .2), (-.2, .2))])
        self.assertEqual(hier.void.sum(), 1 + 4 + 16)
        with self.assertRaises(ConfigError):
            build_hierarchy([.4, .2, .1], 1., .2, d=2,
                            scatterer=[((.1, .3), (.1, .3))])


class TestAdaptedMesh(unittest.TestCase):

    def test_extreme_meshes(self):
        hier = three_level_hierarchy()
        for mesh in (hier.finest_mesh(), hier.coarsest_mesh()):
            self.assertTrue(mesh.validate())
        self.assertEqual(hier.finest_mesh().histogram().tolist(), [0, 0, 576])

    def test_get_subelements(self):
        hier = three_level_hierarchy()
        gid = hier.level_ids(1)[40]
        kids = hier.get_subelements(gid)
        self.assertEqual(len(kids), 4)
        self.assertTrue(hier.contains(np.full(4, gid), kids).all())
        with self.assertRaises(MeshError):
            hier.get_subelements(hier.level_ids(3)[0])

    def test_get_child_elements(self):
        hier = three_level_hierarchy()
        gid = hier.level_ids(1)[40]
        mesh = hier.get_child_elements([gid])
        self.assertEqual(mesh.histogram().tolist(), [80, 4, 0])
        self.assertTrue(mesh.validate())
        self.assertEqual(len(mesh.hanging_edges), 8)
        sub = hier.get_subelements(gid)[0]
        with self.assertRaises(MeshError):
            hier.get_child_elements([sub])
        with self.assertRaises(MeshError):
            hier.get_child_elements(hier.level_ids(3)[:1])

    def test_parents_round_trip(self):
        hier = three_level_hierarchy()
        rng = np.random.default_rng(4)
        for _ in range(20):
            mesh = hier.random_mesh(rng)
            parents = hier.get_parent_elements(mesh)
            self.assertEqual(hier.get_child_elements(parents), mesh)

    def test_invalid_mesh(self):
        hier = three_level_hierarchy()
        gid = hier.level_ids(1)[40]
        overlap = np.append(hier.level_ids(1), hier.get_subelements(gid))
        with self.assertRaises(MeshError):
            AdaptedMesh(hier, overlap).validate()
        with self.assertRaises(MeshError):
            AdaptedMesh(hier, hier.level_ids(1)[1:]).validate()


class TestNearby(unittest.TestCase):

    def test_radius_zero_touching(self):
        hier = build_hierarchy([.2, .1], 1., .1, d=1)
        gid = hier.level_ids(1)[5]
        found = hier.mark_nearby_elements([gid], 0.)
        self.assertEqual(found.tolist(), [gid - 1, gid, gid + 1])

    def test_radius(self):
        hier = three_level_hierarchy()
        gid = hier.level_ids(1)[40]
        self.assertEqual(len(hier.mark_nearby_elements([gid], .39)), 9)
        self.assertEqual(len(hier.mark_nearby_elements([gid], .4)), 9)
        found = hier.mark_nearby_elements([gid], .41)
        self.assertEqual(len(found), 21)
        d = hier.element_distance(np.full(len(found), gid), found)
        self.assertTrue((d < .41).all())
        more = hier.mark_nearby_elements([gid], .57)
        self.assertEqual(len(more), 25)

    def test_monotone_in_radius(self):
        hier = three_level_hierarchy()
        rng = np.random.default_rng(7)
        marked = rng.choice(hier.level_ids(2), 12, replace=False)
        marked = np.append(marked, hier.level_ids(1)[[10, 40]])
        previous = set(marked.tolist())
        for radius in (0., .1, .2, .25, .4, .8):
            found = set(hier.mark_nearby_elements(marked, radius).tolist())
            self.assertTrue(previous <= found)
            previous = found
        levels = hier.level[sorted(previous)]
        self.assertTrue((levels < 3).all())

    def test_level_map(self):
        hier = three_level_hierarchy()
        gid = hier.level_ids(1)[40]
        raster = hier.level_map([gid])
        self.assertEqual(raster.shape, (24, 24))
        self.assertEqual(raster.sum(), 16)
        self.assertTrue((raster[hier.cell_slices(gid)] == 1).all())


if __name__ == '__main__':
    cProfile.run('unittest.main()', 'pstats')
    # print profile stats ordered by time
    pstats.Stats('pstats').strip_dirs().sort_stats('time').print_stats(5)
