#!/usr/bin/env python
import unittest

import numpy as np

from cgprice.core import stats
from cgprice.core.demand import InputError

from .utils import rng


class SummarizeTest(unittest.TestCase):

    def test_symmetric_pair(self):
        s = stats.summarize([0.1, -0.1])
        self.assertAlmostEqual(s.mean, 0.0)
        self.assertAlmostEqual(s.variance, 0.01)
        self.assertEqual(s.n_points, 2)
        self.assertEqual([n for _, n in s.histogram], [1, 1])

    def test_all_zero(self):
        s = stats.summarize([0.0] * 50)
        self.assertEqual(s.mean, 0.0)
        self.assertEqual(s.variance, 0.0)
        self.assertEqual(s.histogram, [(0.0, 50)])

    def test_counts_cover_every_point(self):
        errors = rng(20).normal(0.0, 0.08, size=5000)
        s = stats.summarize(errors, bin_width=0.01)
        self.assertEqual(sum(n for _, n in s.histogram), 5000)
        centers = [c for c, _ in s.histogram]
        self.assertEqual(centers, sorted(centers))
        self.assertAlmostEqual(s.variance, np.var(errors))

    def test_bin_centers(self):
        s = stats.summarize([0.004, 0.006, 0.014, -0.026], bin_width=0.01)
        self.assertEqual([n for _, n in s.histogram], [1, 1, 2])
        self.assertTrue(np.allclose([c for c, _ in s.histogram], [-0.03, 0.0, 0.01]))

    def test_bad_input(self):
        self.assertRaises(InputError, stats.summarize, [])
        self.assertRaises(InputError, stats.summarize, [0.1, float('nan')])
        self.assertRaises(InputError, stats.summarize, [0.1], 0.0)


class ErrorStatsTest(unittest.TestCase):

    def test_dict_form(self):
        s = stats.summarize([0.02, -0.01, 0.03])
        copy = stats.ErrorStats.from_dict(s.to_dict())
        self.assertEqual(copy, s)
        self.assertNotEqual(stats.summarize([0.02]), s)
        self.assertIn('n=3', str(s))


if __name__ == '__main__':
    unittest.main()
