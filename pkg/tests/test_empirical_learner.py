#!/usr/bin/env python
import unittest

import numpy as np

from cgprice.core import demand
from cgprice.core import empirical_learner as el
from cgprice.core import market
from cgprice.core.market import ValuationBatch

from .utils import rng


def unit_grid(retain=False):
    return el.EmpiricalDistribution.on_support(0.0, 1.0, 1e-3, retain=retain)


class EmpiricalDistributionTest(unittest.TestCase):

    def test_grid(self):
        dist = unit_grid()
        self.assertEqual(len(dist.grid), 1001)
        self.assertEqual(dist.grid[0], 0.0)
        self.assertEqual(dist.grid[-1], 1.0)
        self.assertAlmostEqual(dist.resolution, 1e-3)
        self.assertEqual(dist.period, 0)

    def test_invalid_grid(self):
        self.assertRaises(demand.InputError, el.EmpiricalDistribution, [0.0])
        self.assertRaises(demand.InputError, el.EmpiricalDistribution, [0.0, 0.5, 0.5])
        self.assertRaises(demand.InputError, el.EmpiricalDistribution.on_support, 0.0, 1.0, 0.0)


class UpdateEmpiricalTest(unittest.TestCase):

    def test_single_report(self):
        dist = el.update_empirical(unit_grid(), ValuationBatch([0.3]))
        self.assertEqual(dist.period, 1)
        self.assertTrue(np.all(dist.mass[dist.grid < 0.3 - 1e-9] == 0.0))
        self.assertTrue(np.all(dist.mass[dist.grid > 0.3 + 1e-9] == 1.0))

    def test_two_reports(self):
        dist = el.update_empirical(unit_grid(), ValuationBatch([0.3]))
        el.update_empirical(dist, ValuationBatch([0.7]))
        g, m = dist.grid, dist.mass
        self.assertTrue(np.all(m[g < 0.3 - 1e-9] == 0.0))
        self.assertTrue(np.all(m[(g > 0.3 + 1e-9) & (g < 0.7 - 1e-9)] == 0.5))
        self.assertTrue(np.all(m[g > 0.7 + 1e-9] == 1.0))

    def test_empty_batch(self):
        self.assertRaises(demand.InputError, el.update_empirical, unit_grid(), ValuationBatch([]))

    def test_recursive_equals_batch(self):
        curve = demand.TruncatedGaussian(10.0, 12.0)
        for k in (1, 2, 7):
            dist = el.EmpiricalDistribution.on_support(curve.support_lo, curve.support_hi,
                                                       0.05, retain=True)
            r = rng(40, k)
            for t in range(100):
                el.update_empirical(dist, market.realize_valuations(curve, k, r))
                self.assertTrue(np.all(np.diff(dist.mass) >= 0))
                self.assertTrue(np.all((dist.mass >= 0) & (dist.mass <= 1 + 1e-12)))
                self.assertLessEqual(np.max(np.abs(dist.mass - dist.batch_mass())), 1e-12)

    def test_block_fold_equals_period_updates(self):
        curve = demand.TruncatedGaussian(10.0, 12.0)
        values = curve.ppf(rng(46).random((300, 4)))
        blocked = el.EmpiricalDistribution.on_support(curve.support_lo, curve.support_hi, 0.05,
                                                      retain=True)
        el.fold_periods(blocked, values[:7])
        el.fold_periods(blocked, values[7:])
        stepped = el.EmpiricalDistribution.on_support(curve.support_lo, curve.support_hi, 0.05)
        for row in values:
            el.update_empirical(stepped, ValuationBatch(row))
        self.assertEqual(blocked.period, 300)
        self.assertTrue(np.all(np.diff(blocked.mass) >= 0))
        self.assertLessEqual(np.max(np.abs(blocked.mass - stepped.mass)), 1e-12)
        self.assertLessEqual(np.max(np.abs(blocked.mass - blocked.batch_mass())), 1e-12)

    def test_bad_block(self):
        self.assertRaises(demand.InputError, el.fold_periods, unit_grid(), np.zeros((0, 3)))
        self.assertRaises(demand.InputError, el.fold_periods, unit_grid(), np.zeros(3))

    def test_batch_oracle_needs_retained_reports(self):
        self.assertRaises(RuntimeError, unit_grid().batch_mass)

    def test_consistency(self):
        for i, curve in enumerate([demand.Uniform(0.0, 1.0), demand.TruncatedGaussian(10.0, 11.0)]):
            dist = el.EmpiricalDistribution.on_support(curve.support_lo, curve.support_hi,
                                                       1e-3 * curve.width)
            r = rng(41, i)
            for t in range(10000):
                el.update_empirical(dist, market.realize_valuations(curve, 10, r))
            self.assertLessEqual(dist.sup_distance(curve), 0.02)


class CrPriceTest(unittest.TestCase):

    def test_needs_a_report(self):
        self.assertRaises(demand.InputError, el.cr_price, unit_grid())

    def test_exact_uniform(self):
        dist = unit_grid()
        dist.mass = dist.grid.copy()
        dist.period = 1
        price, quantity = el.cr_price(dist)
        self.assertLessEqual(abs(price - 0.5), 1e-3)
        self.assertAlmostEqual(quantity, 1 - price)

    def test_single_step(self):
        dist = el.update_empirical(unit_grid(), ValuationBatch([0.3]))
        price, quantity = el.cr_price(dist)
        self.assertTrue(0.3 - 2e-3 < price < 0.3)
        self.assertEqual(quantity, 1.0)

    def test_ties_go_to_lowest_price(self):
        dist = el.EmpiricalDistribution([1.0, 2.0, 4.0])
        dist.mass = np.array([0.0, 0.5, 0.75])
        dist.period = 1
        # revenues 1.0, 1.0, 1.0
        self.assertEqual(el.cr_price(dist), (1.0, 1.0))

    def test_many_uniform_reports(self):
        dist = unit_grid()
        r = rng(42)
        curve = demand.Uniform(0.0, 1.0)
        for t in range(40000):
            el.update_empirical(dist, market.realize_valuations(curve, 10, r))
        self.assertLess(abs(el.cr_price(dist)[0] - 0.5), 0.02)


class CrEpisodeTest(unittest.TestCase):

    def test_uniform_episode(self):
        result = el.run_cr_episode(demand.Uniform(0.0, 1.0), 2, 50000, 1e-3, rng(43))
        self.assertLess(abs(result.price - 0.5), 0.03)
        self.assertEqual(result.knots, 1001)
        self.assertEqual(result.comp, 1003)
        self.assertEqual(result.periods, 50000)
        self.assertLess(result.sup_distance, 0.02)

    def test_trace(self):
        result = el.run_cr_episode(demand.Uniform(0.0, 1.0), 4, 100, 1e-2, rng(44), trace=True,
                                   trace_every=10)
        self.assertEqual([row[0] for row in result.trace], list(range(10, 101, 10)))
        uneven = el.run_cr_episode(demand.Uniform(0.0, 1.0), 4, 25, 1e-2, rng(44), trace=True,
                                   trace_every=10)
        self.assertEqual([row[0] for row in uneven.trace], [10, 20, 25])
        self.assertEqual(len(result.trace[0]), len(el.TRACE_FIELDS))

    def test_seeded_determinism(self):
        curve = demand.TruncatedGaussian(10.0, 15.0)
        a = el.run_cr_episode(curve, 3, 500, 0.1, rng(45))
        b = el.run_cr_episode(curve, 3, 500, 0.1, rng(45))
        self.assertEqual((a.price, a.quantity, a.sup_distance), (b.price, b.quantity, b.sup_distance))

    def test_invalid(self):
        u = demand.Uniform(0.0, 1.0)
        self.assertRaises(demand.InputError, el.run_cr_episode, u, 0, 10, 0.01, rng())
        self.assertRaises(demand.InputError, el.run_cr_episode, u, 2, 0, 0.01, rng())


if __name__ == '__main__':
    unittest.main()
