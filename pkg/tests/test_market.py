#!/usr/bin/env python
import unittest

import numpy as np

from cgprice.core import demand
from cgprice.core import market

from .utils import rng


class RealizeDemandTest(unittest.TestCase):

    def test_quantity_is_a_fraction(self):
        curve = demand.TruncatedGaussian(10.0, 12.0)
        r = rng(10)
        for price in (5.0, 10.0, 14.0, 30.0, 200.0):
            out = market.realize_demand(curve, price, 100, r)
            self.assertTrue(0.0 <= out.quantity <= 1.0)
            self.assertEqual(out.sold, int(round(out.quantity * 100)))
            self.assertEqual(out.price, price)

    def test_corner_prices(self):
        u = demand.Uniform(0.0, 1.0)
        self.assertEqual(market.realize_demand(u, 0.0, 50, rng(11)).quantity, 1.0)
        self.assertEqual(market.realize_demand(u, -1.0, 50, rng(11)).quantity, 1.0)
        self.assertEqual(market.realize_demand(u, 1.5, 50, rng(11)).quantity, 0.0)

    def test_mean_matches_survival(self):
        u = demand.Uniform(0.0, 1.0)
        r = rng(12)
        qs = [market.realize_demand(u, 0.3, 100, r).quantity for _ in range(2000)]
        # standard error of the mean is sqrt(0.21 / 100 / 2000) ~ 0.001
        self.assertAlmostEqual(np.mean(qs), 0.7, delta=0.005)

    def test_same_stream_same_market(self):
        curve = demand.TruncatedGaussian(10.0, 11.0)
        batch = market.realize_valuations(curve, 100, rng(13))
        out = market.realize_demand(curve, 15.0, 100, rng(13))
        self.assertEqual(out.quantity, np.count_nonzero(batch.values >= 15.0) / 100.0)

    def test_bad_buyer_count(self):
        u = demand.Uniform(0.0, 1.0)
        self.assertRaises(demand.InputError, market.realize_demand, u, 0.5, 0, rng())
        self.assertRaises(demand.InputError, market.realize_valuations, u, 2.5, rng())


class ValuationBatchTest(unittest.TestCase):

    def test_fraction_at_or_below(self):
        batch = market.ValuationBatch([0.2, 0.5, 0.5, 0.9])
        self.assertEqual(len(batch), 4)
        fractions = batch.fraction_at_or_below(np.array([0.0, 0.2, 0.5, 0.6, 1.0]))
        self.assertEqual(list(fractions), [0.0, 0.25, 0.75, 0.75, 1.0])

    def test_batch_size(self):
        batch = market.realize_valuations(demand.Uniform(0.0, 1.0), 7, rng(14))
        self.assertEqual(len(batch), 7)
        self.assertTrue(np.all((batch.values >= 0) & (batch.values <= 1)))

    def test_block_matches_batches(self):
        curve = demand.Uniform(0.5, 1.5)
        block = market.realize_valuation_block(curve, 5, 3, rng(15))
        self.assertEqual(block.shape, (5, 3))
        r = rng(15)
        rows = [market.realize_valuations(curve, 3, r).values for _ in range(5)]
        self.assertTrue(np.array_equal(block, np.array(rows)))
        self.assertRaises(demand.InputError, market.realize_valuation_block, curve, 0, 3, rng())


if __name__ == '__main__':
    unittest.main()
