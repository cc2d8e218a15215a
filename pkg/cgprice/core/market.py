"""
One period of the market: N buyers draw valuations from the demand curve
and each buys one unit when the posted price does not exceed their value.
"""
import logging

import numpy as np

from . import demand
from .demand import InputError

logger = logging.getLogger('cgprice.market')


class MarketOutcome(object):
    """The public (price, quantity) record of one period; quantity is the
    fraction of the n_buyers who bought."""

    __slots__ = ('price', 'quantity', 'n_buyers')

    def __init__(self, price, quantity, n_buyers=None):
        self.price = float(price)
        self.quantity = float(quantity)
        self.n_buyers = n_buyers

    @property
    def sold(self):
        """Number of units sold, when the market size is known."""
        if self.n_buyers is None:
            return None
        return int(round(self.quantity * self.n_buyers))

    def __str__(self):
        return '<MarketOutcome price=%r quantity=%r>' % (self.price, self.quantity)
    __repr__ = __str__


class ValuationBatch(object):
    """Truthful valuation reports (v_1, ..., v_K) of one period."""

    __slots__ = ('values',)

    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)

    def __len__(self):
        return len(self.values)

    def fraction_at_or_below(self, grid):
        """Fraction of the reports <= v for every v in grid."""
        ordered = np.sort(self.values)
        return np.searchsorted(ordered, grid, side='right') / float(len(ordered))

    def __str__(self):
        return '<ValuationBatch n=%d>' % len(self.values)
    __repr__ = __str__


def _check_buyers(n_buyers):
    if int(n_buyers) != n_buyers or n_buyers < 1:
        raise InputError('n_buyers must be a positive integer; received %r' % (n_buyers,))
    return int(n_buyers)


def realize_valuations(curve, n_buyers, rng):
    n_buyers = _check_buyers(n_buyers)
    return ValuationBatch(demand.sample_valuations(curve, rng, n_buyers))


def realize_valuation_block(curve, n_periods, n_buyers, rng):
    """n_periods report batches as one (n_periods, n_buyers) array, drawn
    exactly as n_periods calls of realize_valuations would draw them."""
    n_buyers = _check_buyers(n_buyers)
    if int(n_periods) != n_periods or n_periods < 1:
        raise InputError('n_periods must be a positive integer; received %r' % (n_periods,))
    values = demand.sample_valuations(curve, rng, int(n_periods) * n_buyers)
    return np.reshape(values, (int(n_periods), n_buyers))


def realize_demand(curve, price, n_buyers, rng):
    """Post `price` to n_buyers fresh buyers; a buyer at v == price buys.

    Draws exactly the valuations realize_valuations would draw from the
    same stream, so both see the same market.
    """
    n_buyers = _check_buyers(n_buyers)
    values = demand.sample_valuations(curve, rng, n_buyers)
    sold = int(np.count_nonzero(values >= price))
    return MarketOutcome(price, sold / float(n_buyers), n_buyers)
