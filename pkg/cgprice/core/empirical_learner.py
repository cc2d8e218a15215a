"""
Non-parametric baseline: buyers report valuations, the seller keeps a
recursive empirical cdf on a fixed price grid and posts the grid price
that maximizes p * (1 - F_hat(p)).
"""
import logging
import math

import numpy as np

from . import market
from .demand import InputError

logger = logging.getLogger('cgprice.empirical')

BLOCK_PERIODS = 4096


class EmpiricalDistribution(object):
    """Recursive estimate F_hat_t on a grid of price knots.

    After t rounds mass[i] is the fraction of all reports <= grid[i]. With
    retain=True every report is also kept so the recursive estimate can be
    checked against a batch recomputation.
    """

    def __init__(self, grid, retain=False):
        grid = np.array(grid, dtype=float)
        if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
            raise InputError('grid must be a strictly increasing sequence of >= 2 knots')
        self.grid = grid
        self.mass = np.zeros(len(grid))
        self.period = 0
        self.reports = [] if retain else None

    @classmethod
    def on_support(cls, support_lo, support_hi, resolution, retain=False):
        if not resolution > 0:
            raise InputError('grid resolution must be positive; received %r' % (resolution,))
        knots = int(math.ceil((support_hi - support_lo) / resolution - 1e-9))
        return cls(np.linspace(support_lo, support_hi, knots + 1), retain=retain)

    @property
    def resolution(self):
        return float(self.grid[1] - self.grid[0])

    def batch_mass(self):
        """Recompute F_hat from every retained report (test oracle)."""
        if self.reports is None:
            raise RuntimeError('reports are not retained for this distribution')
        if not self.reports:
            return np.zeros(len(self.grid))
        return market.ValuationBatch(np.concatenate(self.reports)).fraction_at_or_below(self.grid)

    def sup_distance(self, curve):
        """max over knots of |F_hat - F|."""
        return float(np.max(np.abs(self.mass - np.asarray(curve.cdf(self.grid)))))

    def __str__(self):
        return '<EmpiricalDistribution knots=%d period=%d>' % (len(self.grid), self.period)
    __repr__ = __str__


def _counts_at_or_below(grid, values):
    # report v counts at every knot from searchsorted(grid, v) on
    idx = np.searchsorted(grid, np.ravel(values), side='left')
    return np.cumsum(np.bincount(idx, minlength=len(grid) + 1))[:len(grid)]


def fold_periods(dist, values):
    """Fold a block of periods, one row of reports per period, into F_hat:
    mass <- (t0 mass + sum of the per-period fractions) / t1, the 1/t
    recursion taken a block at a time. Both weights are non-negative, so
    mass stays nondecreasing along the grid.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.size == 0:
        raise InputError('expected a non-empty (periods, reports) block; received shape %r' % (
                         values.shape,))
    periods, k = values.shape
    t0 = float(dist.period)
    t1 = t0 + periods
    fractions = _counts_at_or_below(dist.grid, values) / float(k)
    dist.mass = dist.mass * (t0 / t1) + fractions / t1
    dist.period += periods
    if dist.reports is not None:
        dist.reports.extend(np.array(row) for row in values)
    return dist


def update_empirical(dist, batch):
    """Fold one period of reports into F_hat:
    mass <- mass + (1/t) (batch fraction <= v - mass)."""
    if len(batch) == 0:
        raise InputError('valuation batch is empty')
    return fold_periods(dist, np.reshape(batch.values, (1, -1)))


def cr_price(dist):
    """Grid price maximizing p (1 - F_hat(p)); ties go to the lowest price.
    Returns (price, expected quantity 1 - F_hat(price))."""
    if dist.period < 1:
        raise InputError('no reports folded in yet')
    survival = 1.0 - dist.mass
    idx = int(np.argmax(dist.grid * survival))
    return float(dist.grid[idx]), float(survival[idx])


class CrEpisodeResult(object):

    def __init__(self, price, quantity, sup_distance, periods, reports_per_period, knots,
                 trace=None):
        self.price = price
        self.quantity = quantity
        self.sup_distance = sup_distance
        self.periods = periods
        self.reports_per_period = reports_per_period
        self.knots = knots
        self.trace = trace

    @property
    def comp(self):
        """Remembered grid values plus per-period data inputs."""
        return self.knots + self.reports_per_period

    def __str__(self):
        return '<CrEpisodeResult K=%d T=%d price=%r sup=%r>' % (
                self.reports_per_period, self.periods, self.price, self.sup_distance)
    __repr__ = __str__


TRACE_FIELDS = ('period', 'price', 'sup_distance')


def run_cr_episode(curve, reports_per_period, horizon, grid_resolution, rng, trace=False,
                   trace_every=1):
    """T rounds of K truthful reports each, then price at the empirical argmax."""
    if int(reports_per_period) != reports_per_period or reports_per_period < 1:
        raise InputError('reports_per_period must be >= 1; received %r' % (reports_per_period,))
    if int(horizon) != horizon or horizon < 1:
        raise InputError('horizon must be >= 1; received %r' % (horizon,))
    if trace and not trace_every >= 1:
        raise InputError('trace_every must be >= 1; received %r' % (trace_every,))
    dist = EmpiricalDistribution.on_support(curve.support_lo, curve.support_hi, grid_resolution)
    rows = [] if trace else None
    # block boundaries fall on trace points
    block = int(trace_every) if trace else BLOCK_PERIODS
    t = 0
    while t < horizon:
        n = min(block, int(horizon) - t)
        fold_periods(dist, market.realize_valuation_block(curve, n, reports_per_period, rng))
        t += n
        if rows is not None:
            rows.append((t, cr_price(dist)[0], dist.sup_distance(curve)))
    price, quantity = cr_price(dist)
    return CrEpisodeResult(price, quantity, dist.sup_distance(curve), int(horizon),
                           int(reports_per_period), len(dist.grid), trace=rows)
