import os

import numpy as np

from cgprice import utils


def acceptance_enabled():
    return os.environ.get('CGPRICE_ACCEPTANCE') == '1'


def rng(seed=12345, *key):
    return utils.make_rng(seed, 99, *key)


def trapezoid(func, lo, hi, points=200001):
    """Composite trapezoid rule of func over [lo, hi]."""
    x = np.linspace(lo, hi, points)
    y = np.asarray(func(x), dtype=float)
    return float(np.sum((y[1:] + y[:-1]) * np.diff(x)) / 2.0)


def quadrature_cdf(curve, p, points=200001):
    """F(p) by integrating the density, independent of curve.cdf."""
    if p <= curve.support_lo:
        return 0.0
    return trapezoid(curve.pdf, curve.support_lo, min(p, curve.support_hi), points)


def ks_statistic(samples, curve):
    """sup |F_n - F| of a sample against the curve."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    f = np.asarray(curve.cdf(x))
    above = np.arange(1, n + 1) / float(n) - f
    below = f - np.arange(0, n) / float(n)
    return float(max(above.max(), below.max()))


def grid_argmax(curve, points=2000001):
    grid = np.linspace(curve.support_lo, curve.support_hi, points)
    profits = grid * np.asarray(curve.sf(grid))
    return float(grid[np.argmax(profits)])
