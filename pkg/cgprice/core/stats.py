"""
Forecast-error statistics of a sweep
"""
import logging

import numpy as np

from .demand import InputError

logger = logging.getLogger('cgprice.stats')


class ErrorStats(object):
    """Mean, population variance and a fixed-width histogram of forecast
    errors. histogram is a sorted list of (bin_center, count) with the bin
    of error e centred on round(e / bin_width) * bin_width."""

    def __init__(self, mean, variance, histogram, n_points, bin_width):
        self.mean = float(mean)
        self.variance = float(variance)
        self.histogram = [(float(c), int(n)) for c, n in histogram]
        self.n_points = int(n_points)
        self.bin_width = float(bin_width)

    def to_dict(self):
        return dict(mean=self.mean, variance=self.variance, n_points=self.n_points,
                    bin_width=self.bin_width, histogram=[list(b) for b in self.histogram])

    @classmethod
    def from_dict(cls, d):
        return cls(d['mean'], d['variance'], d['histogram'], d['n_points'], d['bin_width'])

    def __eq__(self, other):
        return isinstance(other, ErrorStats) and self.to_dict() == other.to_dict()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __str__(self):
        return '<ErrorStats n=%d mean=%.5f var=%.5f bins=%d>' % (
                self.n_points, self.mean, self.variance, len(self.histogram))
    __repr__ = __str__


def summarize(errors, bin_width=0.01):
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise InputError('cannot summarize an empty error sequence')
    if not np.all(np.isfinite(errors)):
        raise InputError('forecast errors must be finite')
    if not bin_width > 0:
        raise InputError('bin_width must be positive; received %r' % (bin_width,))
    index = np.rint(errors / bin_width).astype(np.int64)
    keys, counts = np.unique(index, return_counts=True)
    # centres are rebuilt from the integer index so equal bins print equally
    histogram = [(float(k) * bin_width, int(n)) for k, n in zip(keys, counts)]
    return ErrorStats(errors.mean(), errors.var(), histogram, errors.size, bin_width)
