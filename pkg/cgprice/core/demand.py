"""
Valuation distributions (demand curves) and the ground-truth pricing oracle.

A DemandCurve is the distribution F of a buyer's reservation value. The
expected normalized demand at price p is 1 - F(p). Learners never read a
curve directly; the market module samples from it and the harness uses
the oracle below to score forecasts.
"""
import logging
import math

import numpy as np
from scipy import optimize
from scipy import special

logger = logging.getLogger('cgprice.demand')

SATURATION = 1e-12  # 1 - F(p) below this and the hazard rate is undefined
SQRT_2PI = math.sqrt(2 * math.pi)


class InputError(ValueError):
    pass


class HazardSaturationError(ArithmeticError):
    pass


class OracleFailure(RuntimeError):
    pass


def _check_finite(name, value):
    if not np.all(np.isfinite(value)):
        raise InputError('%s must be finite; received: %r' % (name, value))


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


class DemandCurve(object):
    """Base class of the admissible valuation distributions.

    Subclasses implement _cdf, _sf, _pdf and _ppf for prices inside the
    support; the public methods take care of clamping. Curves are frozen
    once constructed so they can be shipped to worker processes and shared.
    """

    kind = None
    _frozen = False

    def __new__(cls, *args, **kwargs):
        if cls is DemandCurve:
            raise TypeError('Cannot create DemandCurve, only subclass allowed.')
        return super(DemandCurve, cls).__new__(cls)

    def __init__(self, support_lo, support_hi):
        _check_finite('support', (support_lo, support_hi))
        if not support_lo < support_hi:
            raise InputError('support_lo must be below support_hi; received [%r, %r]' % (
                             support_lo, support_hi))
        self.support_lo = float(support_lo)
        self.support_hi = float(support_hi)
        self._frozen = True

    def __setattr__(self, name, value):
        if self._frozen:
            raise AttributeError('%s is immutable; cannot set %s' % (self.__class__.__name__, name))
        object.__setattr__(self, name, value)

    def __getstate__(self):
        return dict(self.__dict__)

    def __setstate__(self, state):
        self.__dict__.update(state)

    @property
    def width(self):
        return self.support_hi - self.support_lo

    def cdf(self, p):
        p = np.asarray(p, dtype=float)
        inside = self._cdf(np.clip(p, self.support_lo, self.support_hi))
        out = np.where(p <= self.support_lo, 0.0, np.where(p >= self.support_hi, 1.0, inside))
        return _scalar(out)

    def sf(self, p):
        p = np.asarray(p, dtype=float)
        inside = self._sf(np.clip(p, self.support_lo, self.support_hi))
        out = np.where(p <= self.support_lo, 1.0, np.where(p >= self.support_hi, 0.0, inside))
        return _scalar(out)

    def pdf(self, p):
        p = np.asarray(p, dtype=float)
        inside = self._pdf(np.clip(p, self.support_lo, self.support_hi))
        out = np.where((p < self.support_lo) | (p > self.support_hi), 0.0, inside)
        return _scalar(out)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar(self._ppf(np.clip(u, 0.0, 1.0)))

    def _sf(self, p):
        return 1.0 - self._cdf(p)

    def label(self):
        return '%s(%s)' % (self.__class__.__name__,
                           ', '.join('%s=%s' % (k, v) for k, v in sorted(self.params().items())))

    def params(self):
        return {'support_lo': self.support_lo, 'support_hi': self.support_hi}

    def to_dict(self):
        d = {'kind': self.kind}
        d.update(self.params())
        return d

    def __str__(self):
        return '<%s>' % self.label()
    __repr__ = __str__


class Uniform(DemandCurve):
    kind = 'uniform'

    def __init__(self, lo, hi):
        super(Uniform, self).__init__(lo, hi)

    def params(self):
        return {'lo': self.support_lo, 'hi': self.support_hi}

    def _cdf(self, p):
        return (p - self.support_lo) / self.width

    def _sf(self, p):
        return (self.support_hi - p) / self.width

    def _pdf(self, p):
        return np.full(np.shape(p), 1.0 / self.width)

    def _ppf(self, u):
        return self.support_lo + u * self.width


class TruncatedGaussian(DemandCurve):
    """Gaussian N(mu, sigma^2) truncated below at its mean (a half-normal
    on [mu, inf)), with the upper tail capped at mu + cap_sigmas * sigma and
    renormalized so that cdf(support_hi) == 1 exactly."""
    kind = 'truncated_gaussian'

    def __init__(self, mu, sigma, cap_sigmas=8.0):
        _check_finite('mu/sigma', (mu, sigma, cap_sigmas))
        if sigma <= 0 or cap_sigmas <= 0:
            raise InputError('sigma and cap_sigmas must be positive; received %r, %r' % (
                             sigma, cap_sigmas))
        object.__setattr__(self, 'mu', float(mu))
        object.__setattr__(self, 'sigma', float(sigma))
        object.__setattr__(self, 'cap_sigmas', float(cap_sigmas))
        object.__setattr__(self, '_mass', float(special.ndtr(cap_sigmas)) - 0.5)
        object.__setattr__(self, '_tail', float(special.ndtr(-cap_sigmas)))
        super(TruncatedGaussian, self).__init__(mu, mu + cap_sigmas * sigma)

    def params(self):
        return {'mu': self.mu, 'sigma': self.sigma, 'cap_sigmas': self.cap_sigmas}

    def _z(self, p):
        return (p - self.mu) / self.sigma

    def _cdf(self, p):
        return (special.ndtr(self._z(p)) - 0.5) / self._mass

    def _sf(self, p):
        # tail form keeps relative accuracy where 1 - F is tiny
        return np.maximum(special.ndtr(-self._z(p)) - self._tail, 0.0) / self._mass

    def _pdf(self, p):
        z = self._z(p)
        return np.exp(-0.5 * z * z) / (SQRT_2PI * self.sigma * self._mass)

    def _ppf(self, u):
        return self.mu + self.sigma * special.ndtri(0.5 + u * self._mass)


class Tabulated(DemandCurve):
    """Piecewise-linear cdf through (price, cdf) knots. The density is the
    slope of the segment to the right of p (left segment at the last knot)."""
    kind = 'tabulated'

    def __init__(self, prices, cdfs, source=None):
        prices = np.array(prices, dtype=float)
        cdfs = np.array(cdfs, dtype=float)
        if prices.ndim != 1 or prices.shape != cdfs.shape or len(prices) < 2:
            raise InputError('tabulated curve needs two equal-length columns with >= 2 knots')
        _check_finite('tabulated knots', np.concatenate([prices, cdfs]))
        if np.any(np.diff(prices) <= 0) or np.any(np.diff(cdfs) <= 0):
            raise InputError('tabulated knots must be strictly increasing in both columns')
        if abs(cdfs[0]) > 1e-9 or cdfs[-1] < 1 - 1e-6 or cdfs[-1] > 1 + 1e-9:
            raise InputError('tabulated cdf must start at 0 and end at 1; received %r .. %r' % (
                             cdfs[0], cdfs[-1]))
        prices.setflags(write=False)
        cdfs.setflags(write=False)
        object.__setattr__(self, 'prices', prices)
        object.__setattr__(self, 'cdfs', cdfs)
        object.__setattr__(self, 'slopes', np.diff(cdfs) / np.diff(prices))
        object.__setattr__(self, 'source', source)
        super(Tabulated, self).__init__(prices[0], prices[-1])

    @classmethod
    def from_file(cls, path):
        """Read a two-column whitespace separated (price, cdf) text file."""
        try:
            table = np.loadtxt(path, ndmin=2)
        except (OSError, ValueError) as e:
            raise InputError('cannot read tabulated curve %s: %s' % (path, e))
        if table.shape[1] != 2:
            raise InputError('%s must have exactly two columns; found %d' % (path, table.shape[1]))
        return cls(table[:, 0], table[:, 1], source=path)

    def params(self):
        return {'knots': len(self.prices), 'source': self.source}

    def _cdf(self, p):
        return np.interp(p, self.prices, self.cdfs)

    def _pdf(self, p):
        idx = np.clip(np.searchsorted(self.prices, p, side='right') - 1, 0, len(self.slopes) - 1)
        return self.slopes[idx]

    def _ppf(self, u):
        return np.interp(u, self.cdfs, self.prices)


class IhrReport(object):

    def __init__(self, is_ihr, lipschitz_estimate, grid_step, points_checked):
        self.is_ihr = bool(is_ihr)
        self.lipschitz_estimate = float(lipschitz_estimate)
        self.grid_step = float(grid_step)
        self.points_checked = int(points_checked)

    def to_dict(self):
        return dict(is_ihr=self.is_ihr, lipschitz_estimate=self.lipschitz_estimate,
                    grid_step=self.grid_step, points_checked=self.points_checked)

    def __str__(self):
        return '<IhrReport %s>' % self.to_dict()
    __repr__ = __str__


class OptimalPoint(object):

    def __init__(self, b_star, q_star, profit_star, foc_residual=0.0):
        self.b_star = float(b_star)
        self.q_star = float(q_star)
        self.profit_star = float(profit_star)
        self.foc_residual = float(foc_residual)

    def to_dict(self):
        return dict(b_star=self.b_star, q_star=self.q_star,
                    profit_star=self.profit_star, foc_residual=self.foc_residual)

    def __str__(self):
        return '<OptimalPoint b*=%.8f q*=%.8f profit*=%.8f>' % (
                self.b_star, self.q_star, self.profit_star)
    __repr__ = __str__


def cdf(curve, p):
    _check_finite('price', p)
    return curve.cdf(p)


def pdf(curve, p):
    _check_finite('price', p)
    return curve.pdf(p)


def hazard_rate(curve, p):
    """f(p) / (1 - F(p))."""
    _check_finite('price', p)
    survival = curve.sf(p)
    if np.any(survival <= SATURATION):
        raise HazardSaturationError(
            'hazard rate undefined at p=%r: 1 - F(p) = %r' % (p, survival))
    return _scalar(np.asarray(curve.pdf(p)) / survival)


def support_grid(curve, grid_step):
    n = int(math.floor(curve.width / grid_step + 1e-9))
    return curve.support_lo + grid_step * np.arange(n + 1)


def validate_ihr(curve, grid_step):
    """Scan the support on a grid of step `grid_step`: the hazard rate must be
    nondecreasing wherever it is defined, and the largest adjacent density
    slope is reported as the Lipschitz estimate (eta)."""
    if not (np.isfinite(grid_step) and grid_step > 0):
        raise InputError('grid_step must be positive; received %r' % (grid_step,))
    if grid_step > curve.width / 10:
        logger.warning('grid step %s is coarse for support width %s of %s' % (
                       grid_step, curve.width, curve))
    grid = support_grid(curve, grid_step)
    density = np.asarray(curve.pdf(grid))
    survival = np.asarray(curve.sf(grid))
    defined = survival > SATURATION
    hazard = density[defined] / survival[defined]
    is_ihr = bool(np.all(np.diff(hazard) >= 0))
    if len(grid) > 1:
        lipschitz = float(np.max(np.abs(np.diff(density)) / np.diff(grid)))
    else:
        lipschitz = 0.0
    report = IhrReport(is_ihr, lipschitz, grid_step, int(defined.sum()))
    logger.debug('validated %s: %s' % (curve, report))
    return report


def _foc_gap(curve):
    # (1 - F(b)) - b f(b): same sign as the FOC (1 - F)/f - b wherever f > 0
    def gap(b):
        return curve.sf(b) - b * curve.pdf(b)
    return gap


def optimal_price(curve, tol=1e-8, grid_points=200001):
    """Return the profit-maximizing posted price b*(F) as the root of the
    first order condition (1 - F(b))/f(b) = b, cross-checked against the
    argmax of p (1 - F(p)) on a dense grid."""
    if not tol > 0:
        raise InputError('tol must be positive; received %r' % (tol,))
    gap = _foc_gap(curve)
    lo, hi = curve.support_lo, curve.support_hi
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0:
        b_star = lo
    elif g_hi == 0:
        b_star = hi
    elif g_lo * g_hi > 0:
        raise OracleFailure('first order condition has no sign change on [%r, %r] for %s' % (
                            lo, hi, curve))
    else:
        b_star = optimize.bisect(gap, lo, hi, xtol=tol / 10, maxiter=400)

    q_star = curve.sf(b_star)
    f_star = curve.pdf(b_star)
    residual = abs(q_star / f_star - b_star) if f_star > 0 else float('inf')
    if not 0 < q_star < 1 or residual > tol:
        raise OracleFailure('root %r of %s is not an interior optimum (q*=%r, residual=%r)' % (
                            b_star, curve, q_star, residual))
    profit_star = b_star * q_star

    grid = np.linspace(lo, hi, grid_points)
    profits = grid * np.asarray(curve.sf(grid))
    f_max = float(np.max(curve.pdf(grid)))
    slack = f_max * tol * curve.width + 1e-12
    if profits.max() > profit_star + slack:
        raise OracleFailure('grid argmax %r beats the FOC root %r for %s (profit %r > %r)' % (
                            grid[np.argmax(profits)], b_star, curve, profits.max(), profit_star))
    return OptimalPoint(b_star, q_star, profit_star, residual)


def sample_valuation(curve, rng):
    """Draw one valuation by the inverse-cdf method."""
    return curve.ppf(rng.random())


def sample_valuations(curve, rng, size):
    return curve.ppf(rng.random(size))
