"""
The misspecified linear-demand learner.

The seller pretends demand is q = beta0 + beta1 * p, posts the price that
is optimal for that line plus a small experiment, observes the realized
(price, quantity) pair and moves (beta0, beta1) by a recursive least
squares step of size a. Corner outcomes (nobody or everybody buys) shift
the intercept directly, and a projection facility keeps the beliefs inside
a fixed box.
"""
import logging
import math

import numpy as np

from . import market
from .demand import InputError
from .event import EventProjection

logger = logging.getLogger('cgprice.linear')

PRICE_FLOOR = 1e-9


class InvariantViolation(ValueError):
    pass


class SingularityError(ArithmeticError):
    pass


class LinearBeliefs(object):
    """Parameters (beta0, beta1) of the linear demand model; beta0 > 0 and
    beta1 < 0 whenever they come out of update()."""

    __slots__ = ('beta0', 'beta1')

    def __init__(self, beta0, beta1):
        self.beta0 = float(beta0)
        self.beta1 = float(beta1)

    @classmethod
    def from_forecast(cls, price, quantity):
        """Beliefs whose forecast is (price, quantity): beta0 = 2q, beta1 = -q/price."""
        return cls(2.0 * quantity, -quantity / price)

    @property
    def implied_price(self):
        return implied_price(self)

    def as_tuple(self):
        return (self.beta0, self.beta1)

    def __eq__(self, other):
        return isinstance(other, LinearBeliefs) and self.as_tuple() == other.as_tuple()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(self.as_tuple())

    def __str__(self):
        return '<LinearBeliefs beta0=%r beta1=%r>' % (self.beta0, self.beta1)
    __repr__ = __str__


class Forecast(object):
    """What the learner tells the seller: a price and the sales it expects."""

    __slots__ = ('price', 'quantity')

    def __init__(self, price, quantity):
        self.price = float(price)
        self.quantity = float(quantity)

    def as_tuple(self):
        return (self.price, self.quantity)

    def __str__(self):
        return '<Forecast price=%r quantity=%r>' % (self.price, self.quantity)
    __repr__ = __str__


class GainSchedule(object):
    """Step size a_t of the recursive update."""

    kind = None
    remembered = 0 # extra state the schedule needs beyond (beta0, beta1)

    def gain_at(self, t):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class ConstantGain(GainSchedule):
    kind = 'constant'

    def __init__(self, a, ceiling=1.0):
        if not (0 < a <= ceiling):
            raise InputError('constant gain must be in (0, %r]; received %r' % (ceiling, a))
        self.a = float(a)
        self.ceiling = float(ceiling)

    def gain_at(self, t):
        return self.a

    def to_dict(self):
        return {'kind': self.kind, 'a': self.a}


class DecreasingGain(GainSchedule):
    kind = 'decreasing'
    remembered = 1  # the period counter t

    def __init__(self, omega):
        if not (0 < omega < 1):
            raise InputError('omega must be in (0, 1); received %r' % (omega,))
        self.omega = float(omega)

    def gain_at(self, t):
        return t ** (-self.omega)

    def to_dict(self):
        return {'kind': self.kind, 'omega': self.omega}


def gain_at(schedule, t):
    if t < 1:
        raise InputError('period index starts at 1; received %r' % (t,))
    return schedule.gain_at(t)


class PerturbationSpec(object):
    """Distribution of the price experiment eps1: uniform on [-eps, eps] or
    the two points {-eps, +eps}. sigma1_sq is derived, never supplied."""

    UNIFORM = 'uniform'
    BINARY = 'binary'
    KINDS = (UNIFORM, BINARY)

    def __init__(self, kind=UNIFORM, epsilon=0.75):
        if kind not in self.KINDS:
            raise InputError('perturbation kind must be one of %s; received %r' % (self.KINDS, kind))
        if not (math.isfinite(epsilon) and epsilon >= 0):
            raise InputError('epsilon must be >= 0; received %r' % (epsilon,))
        self.kind = kind
        self.epsilon = float(epsilon)

    @property
    def sigma1_sq(self):
        if self.kind == self.UNIFORM:
            return self.epsilon ** 2 / 3.0
        return self.epsilon ** 2

    def draw(self, rng):
        if self.epsilon == 0:
            return 0.0
        if self.kind == self.UNIFORM:
            return self.epsilon * (2.0 * rng.random() - 1.0)
        return self.epsilon if rng.random() < 0.5 else -self.epsilon

    def to_dict(self):
        return {'kind': self.kind, 'epsilon': self.epsilon, 'sigma1_sq': self.sigma1_sq}


class ForecastRect(object):
    """Rectangle of beliefs described in forecast coordinates: implied price
    in [price_lo, price_hi] and quantity forecast beta0/2 in [q_lo, q_hi].
    Only beliefs with beta0 > 0 and beta1 < 0 can be members."""

    def __init__(self, price_lo, price_hi, q_lo, q_hi):
        if not (price_lo < price_hi and q_lo < q_hi):
            raise InputError('empty rectangle: price [%r, %r] quantity [%r, %r]' % (
                             price_lo, price_hi, q_lo, q_hi))
        self.price_lo = float(price_lo)
        self.price_hi = float(price_hi)
        self.q_lo = float(q_lo)
        self.q_hi = float(q_hi)

    def contains(self, beliefs, strict=False):
        b0, b1 = beliefs.beta0, beliefs.beta1
        if not (math.isfinite(b0) and math.isfinite(b1)) or b0 <= 0 or b1 >= 0:
            return False
        price = -b0 / (2.0 * b1)
        q = b0 / 2.0
        if strict:
            return self.price_lo < price < self.price_hi and self.q_lo < q < self.q_hi
        return self.price_lo <= price <= self.price_hi and self.q_lo <= q <= self.q_hi

    def inflated(self, margin):
        """Grow each side by margin * half-width about the centre."""
        dp = margin * (self.price_hi - self.price_lo) / 2.0
        dq = margin * (self.q_hi - self.q_lo) / 2.0
        return ForecastRect(self.price_lo - dp, self.price_hi + dp, self.q_lo - dq, self.q_hi + dq)

    def strictly_inside(self, other):
        return (other.price_lo < self.price_lo and self.price_hi < other.price_hi and
                other.q_lo < self.q_lo and self.q_hi < other.q_hi)

    def to_dict(self):
        return dict(price_lo=self.price_lo, price_hi=self.price_hi, q_lo=self.q_lo, q_hi=self.q_hi)

    def __str__(self):
        return '<ForecastRect %s>' % self.to_dict()
    __repr__ = __str__


class BeliefBox(object):
    """Projection facility: inner set S, outer set B (S inside the interior
    of B) and the fixed reset point in the interior of S."""

    def __init__(self, inner_box, outer_box, reset_point):
        if not inner_box.strictly_inside(outer_box):
            raise InputError('inner box %s must lie in the interior of %s' % (inner_box, outer_box))
        if not inner_box.contains(reset_point, strict=True):
            raise InputError('reset point %s must lie in the interior of %s' % (
                             reset_point, inner_box))
        self.inner_box = inner_box
        self.outer_box = outer_box
        self.reset_point = reset_point

    @classmethod
    def from_support(cls, support_lo, support_hi, q_min=0.01, margin=0.1, reset_point=None):
        inner = ForecastRect(support_lo, support_hi, q_min, 1.0)
        outer = inner.inflated(margin)
        if reset_point is None:
            reset_point = LinearBeliefs(1.0, -1.0 / (support_lo + support_hi))
        return cls(inner, outer, reset_point)

    def admits(self, beliefs):
        return self.outer_box.contains(beliefs)

    def to_dict(self):
        return dict(inner_box=self.inner_box.to_dict(), outer_box=self.outer_box.to_dict(),
                    reset_point=list(self.reset_point.as_tuple()))


def implied_price(beliefs):
    """Optimal price of the believed line: -beta0 / (2 beta1)."""
    if not beliefs.beta1 < 0:
        raise InvariantViolation('beta1 must be negative; received %r' % (beliefs.beta1,))
    if not beliefs.beta0 > 0:
        raise InvariantViolation('beta0 must be positive; received %r' % (beliefs.beta0,))
    return -beliefs.beta0 / (2.0 * beliefs.beta1)


def perturbed_price(beliefs, spec, rng):
    return max(implied_price(beliefs) + spec.draw(rng), PRICE_FLOOR)


def forecast(beliefs):
    """Translate beliefs into (price, quantity) = (-beta0/(2 beta1), beta0/2)."""
    return Forecast(implied_price(beliefs), beliefs.beta0 / 2.0)


def forecast_error(beliefs, outcome):
    """Realized quantity minus the line's prediction at the charged price."""
    return outcome.quantity - (beliefs.beta0 + beliefs.beta1 * outcome.price)


def regression_matrix(beliefs, spec):
    """R = [[1, b], [b, b^2 + sigma1^2]]; det(R) = sigma1^2."""
    s2 = spec.sigma1_sq
    if s2 == 0:
        raise SingularityError('regression matrix is singular: sigma1^2 = 0')
    b = implied_price(beliefs)
    return np.array([[1.0, b], [b, b * b + s2]])


def _direction(b, price, s2):
    # R^-1 [1, p]^T in closed form
    if s2 == 0:
        raise SingularityError('regression matrix is singular: sigma1^2 = 0')
    d = (price - b) / s2
    return 1.0 - b * d, d


def update(beliefs, outcome, gain_now, spec, box, handler=None, period=None):
    """One step of the learner given this period's outcome.

    Corner outcomes move the intercept by +-gain_now; interior outcomes take
    the R^-1 weighted least squares step. A candidate outside the outer box
    (or not finite) is replaced by the box's reset point and reported to
    `handler` as an EventProjection.
    """
    if not gain_now > 0:
        raise InputError('gain must be positive; received %r' % (gain_now,))
    b0, b1 = beliefs.beta0, beliefs.beta1
    if outcome.quantity == 0.0:
        candidate = LinearBeliefs(b0 - gain_now, b1)
    elif outcome.quantity == 1.0:
        candidate = LinearBeliefs(b0 + gain_now, b1)
    else:
        err = outcome.quantity - (b0 + b1 * outcome.price)
        d0, d1 = _direction(implied_price(beliefs), outcome.price, spec.sigma1_sq)
        candidate = LinearBeliefs(b0 + gain_now * d0 * err, b1 + gain_now * d1 * err)
    if box.admits(candidate):
        return candidate
    logger.debug('projection at period %s: %s -> %s' % (period, candidate, box.reset_point))
    if handler is not None:
        handler(EventProjection(dict(period=period, candidate=candidate.as_tuple(),
                                     reset_to=box.reset_point.as_tuple())))
    return box.reset_point


class EpisodeResult(object):

    def __init__(self, beliefs, forecast, projections, periods, trace=None, checkpoints=None,
                 comp=4):
        self.beliefs = beliefs
        self.forecast = forecast
        self.projections = projections
        self.periods = periods
        self.trace = trace
        self.checkpoints = checkpoints or {}
        self.comp = comp

    def __str__(self):
        return '<EpisodeResult T=%d %s projections=%d>' % (
                self.periods, self.forecast, self.projections)
    __repr__ = __str__


TRACE_FIELDS = ('period', 'beta0', 'beta1', 'implied_price', 'posted_price',
                'quantity', 'forecast_error', 'projected')


class LinearLearner(object):
    """Stateful learner: remembers (beta0, beta1) and, with a decreasing
    gain, the period count."""

    def __init__(self, schedule, spec, box, initial=None):
        self.schedule = schedule
        self.spec = spec
        self.box = box
        self.beliefs = initial if initial is not None else box.reset_point
        self.t = 0
        self.projections = 0
        self._projected = False

    @property
    def comp(self):
        """Remembered parameters plus per-period data inputs."""
        return 2 + self.schedule.remembered + 2

    def _on_event(self, ev):
        if isinstance(ev, EventProjection):
            self.projections += 1
            self._projected = True

    def post_price(self, rng):
        return perturbed_price(self.beliefs, self.spec, rng)

    def observe(self, outcome):
        self.t += 1
        self._projected = False
        self.beliefs = update(self.beliefs, outcome, gain_at(self.schedule, self.t),
                              self.spec, self.box, handler=self._on_event, period=self.t)
        return self.beliefs

    def forecast(self):
        return forecast(self.beliefs)


def run_episode(curve, schedule, spec, box, n_buyers, horizon, rng, trace=False,
                initial=None, checkpoints=None):
    """Run the perturb -> trade -> update loop for `horizon` periods.

    checkpoints: optional iterable of periods after which the forecast is
    recorded (used by ensemble averaging and certification).
    """
    if int(horizon) != horizon or horizon < 1:
        raise InputError('horizon must be a positive integer; received %r' % (horizon,))
    learner = LinearLearner(schedule, spec, box, initial=initial)
    marks = set(int(c) for c in checkpoints) if checkpoints is not None else ()
    recorded = {}
    rows = [] if trace else None
    for t in range(1, int(horizon) + 1):
        before = learner.beliefs
        price = learner.post_price(rng)
        outcome = market.realize_demand(curve, price, n_buyers, rng)
        after = learner.observe(outcome)
        if rows is not None:
            rows.append((t, after.beta0, after.beta1, implied_price(after), price,
                         outcome.quantity, forecast_error(before, outcome), int(learner._projected)))
        if t in marks:
            recorded[t] = learner.forecast()
    if learner.projections:
        logger.debug('%s: %d projections in %d periods' % (curve, learner.projections, horizon))
    return EpisodeResult(learner.beliefs, learner.forecast(), learner.projections,
                         int(horizon), trace=rows, checkpoints=recorded,
                         comp=learner.comp)


def default_tau(mu, c_tau):
    """Clock time c_tau * (-ln mu) to reach accuracy mu."""
    if not (0 < mu < 1):
        raise InputError('default clock time needs 0 < mu < 1; received %r' % (mu,))
    return c_tau * (-math.log(mu))


def stop_time(mu, a, tau_of_mu):
    """Number of periods T = ceil(tau(mu) / a)."""
    if not (mu > 0 and a > 0 and tau_of_mu > 0):
        raise InputError('stop_time needs positive mu, a and tau; received %r, %r, %r' % (
                         mu, a, tau_of_mu))
    return int(math.ceil(tau_of_mu / a))


def decreasing_stop_time(mu, lam, omega, scale):
    """Periods a t^-omega gain needs for accuracy mu with failure
    probability lam: ceil(scale * (-ln lam) / mu^(3 - 2 omega))."""
    if not (mu > 0 and 0 < lam < 1 and 0 < omega < 1 and scale > 0):
        raise InputError('decreasing_stop_time needs mu > 0, lam and omega in (0, 1) and a '
                         'positive scale; received %r, %r, %r, %r' % (mu, lam, omega, scale))
    return int(math.ceil(scale * (-math.log(lam)) / mu ** (3.0 - 2.0 * omega)))
