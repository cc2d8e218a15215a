"""
Mean dynamics of the linear learner.

For a small gain the beliefs shadow the ordinary differential equation

    d beta0 / d tau = 1 - F(b) + b f(b) - beta0
    d beta1 / d tau = -f(b) - beta1,        b = -beta0 / (2 beta1)

in clock time tau = a * t, which moves the implied price as

    d b / d tau = -f(b) / (2 beta1) * ((1 - F(b)) / f(b) - b).

This module integrates the system, measures how fast b contracts to the
optimal price, and compares the prediction with ensembles of stochastic
runs.
"""
import logging
import math
import multiprocessing

import numpy as np
from scipy import stats

from . import demand
from . import linear_learner
from .demand import InputError
from .event import EventClamp
from .linear_learner import LinearBeliefs
from cgprice import utils

logger = logging.getLogger('cgprice.ode')

BETA_FLOOR = 1e-12
ENVELOPE_FLOOR = 1e-9
DEFAULT_MU_GRID = (0.1, 0.03, 0.01, 0.003, 0.001)
ENSEMBLE_START_FACTOR = 0.3


class ContractionFailure(RuntimeError):
    pass


def beta_rhs(beta, curve):
    beta0, beta1 = beta
    if not beta1 < 0:
        raise InputError('beta1 must be negative; received %r' % (beta1,))
    b = -beta0 / (2.0 * beta1)
    f = curve.pdf(b)
    return np.array([curve.sf(b) + b * f - beta0, -f - beta1])


def b_rhs(b, beta1, curve):
    if not beta1 < 0:
        raise InputError('beta1 must be negative; received %r' % (beta1,))
    f = curve.pdf(b)
    if f == 0:
        # off the support the learner only sees corner outcomes: below it
        # everybody buys and b rises, above it nobody buys and b falls
        if b < curve.support_lo:
            return -1.0 / (2.0 * beta1)
        return 1.0 / (2.0 * beta1)
    return -(curve.sf(b) - b * f) / (2.0 * beta1)


def _admissible(beta):
    return np.array([max(beta[0], BETA_FLOOR), min(beta[1], -BETA_FLOOR)])


class OdeTrajectory(object):

    def __init__(self, times, beta_path, events=None):
        self.times = np.asarray(times, dtype=float)
        self.beta_path = np.asarray(beta_path, dtype=float)
        self.b_path = -self.beta_path[:, 0] / (2.0 * self.beta_path[:, 1])
        self.events = events or []

    def b_at(self, taus):
        return np.interp(taus, self.times, self.b_path)

    def rows(self, every=1):
        for i in range(0, len(self.times), every):
            yield (self.times[i], self.beta_path[i, 0], self.beta_path[i, 1], self.b_path[i])

    def __str__(self):
        return '<OdeTrajectory tau=[%r, %r] b: %r -> %r>' % (
                self.times[0], self.times[-1], self.b_path[0], self.b_path[-1])
    __repr__ = __str__


TRAJECTORY_FIELDS = ('tau', 'beta0', 'beta1', 'b')


def integrate(beta_init, curve, tau_end, dt, handler=None):
    """Fixed-step fourth order Runge-Kutta integration of beta_rhs from
    beta_init to tau_end. A step that leaves beta0 > 0, beta1 < 0 is pulled
    back to the boundary and recorded as an EventClamp."""
    if not (dt > 0 and tau_end > 0):
        raise InputError('dt and tau_end must be positive; received %r, %r' % (dt, tau_end))
    y = np.array(beta_init, dtype=float)
    if not (y[0] > 0 and y[1] < 0):
        raise InputError('initial beliefs must have beta0 > 0 > beta1; received %r' % (y,))
    n = int(math.ceil(tau_end / dt - 1e-9))
    times = dt * np.arange(n + 1)
    path = np.empty((n + 1, 2))
    path[0] = y
    events = []

    def rhs(state):
        return beta_rhs(_admissible(state), curve)

    for i in range(n):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        clamped = _admissible(y)
        if not np.array_equal(clamped, y):
            ev = EventClamp(dict(tau=times[i + 1], candidate=tuple(y), clamped_to=tuple(clamped)))
            logger.debug('clamped ODE step: %s' % ev)
            events.append(ev)
            if handler is not None:
                handler(ev)
            y = clamped
        path[i + 1] = y
    return OdeTrajectory(times, path, events)


def offset_start(curve, point, factor):
    """Beliefs forecasting the optimal quantity at price b* + factor * (b* - lo),
    kept inside the support."""
    gap = point.b_star - curve.support_lo
    if gap <= 0:
        gap = 0.25 * curve.width
    price = point.b_star + factor * gap
    price = min(max(price, curve.support_lo + 0.05 * gap), curve.support_hi - 0.05 * gap)
    return LinearBeliefs.from_forecast(price, point.q_star)


def default_initial_grid(curve, point):
    return [offset_start(curve, point, -0.5), offset_start(curve, point, 0.5)]


class ContractionEstimate(object):
    """Worst-case contraction rate c_hat and first-passage clock times
    tau(mu), with a least-squares fit tau ~ intercept + slope * (-ln mu)."""

    def __init__(self, c_hat, tau_table, path_rates, b_star):
        self.c_hat = float(c_hat)
        self.tau_table = dict(tau_table)
        self.path_rates = list(path_rates)
        self.b_star = float(b_star)
        mus = sorted(self.tau_table)
        if len(mus) >= 2:
            fit = stats.linregress([-math.log(m) for m in mus], [self.tau_table[m] for m in mus])
            self.slope, self.intercept, self.r_squared = fit.slope, fit.intercept, fit.rvalue ** 2
        else:
            self.slope, self.intercept, self.r_squared = float('nan'), float('nan'), float('nan')

    def tau(self, mu):
        """Clock time to reach accuracy mu: the measured value on the grid,
        the log-linear fit elsewhere."""
        if mu in self.tau_table:
            return self.tau_table[mu]
        if math.isnan(self.slope):
            raise ContractionFailure('no tau(mu) fit available for mu=%r' % (mu,))
        return max(self.intercept + self.slope * (-math.log(mu)), 0.0)

    def to_dict(self):
        return dict(c_hat=self.c_hat, b_star=self.b_star, path_rates=self.path_rates,
                    tau_table=[[mu, self.tau_table[mu]] for mu in sorted(self.tau_table)],
                    slope=self.slope, intercept=self.intercept, r_squared=self.r_squared)

    def __str__(self):
        return '<ContractionEstimate c_hat=%.4f r2=%.4f>' % (self.c_hat, self.r_squared)
    __repr__ = __str__


def path_rate(trajectory, b_star):
    """Largest c with |b(tau) - b*| <= exp(-c tau) |b(0) - b*| along the path."""
    err = np.abs(trajectory.b_path - b_star)
    e0 = err[0]
    if e0 <= ENVELOPE_FLOOR:
        return float('inf')
    keep = (trajectory.times > 0) & (err > ENVELOPE_FLOOR)
    if not np.any(keep):
        return float('inf')
    return float(np.min(-np.log(err[keep] / e0) / trajectory.times[keep]))


def first_passage(trajectory, b_star, mu):
    hits = np.nonzero(np.abs(trajectory.b_path - b_star) <= mu)[0]
    if len(hits) == 0:
        return None
    return float(trajectory.times[hits[0]])


def estimate_contraction(curve, initial_grid=None, mu_grid=DEFAULT_MU_GRID, tau_end=15.0,
                         dt=1e-3, point=None, trajectories=None):
    """Integrate from every initial belief and report the worst case.

    trajectories: optional list that receives the integrated paths.
    """
    if point is None:
        point = demand.optimal_price(curve, tol=1e-10)
    if initial_grid is None:
        initial_grid = default_initial_grid(curve, point)
    rates = []
    taus = dict((mu, 0.0) for mu in mu_grid)
    for start in initial_grid:
        traj = integrate(start.as_tuple() if isinstance(start, LinearBeliefs) else start,
                         curve, tau_end, dt)
        if trajectories is not None:
            trajectories.append(traj)
        rate = path_rate(traj, point.b_star)
        if not rate > 0:
            raise ContractionFailure('%s: path from %s does not contract (rate %r)' % (
                                     curve, start, rate))
        rates.append(rate)
        for mu in mu_grid:
            tau = first_passage(traj, point.b_star, mu)
            if tau is None:
                raise ContractionFailure('%s: path from %s not within %r of b* by tau=%r' % (
                                         curve, start, mu, tau_end))
            taus[mu] = max(taus[mu], tau)
    if not rates:
        raise ContractionFailure('no initial beliefs away from b* for %s' % curve)
    estimate = ContractionEstimate(min(rates), taus, rates, point.b_star)
    logger.info('%s: %s' % (curve, estimate))
    return estimate


class EnsembleComparison(object):
    """Ensemble-mean implied price against the ODE path; projections counts
    resets over all members."""

    def __init__(self, times, ensemble_b, ode_b, projections=0, n_seeds=None):
        self.times = np.asarray(times)
        self.ensemble_b = np.asarray(ensemble_b)
        self.ode_b = np.asarray(ode_b)
        deviation = self.ensemble_b - self.ode_b
        self.sup_deviation = float(np.max(np.abs(deviation)))
        self.end_deviation = float(deviation[-1])
        self.projections = int(projections)
        self.n_seeds = n_seeds

    def to_dict(self):
        return dict(sup_deviation=self.sup_deviation, end_deviation=self.end_deviation,
                    samples=len(self.times), n_seeds=self.n_seeds, projections=self.projections)

    def __str__(self):
        return '<EnsembleComparison sup=%.5f end=%.5f projections=%d>' % (
                self.sup_deviation, self.end_deviation, self.projections)
    __repr__ = __str__


def _ensemble_member(args):
    curve, schedule, spec, box, n_buyers, horizon, seed, index, initial, marks = args
    rng = utils.make_rng(seed, utils.STREAM_ENSEMBLE, index)
    result = linear_learner.run_episode(curve, schedule, spec, box, n_buyers, horizon, rng,
                                        initial=initial, checkpoints=marks)
    return [result.checkpoints[t].price for t in marks], result.projections


def compare_ensemble(curve, schedule, spec, box, n_buyers, n_seeds, tau_end, seed=0,
                     initial=None, dt=1e-3, samples=100, workers=1):
    """Average the implied price of n_seeds stochastic runs at clock times
    tau = a * t and return its deviation from the integrated ODE path."""
    if not isinstance(schedule, linear_learner.ConstantGain):
        raise InputError('ensemble comparison needs a constant gain; received %r' % (schedule,))
    if n_seeds < 100:
        logger.warning('compare_ensemble with %d seeds: Monte Carlo noise will dominate' % n_seeds)
    if initial is None:
        initial = offset_start(curve, demand.optimal_price(curve), ENSEMBLE_START_FACTOR)
    a = schedule.a
    horizon = int(math.ceil(tau_end / a - 1e-9))
    every = max(1, horizon // samples)
    marks = list(range(every, horizon + 1, every))
    jobs = [(curve, schedule, spec, box, n_buyers, horizon, seed, i, initial, marks)
            for i in range(n_seeds)]
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            members = pool.map(_ensemble_member, jobs)
    else:
        members = [_ensemble_member(job) for job in jobs]
    paths = [path for path, _ in members]
    projections = sum(n for _, n in members)
    if projections:
        logger.warning('%s: %d projections across the ensemble; reset paths skip the '
                       'transient the ODE follows' % (curve, projections))
    mean_b = np.concatenate([[initial.implied_price], np.mean(np.array(paths), axis=0)])
    times = a * np.array([0] + marks, dtype=float)
    traj = integrate(initial.as_tuple(), curve, max(times[-1], dt), dt)
    comparison = EnsembleComparison(times, mean_b, traj.b_at(times), projections, n_seeds)
    logger.info('%s: ensemble of %d vs ODE: %s' % (curve, n_seeds, comparison))
    return comparison
