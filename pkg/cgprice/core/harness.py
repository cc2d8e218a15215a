"""
Experiment harness: sweeps over a demand family, forecast-error
statistics, empirical PAC certification and the acceptance checks.

Sweep points are independent jobs; each one derives its own random streams
from (seed, stream tag, point index, ...) so results do not depend on the
number of workers or on scheduling. Workers return plain records and the
collector consumes them in sweep order.
"""
import logging
import math
import multiprocessing

import numpy as np
from scipy import stats as sstats

from . import demand
from . import empirical_learner
from . import linear_learner
from . import ode
from .demand import InputError, OracleFailure
from .linear_learner import LinearBeliefs
from .stats import summarize
from cgprice import utils

logger = logging.getLogger('cgprice.harness')

FAMILY_KINDS = ('truncated_gaussian', 'uniform', 'tabulated')
PAC_START_FACTOR = 0.9


class ConfigError(ValueError):
    pass


def _require(cond, msg, *args):
    if not cond:
        raise ConfigError(msg % args)


class FamilySpec(object):
    """The demand family of a sweep: half-normals with sigma on an even
    grid, a single uniform curve or a single tabulated curve."""

    def __init__(self, kind='truncated_gaussian', mu=10.0, sigma_min=11.0, sigma_max=16.0,
                 sigma_points=200, uniform_lo=0.0, uniform_hi=1.0, table_path=None,
                 cap_sigmas=8.0):
        _require(kind in FAMILY_KINDS, 'family kind must be one of %s; received %r',
                 FAMILY_KINDS, kind)
        self.kind = kind
        self.mu = float(mu)
        self.sigma_min = float(sigma_min)
        self.sigma_max = float(sigma_max)
        self.sigma_points = int(sigma_points)
        self.uniform_lo = float(uniform_lo)
        self.uniform_hi = float(uniform_hi)
        self.table_path = table_path
        self.cap_sigmas = float(cap_sigmas)
        if kind == 'truncated_gaussian':
            _require(self.sigma_points >= 1, 'sigma_points must be >= 1; received %r',
                     self.sigma_points)
            _require(self.sigma_min > 0, 'sigma_min must be positive; received %r', self.sigma_min)
            _require(self.sigma_min < self.sigma_max or
                     (self.sigma_points == 1 and self.sigma_min == self.sigma_max),
                     'sigma_min (%r) must be below sigma_max (%r)', self.sigma_min, self.sigma_max)
            if not (11.0 <= self.sigma_min and self.sigma_max <= 16.0):
                logger.info('sigma range [%s, %s] leaves the reference family [11, 16]' % (
                            self.sigma_min, self.sigma_max))
        elif kind == 'uniform':
            _require(self.uniform_lo < self.uniform_hi, 'uniform_lo must be below uniform_hi')
        else:
            _require(bool(table_path), 'family kind tabulated needs table_path')

    def sigmas(self):
        if self.sigma_points == 1:
            return np.array([self.sigma_min])
        return np.linspace(self.sigma_min, self.sigma_max, self.sigma_points)

    def curves(self):
        """List of (parameter, curve); parameter is sigma for half-normals
        and None otherwise."""
        if self.kind == 'truncated_gaussian':
            return [(float(s), demand.TruncatedGaussian(self.mu, float(s), self.cap_sigmas))
                    for s in self.sigmas()]
        if self.kind == 'uniform':
            return [(None, demand.Uniform(self.uniform_lo, self.uniform_hi))]
        try:
            return [(None, demand.Tabulated.from_file(self.table_path))]
        except InputError as e:
            raise ConfigError(str(e))

    def scaled(self, scale):
        """Same family with the sigma grid density multiplied by `scale`."""
        _require(scale > 0, 'scale must be positive; received %r', scale)
        d = self.to_dict()
        d['sigma_points'] = max(1, int(round(self.sigma_points * scale)))
        return FamilySpec(**d)

    def to_dict(self):
        return dict(kind=self.kind, mu=self.mu, sigma_min=self.sigma_min,
                    sigma_max=self.sigma_max, sigma_points=self.sigma_points,
                    uniform_lo=self.uniform_lo, uniform_hi=self.uniform_hi,
                    table_path=self.table_path, cap_sigmas=self.cap_sigmas)


class SweepConfig(object):
    """Immutable description of one experiment run."""

    def __init__(self, family=None, n_buyers=100, horizon=300000, gain=1e-4, gain_ceiling=1.0,
                 gain_kind='constant', omega=0.5, epsilon=0.75, perturbation='uniform',
                 q_min=0.01, box_margin=0.1, initial=None, replications=1,
                 reports_per_period=(2, 4, 6, 8, 10), grid_fraction=1e-3, seed=20190101,
                 ihr_grid_step=0.01, oracle_tol=1e-8, bin_width=0.01, ode_dt=1e-3,
                 ode_tau_end=20.0, mu_grid=ode.DEFAULT_MU_GRID, tau_safety=2.0, c_tau=2.0,
                 record_every=10):
        self.family = family if family is not None else FamilySpec()
        self.n_buyers = int(n_buyers)
        self.horizon = int(horizon)
        self.gain = float(gain)
        self.gain_ceiling = float(gain_ceiling)
        self.gain_kind = gain_kind
        self.omega = float(omega)
        self.epsilon = float(epsilon)
        self.perturbation = perturbation
        self.q_min = float(q_min)
        self.box_margin = float(box_margin)
        self.initial = tuple(initial) if initial is not None else None
        self.replications = int(replications)
        self.reports_per_period = tuple(int(k) for k in reports_per_period)
        self.grid_fraction = float(grid_fraction)
        self.seed = int(seed)
        self.ihr_grid_step = float(ihr_grid_step)
        self.oracle_tol = float(oracle_tol)
        self.bin_width = float(bin_width)
        self.ode_dt = float(ode_dt)
        self.ode_tau_end = float(ode_tau_end)
        self.mu_grid = tuple(float(m) for m in mu_grid)
        self.tau_safety = float(tau_safety)
        self.c_tau = float(c_tau)
        self.record_every = int(record_every)
        self._validate()

    def _validate(self):
        _require(self.n_buyers >= 1, 'n_buyers must be >= 1; received %r', self.n_buyers)
        _require(self.horizon >= 1, 'horizon must be >= 1; received %r', self.horizon)
        _require(self.replications >= 1, 'replications must be >= 1')
        _require(self.gain_kind in ('constant', 'decreasing'),
                 'gain_kind must be constant or decreasing; received %r', self.gain_kind)
        _require(0 < self.gain <= self.gain_ceiling,
                 'gain must be in (0, %r]; received %r', self.gain_ceiling, self.gain)
        _require(0 < self.omega < 1, 'omega must be in (0, 1); received %r', self.omega)
        _require(self.epsilon > 0, 'epsilon must be positive; received %r', self.epsilon)
        _require(self.perturbation in linear_learner.PerturbationSpec.KINDS,
                 'unknown perturbation %r', self.perturbation)
        _require(0 < self.q_min < 1, 'q_min must be in (0, 1); received %r', self.q_min)
        _require(self.box_margin > 0, 'box_margin must be positive')
        _require(all(k >= 1 for k in self.reports_per_period),
                 'reports_per_period must all be >= 1; received %r', self.reports_per_period)
        _require(0 < self.grid_fraction < 1, 'grid_fraction must be in (0, 1)')
        _require(self.seed >= 0, 'seed must be >= 0')
        _require(self.bin_width > 0 and self.ihr_grid_step > 0 and self.oracle_tol > 0,
                 'bin_width, ihr_grid_step and oracle_tol must be positive')
        _require(self.ode_dt > 0 and self.ode_tau_end > 0, 'ODE dt and tau_end must be positive')
        _require(len(self.mu_grid) >= 2 and all(0 < m < 1 for m in self.mu_grid),
                 'mu_grid needs >= 2 levels in (0, 1); received %r', self.mu_grid)
        _require(self.tau_safety >= 1, 'tau_safety must be >= 1')
        _require(self.c_tau > 0, 'c_tau must be positive; received %r', self.c_tau)
        if self.initial is not None:
            _require(len(self.initial) == 2 and self.initial[0] > 0 and self.initial[1] < 0,
                     'initial beliefs need beta0 > 0 > beta1; received %r', self.initial)

    @classmethod
    def from_conf(cls, conf):
        fam = conf.family
        family = FamilySpec(kind=fam.kind, mu=fam.mu, sigma_min=fam.sigma_min,
                            sigma_max=fam.sigma_max, sigma_points=fam.sigma_points,
                            uniform_lo=fam.uniform_lo, uniform_hi=fam.uniform_hi,
                            table_path=fam.table_path, cap_sigmas=fam.cap_sigmas)
        lin = conf.linear
        initial = None
        if lin.initial_beta0 is not None or lin.initial_beta1 is not None:
            _require(lin.initial_beta0 is not None and lin.initial_beta1 is not None,
                     'initial_beta0 and initial_beta1 must be set together')
            initial = (lin.initial_beta0, lin.initial_beta1)
        return cls(family=family, n_buyers=conf.market.n_buyers, horizon=lin.horizon,
                   gain=lin.gain, gain_ceiling=lin.gain_ceiling, gain_kind=lin.gain_kind,
                   omega=lin.omega, epsilon=lin.epsilon, perturbation=lin.perturbation,
                   q_min=lin.q_min, box_margin=lin.box_margin, initial=initial,
                   replications=lin.replications,
                   reports_per_period=conf.baseline.reports_per_period,
                   grid_fraction=conf.baseline.grid_fraction, seed=conf.seed,
                   ihr_grid_step=fam.ihr_grid_step, oracle_tol=fam.oracle_tol,
                   bin_width=conf.stats.bin_width, ode_dt=conf.ode.dt,
                   ode_tau_end=conf.ode.tau_end, mu_grid=conf.ode.mu_grid,
                   tau_safety=conf.ode.tau_safety, c_tau=conf.ode.c_tau,
                   record_every=conf.ode.record_every)

    def replace(self, **kwargs):
        d = self.to_dict()
        d['family'] = self.family
        d.update(kwargs)
        return SweepConfig(**d)

    def scaled(self, scale):
        return self.replace(family=self.family.scaled(scale))

    def schedule(self):
        if self.gain_kind == 'decreasing':
            return linear_learner.DecreasingGain(self.omega)
        return linear_learner.ConstantGain(self.gain, self.gain_ceiling)

    def perturbation_spec(self):
        return linear_learner.PerturbationSpec(self.perturbation, self.epsilon)

    def box_for(self, curve):
        return linear_learner.BeliefBox.from_support(curve.support_lo, curve.support_hi,
                                                     q_min=self.q_min, margin=self.box_margin)

    def initial_beliefs(self, box):
        if self.initial is None:
            return box.reset_point
        return LinearBeliefs(*self.initial)

    def grid_resolution(self, curve):
        return self.grid_fraction * curve.width

    def to_dict(self):
        return dict(family=self.family.to_dict(), n_buyers=self.n_buyers, horizon=self.horizon,
                    gain=self.gain, gain_ceiling=self.gain_ceiling, gain_kind=self.gain_kind,
                    omega=self.omega, epsilon=self.epsilon, perturbation=self.perturbation,
                    q_min=self.q_min, box_margin=self.box_margin,
                    initial=list(self.initial) if self.initial else None,
                    replications=self.replications,
                    reports_per_period=list(self.reports_per_period),
                    grid_fraction=self.grid_fraction, seed=self.seed,
                    ihr_grid_step=self.ihr_grid_step, oracle_tol=self.oracle_tol,
                    bin_width=self.bin_width, ode_dt=self.ode_dt, ode_tau_end=self.ode_tau_end,
                    mu_grid=list(self.mu_grid), tau_safety=self.tau_safety, c_tau=self.c_tau,
                    record_every=self.record_every)


class SweepRecord(object):
    """Outcome of one sweep point. Errors are forecast price minus b*."""

    def __init__(self, index, param, point, linear_forecast, oracle_quantity, projections,
                 linear_comp, cr_prices, cr_comp, traces=None):
        self.index = index
        self.param = param
        self.point = point
        self.linear_forecast = linear_forecast
        self.oracle_quantity = oracle_quantity
        self.projections = projections
        self.linear_comp = linear_comp
        self.cr_prices = dict(cr_prices)
        self.cr_comp = dict(cr_comp)
        self.traces = traces or {}

    @property
    def linear_error(self):
        return self.linear_forecast.price - self.point.b_star

    @property
    def linear_q_error(self):
        return self.linear_forecast.quantity - self.point.q_star

    def cr_error(self, k):
        return self.cr_prices[k] - self.point.b_star

    def fields(self):
        return (('index', 'sigma', 'b_star', 'q_star', 'linear_price', 'linear_error',
                 'linear_q_error', 'oracle_quantity', 'projections') +
                tuple('cr_error_k%d' % k for k in sorted(self.cr_prices)))

    def row(self):
        return ([self.index, self.param, self.point.b_star, self.point.q_star,
                 self.linear_forecast.price, self.linear_error, self.linear_q_error,
                 self.oracle_quantity, self.projections] +
                [self.cr_error(k) for k in sorted(self.cr_prices)])

    def __str__(self):
        return '<SweepRecord %d sigma=%s linear_error=%.5f>' % (
                self.index, self.param, self.linear_error)
    __repr__ = __str__


class SkippedPoint(object):

    def __init__(self, index, param, reason):
        self.index = index
        self.param = param
        self.reason = reason

    def to_dict(self):
        return dict(index=self.index, sigma=self.param, reason=self.reason)


def _sweep_point(job):
    config, index, param, curve, trace = job
    try:
        report = demand.validate_ihr(curve, config.ihr_grid_step)
        if not report.is_ihr:
            return SkippedPoint(index, param, 'hazard rate not monotone on grid step %s' %
                                config.ihr_grid_step)
        point = demand.optimal_price(curve, tol=config.oracle_tol)
    except (InputError, OracleFailure) as e:
        return SkippedPoint(index, param, str(e))

    schedule = config.schedule()
    spec = config.perturbation_spec()
    box = config.box_for(curve)
    initial = config.initial_beliefs(box)
    traces = {}
    prices, quantities, projections = [], [], 0
    comp = None
    for r in range(config.replications):
        rng = utils.make_rng(config.seed, utils.STREAM_LINEAR, index, r)
        result = linear_learner.run_episode(curve, schedule, spec, box, config.n_buyers,
                                            config.horizon, rng, trace=trace and r == 0,
                                            initial=initial)
        prices.append(result.forecast.price)
        quantities.append(result.forecast.quantity)
        projections += result.projections
        if result.trace is not None:
            traces['linear'] = (linear_learner.TRACE_FIELDS, result.trace)
        comp = result.comp
    forecast = linear_learner.Forecast(float(np.mean(prices)), float(np.mean(quantities)))

    cr_prices, cr_comp = {}, {}
    resolution = config.grid_resolution(curve)
    every = max(1, config.horizon // 1000)
    for k in config.reports_per_period:
        k_prices = []
        for r in range(config.replications):
            rng = utils.make_rng(config.seed, utils.STREAM_BASELINE, index, k, r)
            res = empirical_learner.run_cr_episode(curve, k, config.horizon, resolution, rng,
                                                   trace=trace and r == 0, trace_every=every)
            k_prices.append(res.price)
            cr_comp[k] = res.comp
            if res.trace is not None:
                traces['cr_k%d' % k] = (empirical_learner.TRACE_FIELDS, res.trace)
        cr_prices[k] = float(np.mean(k_prices))

    return SweepRecord(index, param, point, forecast, float(curve.sf(forecast.price)), projections,
                       comp, cr_prices, cr_comp, traces=traces)


class SweepResult(object):

    def __init__(self, records, skipped):
        self.records = records
        self.skipped = skipped

    def errors(self, learner):
        """Forecast errors of 'linear', 'linear_quantity' or 'cr_k<K>'."""
        if learner == 'linear':
            return [r.linear_error for r in self.records]
        if learner == 'linear_quantity':
            return [r.linear_q_error for r in self.records]
        k = int(learner[len('cr_k'):])
        return [r.cr_error(k) for r in self.records]

    def learners(self):
        if not self.records:
            return []
        return ['linear'] + ['cr_k%d' % k for k in sorted(self.records[0].cr_prices)]

    def summarize(self, bin_width):
        return dict((name, summarize(self.errors(name), bin_width)) for name in self.learners())

    def comp(self):
        if not self.records:
            return {}
        out = {'linear': max(r.linear_comp for r in self.records)}
        for k in sorted(self.records[0].cr_comp):
            out['cr_k%d' % k] = max(r.cr_comp[k] for r in self.records)
        return out


def _map(func, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(workers) as pool:
            for out in pool.imap(func, jobs):
                yield out
    else:
        for job in jobs:
            yield func(job)


def run_sweep(config, workers=1, trace=False):
    """Run every point of the family and collect records in sweep order;
    the result is identical for any worker count."""
    curves = config.family.curves()
    jobs = [(config, i, param, curve, trace) for i, (param, curve) in enumerate(curves)]
    logger.info('sweep of %d points, T=%d, %d worker(s)' % (len(jobs), config.horizon, workers))
    records, skipped = [], []
    for out in _map(_sweep_point, jobs, workers):
        if isinstance(out, SkippedPoint):
            logger.warning('skipped sweep point %d (sigma=%s): %s' % (out.index, out.param,
                                                                        out.reason))
            skipped.append(out)
            continue
        records.append(out)
        logger.debug('%s' % out)
        if len(records) % 50 == 0:
            logger.info('%d/%d sweep points done' % (len(records) + len(skipped), len(jobs)))
    return SweepResult(records, skipped)


def clopper_pearson_upper(failures, trials, confidence):
    """One-sided upper confidence bound on a binomial failure probability."""
    if failures >= trials:
        return 1.0
    return float(sstats.beta.ppf(confidence, failures + 1, trials - failures))


class PacSettings(object):

    def __init__(self, mu, lam, trials, radius_factor=4.0, confidence=0.95, joint=False,
                 max_curves=0):
        _require(mu is not None and mu > 0, 'PAC mu must be positive; received %r', mu)
        _require(lam is not None and 0 < lam < 1, 'PAC lambda must be in (0, 1); received %r',
                 lam)
        _require(trials is not None and trials >= 1, 'PAC trials must be >= 1; received %r',
                 trials)
        _require(radius_factor > 0, 'radius_factor must be positive')
        _require(0 < confidence < 1, 'confidence must be in (0, 1)')
        self.mu = float(mu)
        self.lam = float(lam)
        self.trials = int(trials)
        self.radius_factor = float(radius_factor)
        self.confidence = float(confidence)
        self.joint = bool(joint)
        self.max_curves = int(max_curves)

    @classmethod
    def parse(cls, text, defaults=None):
        """Parse 'mu=<f>,lambda=<f>,trials=<n>' on top of `defaults`."""
        values = dict(defaults or {})
        for item in filter(None, (s.strip() for s in text.split(','))):
            key, sep, value = item.partition('=')
            _require(sep and key in ('mu', 'lambda', 'trials'),
                     'cannot parse PAC setting %r (expected mu=,lambda=,trials=)', item)
            try:
                values[key] = int(value) if key == 'trials' else float(value)
            except ValueError:
                raise ConfigError('PAC setting %s=%r is not a number' % (key, value))
        return cls(values.get('mu'), values.get('lambda'), values.get('trials'),
                   **dict((k, v) for k, v in values.items()
                          if k in ('radius_factor', 'confidence', 'joint', 'max_curves')))


class PacCertificate(object):
    """Empirical certificate that the forecast lands within radius_factor * mu
    of (b*, q*) with probability at least 1 - lambda after t_used periods."""

    def __init__(self, curve_label, mu, lam, t_used, n_trials, failures, radius_factor=4.0,
                 confidence=0.95, joint=False, joint_failures=None):
        self.curve_label = curve_label
        self.mu = mu
        self.lam = lam
        self.t_used = int(t_used)
        self.n_trials = int(n_trials)
        self.failures = dict((int(t), int(k)) for t, k in failures.items())
        self.joint_failures = dict((int(t), int(k)) for t, k in (joint_failures or {}).items())
        self.radius_factor = radius_factor
        self.confidence = confidence
        self.joint = joint
        self.per_curve = []

    def _counts(self):
        return self.joint_failures if self.joint else self.failures

    @property
    def failure_rates(self):
        return dict((t, k / float(self.n_trials)) for t, k in sorted(self._counts().items()))

    @property
    def empirical_failure_rate(self):
        return self._counts()[self.t_used] / float(self.n_trials)

    @property
    def upper_bound(self):
        return clopper_pearson_upper(self._counts()[self.t_used], self.n_trials, self.confidence)

    @property
    def passed(self):
        return self.upper_bound <= self.lam

    @property
    def rho_hat(self):
        """Fitted exponential decay rate (per period) of the failure rate."""
        marks = sorted(self._counts())
        if len(marks) < 2:
            return float('nan')
        # (k + 1/2) / (n + 1) keeps zero counts on the log scale
        logs = [math.log((self._counts()[t] + 0.5) / (self.n_trials + 1.0)) for t in marks]
        return float(-sstats.linregress(marks, logs).slope)

    def to_dict(self):
        d = dict(curve=self.curve_label, mu=self.mu, **{'lambda': self.lam})
        d.update(t_used=self.t_used, n_trials=self.n_trials, radius_factor=self.radius_factor,
                 confidence=self.confidence, joint=self.joint,
                 empirical_failure_rate=self.empirical_failure_rate,
                 upper_bound=self.upper_bound, passed=self.passed, rho_hat=self.rho_hat,
                 failure_rates=[[t, r] for t, r in sorted(self.failure_rates.items())])
        if self.per_curve:
            d['per_curve'] = [c.to_dict() for c in self.per_curve]
        return d

    def __str__(self):
        return '<PacCertificate %s T=%d failure=%.4f ucb=%.4f passed=%s>' % (
                self.curve_label, self.t_used, self.empirical_failure_rate, self.upper_bound,
                self.passed)
    __repr__ = __str__


def pac_start(curve, point):
    """Start beliefs for certification: well away from b* on the high side."""
    return ode.offset_start(curve, point, PAC_START_FACTOR)


def certification_horizon(curve, point, config, mu, start, lam):
    """T(mu) = ceil(tau_safety * tau(mu) / a) with tau(mu) from the ODE.

    When the ODE gives no usable tau(mu), c_tau * (-ln mu) stands in. A
    decreasing gain uses ceil(c_tau * (-ln lam) / mu^(3 - 2 omega)).
    """
    schedule = config.schedule()
    if not isinstance(schedule, linear_learner.ConstantGain):
        return linear_learner.decreasing_stop_time(mu, lam, schedule.omega, config.c_tau)
    grid = ode.default_initial_grid(curve, point) + [start]
    try:
        estimate = ode.estimate_contraction(curve, initial_grid=grid, mu_grid=config.mu_grid,
                                            tau_end=config.ode_tau_end, dt=config.ode_dt,
                                            point=point)
        tau = estimate.tau(mu)
    except ode.ContractionFailure as e:
        logger.warning('%s: %s; falling back to c_tau * (-ln mu)' % (curve, e))
        tau = linear_learner.default_tau(mu, config.c_tau)
    tau = config.tau_safety * tau
    return linear_learner.stop_time(mu, schedule.a, max(tau, schedule.a))


def _pac_trial(job):
    config, curve, point, start, curve_index, trial, marks, radius = job
    rng = utils.make_rng(config.seed, utils.STREAM_PAC, curve_index, trial)
    result = linear_learner.run_episode(curve, config.schedule(), config.perturbation_spec(),
                                        config.box_for(curve), config.n_buyers, marks[-1], rng,
                                        initial=start, checkpoints=marks)
    price_fail, joint_fail = [], []
    for t in marks:
        fc = result.checkpoints[t]
        dp = abs(fc.price - point.b_star)
        dq = abs(float(curve.sf(fc.price)) - point.q_star)
        price_fail.append(dp > radius)
        joint_fail.append(math.hypot(dp, dq) > radius)
    return price_fail, joint_fail


def _certify_curve(curve, curve_index, config, settings, workers, t_used=None):
    point = demand.optimal_price(curve, tol=config.oracle_tol)
    start = pac_start(curve, point)
    if t_used is None:
        t_used = certification_horizon(curve, point, config, settings.mu, start,
                                       settings.lam)
    marks = sorted(set([max(1, t_used // 4), max(1, t_used // 2), t_used]))
    radius = settings.radius_factor * settings.mu
    jobs = [(config, curve, point, start, curve_index, i, marks, radius)
            for i in range(settings.trials)]
    price_counts = dict((t, 0) for t in marks)
    joint_counts = dict((t, 0) for t in marks)
    for price_fail, joint_fail in _map(_pac_trial, jobs, workers):
        for t, pf, jf in zip(marks, price_fail, joint_fail):
            price_counts[t] += pf
            joint_counts[t] += jf
    cert = PacCertificate(curve.label(), settings.mu, settings.lam, t_used, settings.trials,
                          price_counts, settings.radius_factor, settings.confidence,
                          settings.joint, joint_counts)
    logger.info('%s' % cert)
    return cert


def pac_certify(curves, config, settings, workers=1, t_used=None):
    """Certify one curve or a family; over a family the certificate is the
    worst curve's, with every curve's certificate attached as per_curve."""
    if isinstance(curves, demand.DemandCurve):
        curves = [curves]
    curves = list(curves)
    if settings.trials < 50.0 / settings.lam:
        logger.warning('%d trials is few for lambda=%s (recommended >= %d)' % (
                       settings.trials, settings.lam, int(math.ceil(50.0 / settings.lam))))
    if settings.max_curves and len(curves) > settings.max_curves:
        pick = np.unique(np.linspace(0, len(curves) - 1, settings.max_curves).round().astype(int))
        curves = [curves[i] for i in pick]
    certs = [_certify_curve(c, i, config, settings, workers, t_used) for i, c in enumerate(curves)]
    if len(certs) == 1:
        return certs[0]
    worst = max(certs, key=lambda c: (c.empirical_failure_rate, c.upper_bound))
    family = PacCertificate('family worst case: %s' % worst.curve_label, worst.mu, worst.lam,
                            worst.t_used, worst.n_trials, worst.failures, worst.radius_factor,
                            worst.confidence, worst.joint, worst.joint_failures)
    family.per_curve = certs
    return family


def validate_family(config):
    """validate_ihr and the oracle for every curve of the family.
    Returns a list of (param, curve, IhrReport, OptimalPoint or None, error)."""
    out = []
    for param, curve in config.family.curves():
        report, point, error = None, None, None
        try:
            report = demand.validate_ihr(curve, config.ihr_grid_step)
            if not report.is_ihr:
                error = 'hazard rate not monotone'
            else:
                point = demand.optimal_price(curve, tol=config.oracle_tol)
        except (InputError, OracleFailure) as e:
            error = str(e)
        out.append((param, curve, report, point, error))
    return out


class OdeReport(object):

    def __init__(self, index, param, curve, estimate, trajectories):
        self.index = index
        self.param = param
        self.curve = curve
        self.estimate = estimate
        self.trajectories = trajectories

    def to_dict(self):
        d = dict(index=self.index, sigma=self.param, curve=self.curve.label())
        d.update(self.estimate.to_dict())
        return d


def run_ode(config):
    """Contraction estimates from the default initial grid of every curve."""
    reports = []
    for index, (param, curve) in enumerate(config.family.curves()):
        trajectories = []
        estimate = ode.estimate_contraction(curve, mu_grid=config.mu_grid,
                                            tau_end=config.ode_tau_end, dt=config.ode_dt,
                                            trajectories=trajectories)
        reports.append(OdeReport(index, param, curve, estimate, trajectories))
    return reports


class CheckBounds(object):

    def __init__(self, linear_mean=(-0.05, 0.10), linear_var=(0.001, 0.01),
                 cr_first_var=(0.004, 0.03), cr_last_var=(0.001, 0.01), min_variance_ratio=1.5,
                 min_r_squared=0.95):
        self.linear_mean = tuple(linear_mean)
        self.linear_var = tuple(linear_var)
        self.cr_first_var = tuple(cr_first_var)
        self.cr_last_var = tuple(cr_last_var)
        self.min_variance_ratio = float(min_variance_ratio)
        self.min_r_squared = float(min_r_squared)

    @classmethod
    def from_conf(cls, conf):
        c = conf.check
        return cls((c.linear_mean_min, c.linear_mean_max), (c.linear_var_min, c.linear_var_max),
                   (c.cr_first_var_min, c.cr_first_var_max),
                   (c.cr_last_var_min, c.cr_last_var_max), c.min_variance_ratio,
                   c.min_r_squared)


def _within(value, bounds):
    return bounds[0] <= value <= bounds[1]


def check_acceptance(stats, bounds, certificates=()):
    """Return the list of failed checks (empty when everything holds)."""
    failures = []
    lin = stats.get('linear')
    if lin is not None:
        if not _within(lin.mean, bounds.linear_mean):
            failures.append('linear error mean %r outside %r' % (lin.mean, bounds.linear_mean))
        if not _within(lin.variance, bounds.linear_var):
            failures.append('linear error variance %r outside %r' % (lin.variance,
                                                                     bounds.linear_var))
    ks = sorted(int(name[len('cr_k'):]) for name in stats if name.startswith('cr_k'))
    if ks:
        variances = [stats['cr_k%d' % k].variance for k in ks]
        first, last = variances[0], variances[-1]
        if len(ks) > 1:
            if not first > last:
                failures.append('baseline variance K=%d (%r) not above K=%d (%r)' % (
                                ks[0], first, ks[-1], last))
            rises = sum(1 for a, b in zip(variances, variances[1:]) if b >= a)
            if rises > 1:
                failures.append('baseline variance rises %d times along K=%s' % (rises, ks))
            if not _within(last, bounds.cr_last_var):
                failures.append('baseline variance K=%d %r outside %r' % (ks[-1], last,
                                                                          bounds.cr_last_var))
        if not _within(first, bounds.cr_first_var):
            failures.append('baseline variance K=%d %r outside %r' % (ks[0], first,
                                                                      bounds.cr_first_var))
        if lin is not None and not first > bounds.min_variance_ratio * lin.variance:
            failures.append('baseline/linear variance ratio %r below %r' % (
                            first / lin.variance if lin.variance else float('inf'),
                            bounds.min_variance_ratio))
    for cert in certificates:
        if not cert.passed:
            failures.append('certificate failed: %s' % cert)
        rates = cert.failure_rates
        marks = sorted(rates)
        for a, b in zip(marks, marks[1:]):
            # nonincreasing in T up to two standard errors
            se = math.sqrt(max(rates[a] * (1 - rates[a]), 1.0 / cert.n_trials) / cert.n_trials)
            if rates[b] > rates[a] + 2 * se:
                failures.append('failure rate rises from %r at T=%d to %r at T=%d' % (
                                rates[a], a, rates[b], b))
    for f in failures:
        logger.error('acceptance check failed: %s' % f)
    return failures


def check_contraction(reports, bounds):
    failures = []
    for r in reports:
        if not r.estimate.c_hat > 0:
            failures.append('%s: c_hat %r is not positive' % (r.curve, r.estimate.c_hat))
        if not r.estimate.r_squared >= bounds.min_r_squared:
            failures.append('%s: log-linear fit R^2 %r below %r' % (
                            r.curve, r.estimate.r_squared, bounds.min_r_squared))
    for f in failures:
        logger.error('acceptance check failed: %s' % f)
    return failures
