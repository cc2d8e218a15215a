from oslo_config import cfg
from oslo_config import types

opts = [
        cfg.Opt('seed', type=types.Integer(min=0), default=20190101,
            help='Master seed; every random stream is derived from it.'),
        cfg.Opt('workers', type=types.Integer(min=1), default=1,
            help='Size of the worker pool.'),
        cfg.StrOpt('out_dir', default='results', help='Directory for result files.'),
        ]

family_opts = [
        cfg.StrOpt('kind', default='truncated_gaussian',
            choices=['truncated_gaussian', 'uniform', 'tabulated'],
            help='Demand family to sweep over.'),
        cfg.FloatOpt('mu', default=10.0, help='Truncation point (mean) of the half-normals.'),
        cfg.FloatOpt('sigma_min', default=11.0, help='Smallest sigma of the family.'),
        cfg.FloatOpt('sigma_max', default=16.0, help='Largest sigma of the family.'),
        cfg.Opt('sigma_points', type=types.Integer(min=1), default=200,
            help='Number of evenly spaced sigma values.'),
        cfg.FloatOpt('uniform_lo', default=0.0, help='Lower end of the uniform support.'),
        cfg.FloatOpt('uniform_hi', default=1.0, help='Upper end of the uniform support.'),
        cfg.StrOpt('table_path', help='Two-column (price, cdf) file for kind=tabulated.'),
        cfg.FloatOpt('cap_sigmas', default=8.0, min=1.0,
            help='Upper support cap of the half-normals, in sigmas above mu.'),
        cfg.FloatOpt('ihr_grid_step', default=0.01, help='Grid step of the hazard-rate check.'),
        cfg.FloatOpt('oracle_tol', default=1e-8, help='Tolerance of the optimal price oracle.'),
        ]

market_opts = [
        cfg.Opt('n_buyers', type=types.Integer(min=1), default=100,
            help='Buyers arriving each period.'),
        ]

linear_opts = [
        cfg.FloatOpt('gain', default=1e-4, help='Constant gain a.'),
        cfg.FloatOpt('gain_ceiling', default=1.0, help='Largest admissible constant gain.'),
        cfg.StrOpt('gain_kind', default='constant', choices=['constant', 'decreasing'],
            help='Gain schedule: constant a or t^-omega.'),
        cfg.FloatOpt('omega', default=0.5, help='Exponent of the decreasing gain.'),
        cfg.FloatOpt('epsilon', default=0.75, help='Half-width of the price experiment.'),
        cfg.StrOpt('perturbation', default='uniform', choices=['uniform', 'binary'],
            help='Distribution of the price experiment.'),
        cfg.FloatOpt('q_min', default=0.01, help='Lowest quantity forecast in the inner box.'),
        cfg.FloatOpt('box_margin', default=0.1,
            help='Relative inflation of the inner box giving the outer box.'),
        cfg.FloatOpt('initial_beta0', help='Initial intercept (default: box reset point).'),
        cfg.FloatOpt('initial_beta1', help='Initial slope (default: box reset point).'),
        cfg.Opt('horizon', type=types.Integer(min=1), default=300000,
            help='Periods per episode.'),
        cfg.Opt('replications', type=types.Integer(min=1), default=1,
            help='Episodes averaged per sweep point.'),
        ]

baseline_opts = [
        cfg.ListOpt('reports_per_period', item_type=types.Integer(min=1),
            default=['2', '4', '6', '8', '10'], help='Valuation reports per period (K).'),
        cfg.FloatOpt('grid_fraction', default=1e-3,
            help='Price grid resolution as a fraction of the support width.'),
        ]

ode_opts = [
        cfg.FloatOpt('dt', default=1e-3, help='Integration step in clock time.'),
        cfg.FloatOpt('tau_end', default=20.0, help='Integration horizon in clock time.'),
        cfg.ListOpt('mu_grid', item_type=types.Float(),
            default=['0.1', '0.03', '0.01', '0.003', '0.001'],
            help='Accuracy levels of the tau(mu) table.'),
        cfg.FloatOpt('tau_safety', default=2.0, help='Safety factor applied to tau(mu).'),
        cfg.FloatOpt('c_tau', default=2.0,
            help='Constant of the -ln mu clock-time rule used when no ODE fit is available, '
                 'and of the decreasing-gain certification horizon.'),
        cfg.Opt('record_every', type=types.Integer(min=1), default=10,
            help='Write every n-th integration step to the trajectory files.'),
        ]

pac_opts = [
        cfg.FloatOpt('mu', help='Accuracy of the certificate.'),
        cfg.FloatOpt('lambda', help='Allowed failure probability.'),
        cfg.Opt('trials', type=types.Integer(min=1), help='Monte Carlo trials per curve.'),
        cfg.FloatOpt('radius_factor', default=4.0,
            help='Failure radius in units of mu (1.0 certifies the mu event itself).'),
        cfg.FloatOpt('confidence', default=0.95, help='Level of the binomial upper bound.'),
        cfg.BoolOpt('joint', default=False,
            help='Certify the joint (price, quantity) event instead of the price alone.'),
        cfg.Opt('max_curves', type=types.Integer(min=0), default=0,
            help='Certify at most this many evenly spaced curves (0: all).'),
        ]

stats_opts = [
        cfg.FloatOpt('bin_width', default=0.01, help='Histogram bin width.'),
        ]

check_opts = [
        cfg.FloatOpt('linear_mean_min', default=-0.05),
        cfg.FloatOpt('linear_mean_max', default=0.10),
        cfg.FloatOpt('linear_var_min', default=0.001),
        cfg.FloatOpt('linear_var_max', default=0.01),
        cfg.FloatOpt('cr_first_var_min', default=0.004),
        cfg.FloatOpt('cr_first_var_max', default=0.03),
        cfg.FloatOpt('cr_last_var_min', default=0.001),
        cfg.FloatOpt('cr_last_var_max', default=0.01),
        cfg.FloatOpt('min_variance_ratio', default=1.5),
        cfg.FloatOpt('min_r_squared', default=0.95),
        ]


def add_command_parsers(subparsers):
    run = subparsers.add_parser('run', help='Run the sweep. "run --config <path>" is read '
                                'as "--config-file <path> run".')
    run.add_argument('--out', help='Output directory (default: out_dir).')
    run.add_argument('--seed', type=int, dest='seed_override', help='Override the master seed.')
    run.add_argument('--workers', type=int, dest='workers_override', help='Override the worker count.')
    run.add_argument('--scale', type=float, default=1.0,
                     help='Multiply the sigma grid density.')
    run.add_argument('--trace', action='store_true', help='Write per-period traces.')
    run.add_argument('--pac', dest='pac_spec', help='Certify: mu=<f>,lambda=<f>,trials=<n>.')
    run.add_argument('--check', action='store_true', dest='check_mode',
                     help='Exit 2 when an acceptance check fails.')

    validate = subparsers.add_parser('validate', help='Check the family and the oracle.')
    validate.add_argument('--check', action='store_true', dest='check_mode',
                          help='Exit 2 when a curve fails.')

    ode = subparsers.add_parser('ode', help='Integrate the mean dynamics.')
    ode.add_argument('--out', help='Output directory (default: out_dir).')
    ode.add_argument('--check', action='store_true', dest='check_mode',
                     help='Exit 2 when a contraction check fails.')


command_opt = cfg.SubCommandOpt('command', title='Commands', handler=add_command_parsers,
                                help='Available commands')

CONF = cfg.ConfigOpts()
CONF.register_opts(opts)
CONF.register_cli_opt(command_opt)
CONF.register_opts(family_opts, group='family')
CONF.register_opts(market_opts, group='market')
CONF.register_opts(linear_opts, group='linear')
CONF.register_opts(baseline_opts, group='baseline')
CONF.register_opts(ode_opts, group='ode')
CONF.register_opts(pac_opts, group='pac')
CONF.register_opts(stats_opts, group='stats')
CONF.register_opts(check_opts, group='check')
