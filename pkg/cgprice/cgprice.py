#!/usr/bin/env python
"""
Main programm
"""
import os
import sys

from oslo_config import cfg

from .cfg import CONF
from .utils import get_logger
from .core import harness
from .core import results
from .core.demand import InputError, OracleFailure
from .core.stats import summarize
from .core.ode import ContractionFailure

loglevel = os.environ.get('CGPRICE_LOG_LEVEL', 'info')
logger = get_logger('cgprice', logfile=os.environ.get('CGPRICE_LOG', 'STDOUT'), loglevel=loglevel)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CHECK = 2


def _out_dir():
    return CONF.command.out or CONF.out_dir


def _pac_settings():
    pac = CONF.pac
    defaults = {'mu': pac.mu, 'lambda': pac['lambda'], 'trials': pac.trials,
                'radius_factor': pac.radius_factor, 'confidence': pac.confidence,
                'joint': pac.joint, 'max_curves': pac.max_curves}
    if CONF.command.pac_spec:
        return harness.PacSettings.parse(CONF.command.pac_spec, defaults)
    if pac.mu is not None or pac['lambda'] is not None or pac.trials is not None:
        return harness.PacSettings.parse('', defaults)
    return None


def _write_traces(out_dir, records):
    trace_dir = os.path.join(out_dir, 'traces')
    results.ensure_dir(trace_dir)
    for record in records:
        for name, (fields, rows) in sorted(record.traces.items()):
            results.write_csv(os.path.join(trace_dir, '%s_%d.csv' % (name, record.index)),
                              fields, rows)


def run_command(config):
    cmd = CONF.command
    if cmd.seed_override is not None:
        config = config.replace(seed=cmd.seed_override)
    if cmd.scale != 1.0:
        config = config.scaled(cmd.scale)
    workers = cmd.workers_override or CONF.workers
    settings = _pac_settings()
    sweep = harness.run_sweep(config, workers=workers, trace=cmd.trace)
    if not sweep.records:
        logger.error('every sweep point was skipped; nothing to summarize')
        return EXIT_CONFIG
    stats = sweep.summarize(config.bin_width)
    certificates = []
    if settings is not None:
        curves = [curve for _, curve in config.family.curves()]
        certificates.append(harness.pac_certify(curves, config, settings, workers=workers))
    out_dir = _out_dir()
    quantity = summarize(sweep.errors('linear_quantity'), config.bin_width)
    results.emit_results(sweep.records, stats, certificates, out_dir, config=config.to_dict(),
                         seed=config.seed,
                         extra={'comp': sweep.comp(), 'quantity_error': quantity.to_dict(),
                                'skipped': [s.to_dict() for s in sweep.skipped]})
    if cmd.trace:
        _write_traces(out_dir, sweep.records)
    for name in sorted(stats):
        logger.info('%-8s %s' % (name, stats[name]))
    if cmd.check_mode and harness.check_acceptance(stats, harness.CheckBounds.from_conf(CONF),
                                              certificates):
        return EXIT_CHECK
    return EXIT_OK


def validate_command(config):
    failed = 0
    checked = harness.validate_family(config)
    for param, curve, report, point, error in checked:
        if error is not None:
            failed += 1
            logger.warning('%s: %s' % (curve, error))
        else:
            logger.info('%s: eta=%.5f b*=%.6f q*=%.6f' % (
                        curve, report.lipschitz_estimate, point.b_star, point.q_star))
    logger.info('%d curve(s) checked, %d failed' % (len(checked), failed))
    if CONF.command.check_mode and failed:
        return EXIT_CHECK
    return EXIT_OK


def ode_command(config):
    reports = harness.run_ode(config)
    results.emit_ode(reports, _out_dir(), every=config.record_every)
    for r in reports:
        logger.info('%s: %s' % (r.curve, r.estimate))
    if CONF.command.check_mode and harness.check_contraction(reports,
                                                        harness.CheckBounds.from_conf(CONF)):
        return EXIT_CHECK
    return EXIT_OK


def hoist_config(argv):
    """Read `<command> --config <path>` as `--config-file <path> <command>`."""
    hoisted, rest = [], []
    args = iter(argv)
    for arg in args:
        if arg == '--config':
            hoisted += ['--config-file', next(args, '')]
        elif arg.startswith('--config='):
            hoisted += ['--config-file', arg.split('=', 1)[1]]
        else:
            rest.append(arg)
    return hoisted + rest


COMMANDS = {
        'run': run_command,
        'validate': validate_command,
        'ode': ode_command,
        }


def main(argv=None):
    try:
        CONF(hoist_config(sys.argv[1:] if argv is None else argv), project='cgprice',
             default_config_files=[])
    except cfg.Error as e:
        logger.error('configuration error: %s' % e)
        return EXIT_CONFIG
    except SystemExit as e:
        # argparse exits 2 on a bad command line, 0 on --help
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        config = harness.SweepConfig.from_conf(CONF)
        logger.info('cgprice %s: seed %d' % (CONF.command.name, config.seed))
        return COMMANDS[CONF.command.name](config)
    except (cfg.Error, harness.ConfigError) as e:
        logger.error('configuration error: %s' % e)
        return EXIT_CONFIG
    except (InputError, OracleFailure, ContractionFailure, results.ResultsError) as e:
        logger.error('%s: %s' % (e.__class__.__name__, e))
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
