"""
Flat-file persistence of sweep results.

Everything is written with fixed column order, sorted JSON keys and repr()
formatted floats, so a rerun with the same configuration and seed
reproduces every file byte for byte.
"""
import csv
import json
import logging
import os

from .stats import ErrorStats

logger = logging.getLogger('cgprice.results')

SWEEP_FILE = 'sweep.csv'
SUMMARY_FILE = 'summary.json'
PAC_FILE = 'pac.json'
CONTRACTION_FILE = 'contraction.json'


class ResultsError(IOError):
    pass


def _fmt(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def ensure_dir(out_path):
    try:
        os.makedirs(out_path, exist_ok=True)
    except OSError as e:
        raise ResultsError('cannot create output directory %s: %s' % (out_path, e))


def write_csv(path, fields, rows):
    try:
        with open(path, 'w', newline='') as f:
            w = csv.writer(f, lineterminator='\n')
            w.writerow(fields)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as e:
        raise ResultsError('cannot write %s: %s' % (path, e))
    return path


def write_json(path, obj):
    try:
        with open(path, 'w') as f:
            json.dump(obj, f, sort_keys=True, indent=2)
            f.write('\n')
    except OSError as e:
        raise ResultsError('cannot write %s: %s' % (path, e))
    return path


def histogram_file(learner):
    return 'histogram_%s.csv' % learner


def emit_results(records, stats, certificates, out_path, fields=None, config=None, seed=None,
                 extra=None):
    """Write sweep.csv, summary.json, one histogram_<learner>.csv per entry
    of `stats` and, only when certificates is non-empty, pac.json.

    records: sequence of rows (each a sequence matching `fields`, or an
    object with row() / FIELDS). Returns the list of written paths.
    """
    ensure_dir(out_path)
    written = []
    records = list(records)
    if fields is None:
        fields = records[0].fields() if records else ()
    rows = [r.row() if hasattr(r, 'row') else r for r in records]
    written.append(write_csv(os.path.join(out_path, SWEEP_FILE), fields, rows))

    summary = {'seed': seed, 'config': config or {},
               'stats': dict((name, s.to_dict()) for name, s in stats.items())}
    if extra:
        summary.update(extra)
    written.append(write_json(os.path.join(out_path, SUMMARY_FILE), summary))

    for name in sorted(stats):
        written.append(write_csv(os.path.join(out_path, histogram_file(name)),
                                 ('bin_center', 'count'), stats[name].histogram))
    if certificates:
        written.append(write_json(os.path.join(out_path, PAC_FILE),
                                  [c.to_dict() for c in certificates]))
    logger.info('wrote %s' % ', '.join(os.path.basename(p) for p in written))
    return written


def read_summary(path):
    """Load summary.json; the 'stats' entries come back as ErrorStats."""
    try:
        with open(path) as f:
            summary = json.load(f)
    except (OSError, ValueError) as e:
        raise ResultsError('cannot read %s: %s' % (path, e))
    summary['stats'] = dict((name, ErrorStats.from_dict(d))
                            for name, d in summary.get('stats', {}).items())
    return summary


def read_sweep(path):
    try:
        with open(path, newline='') as f:
            return list(csv.DictReader(f))
    except OSError as e:
        raise ResultsError('cannot read %s: %s' % (path, e))


def emit_ode(reports, out_path, every=1):
    """One ode_<index>.csv per curve (all integrated paths, tagged by
    path number) and contraction.json with every estimate."""
    ensure_dir(out_path)
    written = []
    for report in reports:
        rows = []
        for j, trajectory in enumerate(report.trajectories):
            rows.extend((j,) + tuple(row) for row in trajectory.rows(every))
        written.append(write_csv(os.path.join(out_path, 'ode_%d.csv' % report.index),
                                 ('path', 'tau', 'beta0', 'beta1', 'b'), rows))
    written.append(write_json(os.path.join(out_path, CONTRACTION_FILE),
                              [r.to_dict() for r in reports]))
    logger.info('wrote %d ODE file(s) to %s' % (len(written), out_path))
    return written
