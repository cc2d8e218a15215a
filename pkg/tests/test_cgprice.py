import json
import os
import subprocess
import sys
import tempfile
import unittest

from cgprice.cgprice import hoist_config

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

SMALL_RUN = """
[DEFAULT]
seed = 5

[family]
kind = uniform
uniform_lo = %(lo)s
uniform_hi = %(hi)s

[linear]
horizon = 50
gain = %(gain)s
epsilon = 0.25

[baseline]
reports_per_period = 2,4
grid_fraction = 0.01

[ode]
dt = 0.01
tau_end = 15
"""


class CgpriceCommandTestBase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.tmp.name, 'out')

    def tearDown(self):
        self.tmp.cleanup()

    def write_conf(self, lo=0.0, hi=1.0, gain=0.01):
        path = os.path.join(self.tmp.name, 'cgprice.conf')
        with open(path, 'w') as f:
            f.write(SMALL_RUN % dict(lo=lo, hi=hi, gain=gain))
        return path

    def cgprice(self, *args, **conf):
        return self.cgprice_argv(['--config-file', self.write_conf(**conf)] + list(args))

    def cgprice_argv(self, argv):
        env = dict(os.environ, CGPRICE_LOG_LEVEL='warning')
        proc = subprocess.run([sys.executable, '-m', 'cgprice'] + argv,
                              cwd=ROOT, env=env, stdout=subprocess.PIPE, stderr=subprocess.PIPE,
                              timeout=300)
        return proc.returncode


class RunCommandTest(CgpriceCommandTestBase):

    def test_run(self):
        self.assertEqual(self.cgprice('run', '--out', self.out), 0)
        for name in ('sweep.csv', 'summary.json', 'histogram_linear.csv', 'histogram_cr_k2.csv'):
            self.assertTrue(os.path.exists(os.path.join(self.out, name)), name)
        self.assertFalse(os.path.exists(os.path.join(self.out, 'pac.json')))
        with open(os.path.join(self.out, 'summary.json')) as f:
            summary = json.load(f)
        self.assertEqual(summary['seed'], 5)
        self.assertEqual(summary['comp']['linear'], 4)

    def test_seed_override_and_trace(self):
        self.assertEqual(self.cgprice('run', '--out', self.out, '--seed', '9', '--trace'), 0)
        with open(os.path.join(self.out, 'summary.json')) as f:
            self.assertEqual(json.load(f)['seed'], 9)
        self.assertTrue(os.path.exists(os.path.join(self.out, 'traces', 'linear_0.csv')))

    def test_pac(self):
        code = self.cgprice('run', '--out', self.out, '--pac', 'mu=0.05,lambda=0.5,trials=5')
        self.assertEqual(code, 0)
        with open(os.path.join(self.out, 'pac.json')) as f:
            certs = json.load(f)
        self.assertEqual(certs[0]['n_trials'], 5)

    def test_check_failure(self):
        # one sweep point has zero error variance, outside the accepted range
        self.assertEqual(self.cgprice('run', '--out', self.out, '--check'), 2)

    def test_config_after_command(self):
        code = self.cgprice_argv(['run', '--config', self.write_conf(), '--out', self.out])
        self.assertEqual(code, 0)
        with open(os.path.join(self.out, 'summary.json')) as f:
            self.assertEqual(json.load(f)['seed'], 5)

    def test_config_errors(self):
        self.assertEqual(self.cgprice('run', '--out', self.out, gain=5.0), 1)
        self.assertEqual(self.cgprice('run', '--out', self.out, '--pac', 'mu=x'), 1)
        self.assertEqual(self.cgprice('frobnicate'), 1)


class HoistConfigTest(unittest.TestCase):

    def test_hoist(self):
        self.assertEqual(hoist_config(['run', '--config', 'a.conf', '--check']),
                         ['--config-file', 'a.conf', 'run', '--check'])
        self.assertEqual(hoist_config(['validate', '--config=b.conf']),
                         ['--config-file', 'b.conf', 'validate'])
        argv = ['--config-file', 'c.conf', 'ode']
        self.assertEqual(hoist_config(argv), argv)


class ValidateCommandTest(CgpriceCommandTestBase):

    def test_validate(self):
        self.assertEqual(self.cgprice('validate', '--check'), 0)

    def test_no_interior_optimum(self):
        self.assertEqual(self.cgprice('validate', lo=2.0, hi=3.0), 0)
        self.assertEqual(self.cgprice('validate', '--check', lo=2.0, hi=3.0), 2)


class OdeCommandTest(CgpriceCommandTestBase):

    def test_ode(self):
        self.assertEqual(self.cgprice('ode', '--out', self.out, '--check'), 0)
        with open(os.path.join(self.out, 'contraction.json')) as f:
            estimates = json.load(f)
        self.assertGreater(estimates[0]['c_hat'], 0.0)
        self.assertTrue(os.path.exists(os.path.join(self.out, 'ode_0.csv')))


if __name__ == '__main__':
    unittest.main()
