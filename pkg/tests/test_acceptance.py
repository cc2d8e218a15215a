"""
Long-running reproduction checks, enabled with CGPRICE_ACCEPTANCE=1.
"""
import os
import unittest

from cgprice import utils
from cgprice.core import demand
from cgprice.core import harness
from cgprice.core import linear_learner as ll
from cgprice.core import ode
from cgprice.core.harness import FamilySpec, SweepConfig, PacSettings, CheckBounds

from .utils import acceptance_enabled

WORKERS = os.cpu_count() or 1


def _uniform_episode(seed):
    curve = demand.Uniform(0.0, 1.0)
    result = ll.run_episode(curve, ll.ConstantGain(0.001), ll.PerturbationSpec('uniform', 0.05),
                            ll.BeliefBox.from_support(0.0, 1.0), 100, 200000,
                            utils.make_rng(seed, utils.STREAM_LINEAR))
    return result.forecast.price


@unittest.skipUnless(acceptance_enabled(), 'set CGPRICE_ACCEPTANCE=1 to run')
class AcceptanceTest(unittest.TestCase):

    def test_correctly_specified_convergence(self):
        prices = list(harness._map(_uniform_episode, list(range(100)), WORKERS))
        close = sum(1 for p in prices if abs(p - 0.5) <= 0.05)
        self.assertGreaterEqual(close, 95)

    def test_scaled_sweep(self):
        config = SweepConfig(family=FamilySpec(sigma_points=200))
        sweep = harness.run_sweep(config, workers=WORKERS)
        self.assertEqual(len(sweep.records), 200)
        stats = sweep.summarize(config.bin_width)
        self.assertEqual(harness.check_acceptance(stats, CheckBounds()), [])

    def test_ode_agreement(self):
        comparison = ode.compare_ensemble(demand.Uniform(0.0, 1.0), ll.ConstantGain(0.001),
                                          ll.PerturbationSpec('uniform', 0.05),
                                          ll.BeliefBox.from_support(0.0, 1.0), 100, 200, 5.0,
                                          workers=WORKERS)
        self.assertLessEqual(comparison.sup_deviation, 0.05)
        self.assertEqual(comparison.projections, 0)

    def test_contraction_scaling(self):
        for curve in (demand.Uniform(0.0, 1.0), demand.TruncatedGaussian(10.0, 11.0)):
            estimate = ode.estimate_contraction(curve)
            self.assertGreater(estimate.c_hat, 0.0)
            self.assertGreaterEqual(estimate.r_squared, 0.95)

    def test_pac_certification(self):
        config = SweepConfig(family=FamilySpec(kind='uniform'), gain=0.001, epsilon=0.05)
        cert = harness.pac_certify(demand.Uniform(0.0, 1.0), config, PacSettings(0.05, 0.1, 1000),
                                   workers=WORKERS)
        self.assertLessEqual(cert.empirical_failure_rate, 0.1)
        rates = cert.failure_rates
        marks = sorted(rates)
        self.assertGreater(rates[marks[0]], rates[marks[-1]])
        self.assertGreater(cert.rho_hat, 0.0)


if __name__ == '__main__':
    unittest.main()
