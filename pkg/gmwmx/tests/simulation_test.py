"""
Tests to confirm the Monte Carlo harness: presets, replicate streams,
coverage and metric aggregation.

When naming test cases the following format should be used.
test_<Class>_<Description>
"""

import types
import unittest
import warnings

import numpy as np

from gmwmx import missingness as mm
from gmwmx import noise, simulation
from gmwmx.config import FitConfig
from gmwmx.errors import UnknownSetting
from gmwmx.tests import common_testing


def _interval(low, high, p=1):
    return types.SimpleNamespace(ci=np.tile([low, high], (p, 1)))


class PresetCase(common_testing.DefaultCase):

    def test_preset_Defaults(self):
        """A1 defaults to ten years at 90% observed"""
        spec = simulation.preset('a1')
        self.assertEqual(spec.n, 3650)
        self.assertEqual(spec.missingness, mm.TABLE_SETTINGS[2])
        self.assertEqual(str(spec.noise), 'wn(10.0)+pl(6.0,0.9)')
        self.assertEqual(spec.name, 'A1-n3650-m2')
        self.assertEqual(str(spec.template), 'wn(1.0)+pl(1.0,0.5)')

    def test_preset_Unknown(self):
        """Unknown presets raise UnknownSetting"""
        with self.assertRaises(UnknownSetting):
            simulation.preset('Z9')

    def test_preset_grid_Sizes(self):
        """Length presets vary n, missingness presets vary the chain"""
        lengths = simulation.preset_grid('B1', reps=10)
        self.assertEqual([s.n for s in lengths], [3650, 7300, 10950, 14600])
        chains = simulation.preset_grid('C2', reps=10)
        self.assertEqual(len(chains), 6)
        self.assertEqual([round(s.missingness.mu, 6) for s in chains],
                         [1.0, 0.9, 0.8, 0.7, 0.6, 0.5])

    def test_SettingSpec_Validation(self):
        """Short series and mis-sized coefficient vectors are refused"""
        model = noise.NoiseModel.parse('wn(1)')
        with self.assertRaises(ValueError):
            simulation.SettingSpec('x', model, mm.NO_MISSING, n=4)
        with self.assertRaises(ValueError):
            simulation.SettingSpec('x', model, mm.NO_MISSING, n=100, beta=[1.0, 2.0])


class ReplicateCase(common_testing.DefaultCase):

    def test_simulate_replicate_Deterministic(self):
        """A replicate depends only on the seed and its index"""
        spec = simulation.preset('B1', n=400, seed=3)
        a = simulation.simulate_replicate(spec, 5)
        b = simulation.simulate_replicate(spec, 5)
        c = simulation.simulate_replicate(spec, 6)
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.mask, b.mask)
        self.assertFalse(np.array_equal(a.values, c.values))

    def test_simulate_replicate_Gaps(self):
        """Missing epochs hold zeros"""
        spec = simulation.preset('C2', n=500, missing=6)
        ts = simulation.simulate_replicate(spec, 0)
        self.assertTrue(np.all(ts.values[ts.mask == 0] == 0.0))
        self.assertLess(abs(ts.observed_fraction - 0.5), 0.15)


class CoverageCase(common_testing.DefaultCase):

    def test_coverage_Trivial(self):
        """Unbounded intervals always cover, point intervals away from the truth never do"""
        rates, _ = simulation.coverage([0.0], [_interval(-np.inf, np.inf)] * 10)
        self.assertEqual(rates[0], 1.0)
        rates, _ = simulation.coverage([0.0], [_interval(1.0, 1.0)] * 10)
        self.assertEqual(rates[0], 0.0)

    def test_coverage_Bernoulli(self):
        """Intervals covering with probability 0.9 give a rate near 0.9"""
        hits = np.random.default_rng(14).random(10000) < 0.9
        fits = [_interval(-1.0, 1.0) if h else _interval(1.0, 2.0) for h in hits]
        rates, se = simulation.coverage([0.0], fits)
        self.assertLess(abs(rates[0] - 0.9), 0.01)
        self.assertAlmostEqual(se[0], np.sqrt(0.95 * 0.05 / 10000), 12)

    def test_coverage_Empty(self):
        """At least one fit is needed"""
        with self.assertRaises(ValueError):
            simulation.coverage([0.0], [])


class SummaryCase(common_testing.DefaultCase):

    def test_summarize_RmseIdentity(self):
        """rmse^2 = bias^2 + variance for every parameter"""
        spec = simulation.preset('A1', n=400, reps=50)
        rng = np.random.default_rng(15)
        outcomes = []
        for i in range(50):
            beta = spec.beta + rng.standard_normal(6)
            outcomes.append(simulation.ReplicateOutcome(
                i, beta, np.ones(6), np.column_stack([beta - 2.0, beta + 2.0]),
                spec.noise.vector + rng.standard_normal(3), 0.1))
        outcomes.append(simulation.ReplicateOutcome(50, error='NonConvergence: test'))
        report = simulation.summarize(spec, outcomes)
        table = report.table
        self.assertEqual(len(table), 9)
        self.assertClose(table['rmse'] ** 2, table['bias2'] + table['variance'], rtol=1e-10)
        self.assertEqual(report.replicates, 51)
        self.assertEqual(report.failures, 1)
        self.assertTrue(np.all(np.isnan(table['coverage'][6:])))
        self.assertTrue(np.all(table['coverage'][:6] > 0.5))

    def test_summarize_AllFailed(self):
        """Without successful replicates every metric is NaN"""
        spec = simulation.preset('A1', n=400, reps=2)
        outcomes = [simulation.ReplicateOutcome(i, error='DataError: x') for i in range(2)]
        report = simulation.summarize(spec, outcomes)
        self.assertTrue(np.all(np.isnan(report.table['rmse'])))
        self.assertEqual(report.failures, 2)


class RunCase(common_testing.DefaultCase):

    def test_run_setting_ZeroNoise(self):
        """With zero noise estimates are exact and coverage is undefined"""
        spec = simulation.SettingSpec('zero', noise.NoiseModel.parse('wn(0)'),
                                      mm.NO_MISSING, n=256, reps=3)
        report = simulation.run_setting(spec, FitConfig(n_starts=2), n_jobs=1)
        self.assertEqual(report.failures, 0)
        self.assertTrue(np.all(report.table['rmse'] == 0.0))
        self.assertTrue(np.all(np.isnan(report.table['coverage'])))

    def test_run_setting_ZeroMatern(self):
        """Zero-variance Matern noise also yields exact trajectory estimates"""
        model = noise.NoiseModel.parse('wn(0)+matern(0,0.05,1.1)')
        spec = simulation.SettingSpec('zero-matern', model, mm.NO_MISSING, n=256, reps=2)
        report = simulation.run_setting(spec, FitConfig(n_starts=2), n_jobs=1)
        self.assertEqual(report.failures, 0)
        table = report.table
        self.assertTrue(np.all(table['rmse'][:8] == 0.0))
        self.assertTrue(np.all(np.isnan(table['coverage'])))

    def test_run_grid_Small(self):
        """A short run of setting A fits every replicate and stacks the tables"""
        specs = [simulation.preset('A1', n=730, reps=3, seed=1),
                 simulation.preset('A2', n=730, missing=4, reps=3, seed=1)]
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', RuntimeWarning)
            reports, table = simulation.run_grid(specs, FitConfig(n_starts=2), n_jobs=1)
        self.assertEqual([r.failures for r in reports], [0, 0])
        self.assertEqual(len(table), 18)
        self.assertEqual(list(table.columns[:3]), ['setting', 'n', 'p_observed'])
        self.assertTrue(np.all(table['variance'] >= 0.0))
        self.assertIn('metrics', reports[0].to_dict())


@common_testing.slow
class BenchmarkCase(common_testing.DefaultCase):

    def assertTrendCoverage(self, spec, low, high):
        report = simulation.run_setting(spec, FitConfig())
        self.assertEqual(report.failures, 0)
        row = report.table.set_index('parameter').loc['trend']
        self.assertGreaterEqual(row['coverage'], low)
        self.assertLessEqual(row['coverage'], high)

    def test_run_setting_SettingACoverage(self):
        """Trend coverage in setting A at 80% observed stays inside [0.92, 0.975]"""
        self.assertTrendCoverage(simulation.preset('A1', n=3650, missing=3, reps=500, seed=1),
                                 0.92, 0.975)

    def test_run_setting_SettingBCoverage(self):
        """Trend coverage in setting B stays inside [0.91, 0.98]"""
        self.assertTrendCoverage(simulation.preset('B1', reps=500, seed=2), 0.91, 0.98)

    def test_run_setting_SettingCCoverage(self):
        """Trend coverage in setting C stays inside [0.91, 0.98]"""
        self.assertTrendCoverage(simulation.preset('C1', reps=500, seed=3), 0.91, 0.98)

    def test_run_replicate_RuntimeScaling(self):
        """Fit time grows slower than n^2 and stays under a minute at 40 years"""
        lengths = [1825, 3650, 7300, 14600]
        config = FitConfig()
        times = []
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', RuntimeWarning)
            for n in lengths:
                spec = simulation.preset('A1', n=n, reps=3, seed=4)
                outcomes = [simulation.run_replicate(spec, config, i) for i in range(3)]
                self.assertTrue(all(o.ok for o in outcomes))
                times.append(np.mean([o.runtime for o in outcomes]))
        slope = np.polyfit(np.log(lengths), np.log(times), 1)[0]
        self.assertLess(slope, 2.0)
        self.assertLess(times[-1], 60.0)


if __name__ == '__main__':
    unittest.main()
