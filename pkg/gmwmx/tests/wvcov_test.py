"""
Tests to confirm the covariance of the empirical wavelet variance: the
coefficient lag functions, the stationary and non-stationary recursions and
the trace oracle.

When naming test cases the following format should be used.
test_<Class>_<Description>
"""

import unittest

import numpy as np

from gmwmx import noise, wavelet, wv_cov
from gmwmx.errors import CapExceeded, FactorizationFailure
from gmwmx.tests import common_testing


class LagFunctionCase(common_testing.DefaultCase):

    def test_coeff_autocov_FirstScale(self):
        """White noise: f_1(0) = 1/2, f_1(+-1) = -1/4, zero beyond"""
        summary = noise.autocovariance(noise.NoiseModel.parse('wn(1)'), 16)
        f = wv_cov.coeff_autocov(summary, 2, 3)
        self.assertClose(f[0], [0.0, 0.0, -0.25, 0.5, -0.25, 0.0, 0.0], atol=1e-15)

    def test_coeff_autocov_SecondScale(self):
        """White noise: f_2(0) = sum of squared taps = 1/4"""
        summary = noise.autocovariance(noise.NoiseModel.parse('wn(1)'), 16)
        f = wv_cov.coeff_autocov(summary, 2, 0)
        self.assertAlmostEqual(f[1][0], 0.25, 14)

    def test_coeff_autocov_Symmetric(self):
        """f_j(h) = f_j(-h)"""
        summary = noise.autocovariance(noise.NoiseModel.parse('pl(2,0.7)'), 128)
        for f in wv_cov.coeff_autocov(summary, 5, 40):
            self.assertClose(f, f[::-1], rtol=1e-12)

    def test_coeff_autocov_MatchesFilters(self):
        """f_j(h) = sum_a sum_b g_a g_b rho(h + b - a) for the scale-j taps g"""
        model = noise.NoiseModel.parse('wn(1)+pl(3,0.6)')
        rho = noise.autocovariance(model, 64).seq
        f = wv_cov.coeff_autocov(noise.autocovariance(model, 64), 3, 5)
        for j in range(1, 4):
            g = wavelet.haar_filter(j).taps
            for h in range(-5, 6):
                expected = sum(g[a] * g[b] * rho[abs(h + b - a)]
                               for a in range(len(g)) for b in range(len(g)))
                self.assertAlmostEqual(f[j - 1][h + 5], expected, 12)


class StationaryCase(common_testing.DefaultCase):

    def test_wv_cov_trace_FiveEpochs(self):
        """Unit white noise with M_1 = 4 gives Var(nu_1) = 0.171875"""
        V = wv_cov.wv_cov_trace(noise.NoiseModel.parse('wn(1)'), 5, 1).V
        self.assertAlmostEqual(V[0, 0], 0.171875, 14)

    def test_wv_cov_recursive_stationary_FiveEpochs(self):
        """The recursion reproduces the five-epoch example"""
        summary = noise.autocovariance(noise.NoiseModel.parse('wn(1)'), 5)
        V = wv_cov.wv_cov_recursive_stationary(summary, 5, 1).V
        self.assertAlmostEqual(V[0, 0], 0.171875, 14)

    def test_wv_cov_recursive_stationary_MatchesTrace(self):
        """Recursion and trace oracle agree for stationary models"""
        cases = (('wn(10)+pl(6,0.5)', 128, 6), ('wn(10)+pl(6,0.5)', 512, 6),
                 ('wn(20)+matern(8,0.05,1.1)', 128, 5), ('pl(6,0.9)', 256, 6))
        for text, n, J in cases:
            model = noise.NoiseModel.parse(text)
            fast = wv_cov.wv_cov_recursive_stationary(noise.autocovariance(model, n), n, J)
            trace = wv_cov.wv_cov_trace(model, n, J)
            self.assertEqual(fast.method, wv_cov.CovMethod.RECURSIVE_STATIONARY)
            self.assertClose(fast.V, trace.V, rtol=1e-8, message='{0} n={1}'.format(text, n))

    def test_wv_cov_recursive_stationary_PSD(self):
        """V is symmetric positive semi-definite"""
        model = noise.NoiseModel.parse('wn(10)+pl(6,0.9)')
        V = wv_cov.wv_cov(model, 1024, 8).V
        self.assertSymmetricPSD(V)

    def test_wv_cov_recursive_stationary_LengthScaling(self):
        """Doubling n roughly halves Var(nu_1) for white noise"""
        model = noise.NoiseModel.parse('wn(1)')
        short = wv_cov.wv_cov(model, 1024, 1).V[0, 0]
        long = wv_cov.wv_cov(model, 2048, 1).V[0, 0]
        self.assertTrue(0.48 <= long / short <= 0.52)

    def test_wv_cov_recursive_stationary_MonteCarlo(self):
        """V matches the sample covariance of WV estimates over replicates"""
        n, J, reps = 64, 3, 20000
        model = noise.NoiseModel.parse('wn(1)')
        x = np.random.default_rng(21).standard_normal((reps, n))
        nu = np.array([wavelet.empirical_wv(row, J).nu_hat for row in x])
        V = wv_cov.wv_cov(model, n, J).V
        self.assertClose(np.diag(np.cov(nu, rowvar=False)), np.diag(V), rtol=0.06)


class NonStationaryCase(common_testing.DefaultCase):

    def test_wv_cov_recursive_nonstationary_MatchesTrace(self):
        """The matrix recursion equals the trace oracle for flicker noise"""
        for text, n, J in (('fl(1)', 256, 5), ('wn(50)+fl(10)', 128, 5)):
            model = noise.NoiseModel.parse(text)
            rec = wv_cov.wv_cov_recursive_nonstationary(model, n, J)
            self.assertEqual(rec.method, wv_cov.CovMethod.RECURSIVE_NONSTATIONARY)
            self.assertClose(rec.V, wv_cov.wv_cov_trace(model, n, J).V, rtol=1e-6, message=text)

    def test_wv_cov_recursive_nonstationary_StationaryInput(self):
        """On a stationary model the matrix path equals the stationary recursion"""
        model = noise.NoiseModel.parse('wn(10)+pl(6,0.5)')
        n, J = 128, 5
        rec = wv_cov.wv_cov_recursive_nonstationary(model, n, J, exact=True)
        stat = wv_cov.wv_cov_recursive_stationary(noise.autocovariance(model, n), n, J)
        self.assertClose(rec.V, stat.V, rtol=1e-8)

    def test_wv_cov_recursive_nonstationary_Cap(self):
        """Forcing the matrix path above the cap fails; the default falls back"""
        model = noise.NoiseModel.parse('wn(50)+fl(10)')
        with self.assertRaises(CapExceeded):
            wv_cov.wv_cov_recursive_nonstationary(model, 300, 3, cap=256, exact=True)
        approx = wv_cov.wv_cov_recursive_nonstationary(model, 300, 3, cap=256)
        self.assertEqual(approx.method, wv_cov.CovMethod.APPROXIMATE_NONSTATIONARY)
        self.assertTrue(np.all(approx.variances > 0.0))

    def test_wv_cov_Dispatch(self):
        """wv_cov picks the recursion matching the model"""
        self.assertEqual(wv_cov.wv_cov(noise.NoiseModel.parse('wn+pl'), 64, 3).method,
                         wv_cov.CovMethod.RECURSIVE_STATIONARY)
        self.assertEqual(wv_cov.wv_cov(noise.NoiseModel.parse('wn+fl'), 64, 3).method,
                         wv_cov.CovMethod.RECURSIVE_NONSTATIONARY)


class InverseCase(common_testing.DefaultCase):

    def test_WvCovariance_Inverse(self):
        """The ridge-free inverse of a diagonal matrix is its reciprocal"""
        cov = wv_cov.WvCovariance(np.diag([1.0, 4.0]), wv_cov.CovMethod.TRACE_ORACLE)
        self.assertClose(cov.inverse(0.0), np.diag([1.0, 0.25]), rtol=1e-12)

    def test_WvCovariance_Singular(self):
        """An indefinite matrix cannot be inverted"""
        cov = wv_cov.WvCovariance(np.array([[1.0, 2.0], [2.0, 1.0]]),
                                  wv_cov.CovMethod.TRACE_ORACLE)
        with self.assertRaises(FactorizationFailure):
            cov.inverse(0.0)


@common_testing.slow
class MonteCarloCase(common_testing.DefaultCase):

    def assertCovarianceMatches(self, nu, V, entries, k):
        centred = nu - nu.mean(axis=0)
        reps = len(nu)
        for i, j in entries:
            products = centred[:, i] * centred[:, j]
            se = products.std(ddof=1) / np.sqrt(reps)
            self.assertWithinSE(products.sum() / (reps - 1), V[i, j], se, k=k)

    def test_wv_cov_StationaryMonteCarlo(self):
        """Every entry of V matches the replicate covariance at n = 512"""
        n, J, reps = 512, 5, 4000
        model = noise.NoiseModel.parse('wn(10)+pl(6,0.5)')
        rng = np.random.default_rng(22)
        nu = np.array([wavelet.empirical_wv(noise.simulate(model, n, rng), J).nu_hat
                       for _ in range(reps)])
        V = wv_cov.wv_cov(model, n, J).V
        entries = [(i, j) for i in range(J) for j in range(i, J)]
        self.assertCovarianceMatches(nu, V, entries, k=4)

    def test_wv_cov_FlickerMonteCarlo(self):
        """cov(nu_1, nu_2) of flicker noise matches replicates at n = 256"""
        n, J, reps = 256, 4, 4000
        model = noise.NoiseModel.parse('fl(1)')
        rng = np.random.default_rng(23)
        nu = np.array([wavelet.empirical_wv(noise.simulate(model, n, rng), J).nu_hat
                       for _ in range(reps)])
        V = wv_cov.wv_cov(model, n, J).V
        self.assertCovarianceMatches(nu, V, [(0, 0), (0, 1), (1, 1)], k=3)


if __name__ == '__main__':
    unittest.main()
