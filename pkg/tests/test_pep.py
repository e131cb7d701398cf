import numpy as np
import pytest

from noncohlab.model import (
    Alphabet,
    ChannelModel,
    ConditionalCovariance,
    ModelError,
    NoiseModel,
    PowerConfig,
    SystemDims,
)
from noncohlab.pep import (
    error_prob_bounds,
    pep_monte_carlo,
    pep_quadform,
    symbol_error_monte_carlo,
    wilson_interval,
)


def cov(A):
    return ConditionalCovariance.from_matrix(np.asarray(A, dtype=complex))


def random_cov(rng, n, jitter=0.3):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return cov(A @ A.conj().T / n + jitter * np.eye(n))


class TestMonteCarlo:
    def test_identical_covariances_give_one(self):
        c = cov(np.eye(3) * 1.7)
        est = pep_monte_carlo(c, c, 1000, 0)
        assert est.value == 1.0
        assert est.method == "monte-carlo"

    def test_scalar_closed_form(self):
        # P(|y|^2 (1 - 1/2) <= ln 2), y ~ CN(0,2): exactly 1 - e^{-ln 2} = 1/2
        est = pep_monte_carlo(cov([[2.0]]), cov([[1.0]]), 10**5, 3)
        assert abs(est.value - 0.5) < est.ci95

    def test_cross_method_agreement(self):
        rng = np.random.default_rng(5)
        a, b = random_cov(rng, 4), random_cov(rng, 4)
        mc = pep_monte_carlo(a, b, 10**5, 1)
        qf = pep_quadform(a, b, tol=1e-6)
        assert abs(mc.value - qf.value) <= mc.ci95 + qf.ci95

    def test_trials_validated(self):
        with pytest.raises(ModelError):
            pep_monte_carlo(cov(np.eye(1)), cov(np.eye(1)), 0, 0)


class TestQuadform:
    def test_identical_covariances_give_one(self):
        c = cov(np.diag([1.0, 2.0, 3.0]))
        est = pep_quadform(c, c)
        assert est.value == 1.0
        assert est.ci95 == 0.0

    def test_scalar_closed_form(self):
        est = pep_quadform(cov([[2.0]]), cov([[1.0]]), tol=1e-8)
        assert abs(est.value - 0.5) <= 1e-8

    def test_distinct_eigenvalue_closed_form(self):
        # diagonal pair: the LLR statistic is a sum of independent
        # exponentials with distinct weights mu_k = s_k - 1, whose CDF has a
        # partial-fraction closed form
        sa = np.diag([2.0, 3.0, 5.0])
        est = pep_quadform(cov(sa), cov(np.eye(3)), tol=1e-7)
        mu = np.array([1.0, 2.0, 4.0])
        c_thr = np.log(2.0 * 3.0 * 5.0)
        w = np.array([np.prod([mu[k] / (mu[k] - mu[j]) for j in range(3) if j != k])
                      for k in range(3)])
        oracle = 1.0 - float(np.sum(w * np.exp(-c_thr / mu)))
        assert abs(est.value - oracle) <= 1e-6

    def test_cross_method_with_large_mc(self):
        rng = np.random.default_rng(11)
        sa = random_cov(rng, 3)
        sb = random_cov(rng, 3)
        qf = pep_quadform(sa, sb, tol=1e-7)
        mc = pep_monte_carlo(sa, sb, 10**6, 2)
        assert abs(qf.value - mc.value) <= mc.ci95 + qf.ci95

    def test_tol_validated(self):
        c = cov(np.eye(2))
        with pytest.raises(ModelError):
            pep_quadform(c, c, tol=0.5)

    def test_dimension_cap(self):
        with pytest.raises(ModelError):
            pep_quadform(cov(np.eye(600)), cov(np.eye(600)))


class TestErrorBounds:
    def test_zero_pep(self):
        b = error_prob_bounds(0.0, 4)
        assert (b.lower, b.upper) == (0.0, 0.0)

    def test_direct_substitution(self):
        b = error_prob_bounds(0.5, 2)
        assert (b.lower, b.upper) == (0.25, 0.5)

    def test_upper_clamped(self):
        b = error_prob_bounds(0.9, 4)
        assert abs(b.lower - 0.225) < 1e-15
        assert b.upper == 1.0

    def test_m_validated(self):
        with pytest.raises(ModelError):
            error_prob_bounds(0.5, 1)


class TestSymbolError:
    def _setup(self, mats, Nr=1, Px=1.0):
        a = Alphabet.from_matrices(mats, normalize=True)
        K, Nt = a.K, a.Nt
        ch = ChannelModel(np.eye(Nt * Nr) / (Nt * Nr))
        nz = NoiseModel(np.eye(K * Nr), Pz=1.0)
        pw = PowerConfig(Px=Px, Pz=1.0)
        dims = SystemDims(K=K, Nt=Nt, Nr=Nr, M=a.M)
        return a, ch, nz, pw, dims

    def test_single_codeword_never_errs(self):
        a = Alphabet.from_matrices([np.array([[1.0]])], normalize=True)
        _, ch, nz, pw, dims = self._setup([np.array([[1.0]])])
        res = symbol_error_monte_carlo(a, ch, nz, pw, dims, 100, 0)
        assert res.average == 0.0

    def test_energy_pair_within_pep_bracket(self):
        from noncohlab.detector import DetectorBank

        a, ch, nz, pw, dims = self._setup(
            [np.array([[0.0]]), np.array([[np.sqrt(2)]])], Nr=2, Px=100.0)
        res = symbol_error_monte_carlo(a, ch, nz, pw, dims, 10**5, 7)
        bank = DetectorBank.from_alphabet(a, ch, nz, pw, dims.Nr)
        peps = [pep_quadform(bank.covariances[x], bank.covariances[y]).value
                for x in range(2) for y in range(2) if x != y]
        bounds = error_prob_bounds(max(peps), a.M)
        slack = 3 * res.ci95 + 1e-6
        assert bounds.lower - slack <= res.average <= bounds.upper + slack

    def test_duplicated_codeword_floors_error(self):
        a, ch, nz, pw, dims = self._setup(
            [np.array([[1.0]]), np.array([[1.0]])], Nr=1, Px=1.0)
        res = symbol_error_monte_carlo(a, ch, nz, pw, dims, 4000, 1)
        # the identical pair has PEP 1 under the tie convention, so the
        # measured error must respect the maxPEP / M lower bound
        assert res.average >= error_prob_bounds(1.0, 2).lower - 3 * res.ci95

    def test_trials_floor(self):
        a, ch, nz, pw, dims = self._setup(
            [np.array([[0.0]]), np.array([[2.0]])])
        with pytest.raises(ModelError):
            symbol_error_monte_carlo(a, ch, nz, pw, dims, 1, 0)


class TestProperties:
    def test_mc_vs_quadform_sweep(self):
        # the two routes must agree within joint intervals in >= 95 of 100 pairs
        rng = np.random.default_rng(0)
        hits = 0
        for _ in range(100):
            n = int(rng.integers(1, 5))
            a, b = random_cov(rng, n), random_cov(rng, n)
            mc = pep_monte_carlo(a, b, 4000, int(rng.integers(1 << 30)))
            qf = pep_quadform(a, b, tol=1e-6)
            if abs(mc.value - qf.value) <= mc.ci95 + qf.ci95:
                hits += 1
        assert hits >= 95

    def test_identical_pair_sentinel_both_directions(self):
        c1 = cov(np.diag([1.0, 2.0]))
        c2 = cov(np.diag([1.0, 2.0]))
        assert pep_quadform(c1, c2).value == 1.0
        assert pep_quadform(c2, c1).value == 1.0
        assert pep_monte_carlo(c1, c2, 100, 0).value == 1.0
        assert pep_monte_carlo(c2, c1, 100, 0).value == 1.0

    def test_wilson_interval_edges(self):
        center, half = wilson_interval(0, 100)
        assert center > 0 and center - half >= 0
        center, half = wilson_interval(100, 100)
        assert center < 1 and center + half <= 1 + 1e-12
