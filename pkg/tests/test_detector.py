import numpy as np
import pytest

from noncohlab.detector import (
    DetectorBank,
    llr,
    llr_many,
    log_likelihood,
    ml_detect,
    ml_detect_many,
)
from noncohlab.model import ConditionalCovariance, ModelError


def cov(A):
    return ConditionalCovariance.from_matrix(np.asarray(A, dtype=complex))


def random_cov(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return cov(A @ A.conj().T / n + 0.3 * np.eye(n))


class TestLogLikelihood:
    def test_zero_vector_unit_cov(self):
        assert abs(log_likelihood(np.zeros(1), cov([[1.0]])) + np.log(np.pi)) < 1e-14

    def test_scalar_case(self):
        got = log_likelihood(np.array([1.0]), cov([[2.0]]))
        assert abs(got - (-np.log(np.pi) - np.log(2) - 0.5)) < 1e-12

    def test_matches_explicit_inverse_oracle(self):
        rng = np.random.default_rng(2)
        c = random_cov(rng, 4)
        y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        inv = np.linalg.inv(c.sigma)
        expected = (-4 * np.log(np.pi)
                    - np.log(np.linalg.det(c.sigma).real)
                    - np.real(y.conj() @ inv @ y))
        assert abs(log_likelihood(y, c) - expected) <= 1e-10 * abs(expected)

    def test_dimension_mismatch(self):
        with pytest.raises(ModelError):
            log_likelihood(np.zeros(3), cov(np.eye(2)))


class TestLlr:
    def test_identical_hypotheses(self):
        rng = np.random.default_rng(7)
        c = random_cov(rng, 3)
        for _ in range(10):
            y = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            assert llr(y, c, c) == 0.0

    def test_scalar_case(self):
        got = llr(np.array([1.0]), cov([[2.0]]), cov([[1.0]]))
        assert abs(got - (0.5 - np.log(2))) < 1e-12

    def test_equals_loglik_difference(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            n = int(rng.integers(1, 6))
            a, b = random_cov(rng, n), random_cov(rng, n)
            y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            diff = log_likelihood(y, a) - log_likelihood(y, b)
            assert abs(llr(y, a, b) - diff) <= 1e-10 * max(1.0, abs(diff))

    def test_antisymmetry(self):
        rng = np.random.default_rng(19)
        for _ in range(30):
            n = int(rng.integers(1, 6))
            a, b = random_cov(rng, n), random_cov(rng, n)
            y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            assert abs(llr(y, a, b) + llr(y, b, a)) <= 1e-10

    def test_collapse_for_equal_covariances(self):
        # identical covariance pair collapses the LLR for every observation
        rng = np.random.default_rng(29)
        sigma = random_cov(rng, 4).sigma
        a, b = cov(sigma), cov(sigma)
        Y = rng.standard_normal((1000, 4)) + 1j * rng.standard_normal((1000, 4))
        assert np.all(llr_many(Y, a, b) == 0.0)


class TestMlDetect:
    def test_single_hypothesis(self):
        bank = DetectorBank((cov(np.eye(2)),))
        rng = np.random.default_rng(0)
        y = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        assert ml_detect(y, bank) == 0

    def test_scalar_bank(self):
        bank = DetectorBank((cov([[1.0]]), cov([[101.0]])))
        assert ml_detect(np.array([0.1]), bank) == 0
        assert ml_detect(np.array([10.0]), bank) == 1

    def test_agrees_with_exhaustive_scan(self):
        rng = np.random.default_rng(37)
        banks = DetectorBank(tuple(random_cov(rng, 3) for _ in range(4)))
        for _ in range(50):
            y = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            scores = [log_likelihood(y, c) for c in banks.covariances]
            assert ml_detect(y, banks) == int(np.argmax(scores))

    def test_tie_breaks_low_index(self):
        sigma = np.eye(2)
        bank = DetectorBank((cov(sigma), cov(sigma), cov(sigma)))
        assert ml_detect(np.array([1.0, 1.0]), bank) == 0

    def test_invariant_to_common_offset(self):
        # shifting all log-likelihoods by a constant cannot change the argmax
        rng = np.random.default_rng(41)
        bank = DetectorBank(tuple(random_cov(rng, 3) for _ in range(4)))
        Y = rng.standard_normal((20, 3)) + 1j * rng.standard_normal((20, 3))
        base = ml_detect_many(Y, bank)
        for shift in (-100.0, 3.5, 1e6):
            shifted = np.stack(
                [np.array([log_likelihood(y, c) + shift for c in bank.covariances])
                 for y in Y])
            assert np.array_equal(np.argmax(shifted, axis=1), base)
