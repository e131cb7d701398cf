"""Pairwise and full error probability estimation.

Two independent routes to the pairwise error probability
P_{a->b} = P{L_{a,b}(y) <= 0 | y ~ CN(0, sigma_a)}:
a Monte Carlo estimator and a characteristic-function inversion of the
indefinite Gaussian quadratic form. Ties (LLR exactly zero) count as errors,
so a non-identifiable pair reports PEP = 1 as a deliberate sentinel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .detector import DetectorBank, llr_many, ml_detect_many
from .model import (
    Alphabet,
    ChannelModel,
    ConditionalCovariance,
    ModelError,
    NoiseModel,
    PowerConfig,
    SystemDims,
    sample_received,
)


class PepError(RuntimeError):
    """Raised when the CF quadrature fails to reach the requested accuracy."""


@dataclass(frozen=True)
class PepEstimate:
    value: float
    ci95: float
    method: str  # {"monte-carlo", "quadform-cf"}
    trials: int

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ModelError(f"probability out of range: {self.value}")
        if self.ci95 < 0:
            raise ModelError("ci95 must be nonnegative")


@dataclass(frozen=True)
class ErrorBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise ModelError(f"invalid bounds ({self.lower}, {self.upper})")


@dataclass(frozen=True)
class SymbolErrorResult:
    per_codeword: np.ndarray  # error rate per transmitted codeword
    average: float
    ci95: float
    trials: int


def wilson_interval(k: int, n: int, z: float = 1.959963984540054):
    """Wilson score interval; center and half-width for k successes in n."""
    if n < 1:
        raise ModelError("n must be >= 1")
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return float(center), float(half)


def pep_monte_carlo(covA: ConditionalCovariance, covB: ConditionalCovariance,
                    trials: int, seed: int) -> PepEstimate:
    """Fraction of y ~ CN(0, sigma_a) samples with LLR(y) <= 0."""
    if trials < 1:
        raise ModelError("trials must be >= 1")
    errors = 0
    batch = 1 << 16
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        # Blocks are addressed by absolute sample index so the estimate does
        # not depend on the batching.
        Y = sample_received(covA, m, seed, start=done)
        L = llr_many(Y, covA, covB)
        errors += int(np.count_nonzero(L <= 0.0))
        done += m
    _, half = wilson_interval(errors, trials)
    return PepEstimate(value=errors / trials, ci95=half,
                       method="monte-carlo", trials=trials)


def _llr_spectrum(covA: ConditionalCovariance, covB: ConditionalCovariance):
    """Eigenvalues mu_k of L_a^H (sigma_b^{-1} - sigma_a^{-1}) L_a and the
    threshold c = ln(|sigma_a|/|sigma_b|), so that under hypothesis a the LLR
    equals sum_k mu_k |w_k|^2 - c with w ~ CN(0, I)."""
    La = covA.cholesky
    MA = cho_solve((covB.cholesky, True), La) - cho_solve((covA.cholesky, True), La)
    Q = La.conj().T @ MA
    Q = 0.5 * (Q + Q.conj().T)
    mu = np.linalg.eigvalsh(Q)
    c = covA.logdet - covB.logdet
    return mu, float(c)


def _gil_pelaez(mu: np.ndarray, c: float, tol: float) -> float:
    """P(sum_k mu_k e_k <= c) for i.i.d. unit-mean exponentials e_k, by
    numerical inversion of the characteristic function.

    P = 1/2 - (1/pi) * int_0^inf Im{phi(t) exp(-i t c)} / t dt with
    phi(t) = prod_k 1 / (1 - i mu_k t). Trapezoidal quadrature on [0, U]
    with U doubled until the tail is negligible; when the polynomial tail
    decay is too slow (few eigenvalues), the remainder is evaluated with
    oscillatory-weighted quadrature instead of truncated.
    """
    from scipy.integrate import quad, trapezoid

    scale = np.max(np.abs(mu))
    mu = mu[np.abs(mu) > 1e-13 * scale]
    m = len(mu)

    def log_phi_mag(t):
        return -0.5 * np.sum(np.log1p(np.square(np.outer(t, mu))), axis=1)

    def phi_phase(t):
        return np.sum(np.arctan(np.outer(t, mu)), axis=1)

    # Each CF factor obeys (1+mu^2 t^2)^{-1/2} <= (1+mu^2 U^2)^{-1/2} (U/t)
    # for t >= U, hence int_U^inf |phi(t)|/t dt <= |phi(U)| / m.
    U = 16.0 / scale
    tail_bound = np.inf
    for _ in range(30):
        tail_bound = np.exp(log_phi_mag(np.array([U])))[0] / m
        if tail_bound < tol / 2 or U > 1e5 / scale:
            break
        U *= 2.0

    tail = 0.0
    if tail_bound >= tol / 2:
        # Im{phi e^{-ict}}/t = Im(phi)/t * cos(ct) - Re(phi)/t * sin(ct)
        def im_part(t):
            return np.exp(log_phi_mag(np.array([t])))[0] * np.sin(phi_phase(np.array([t]))[0]) / t

        def re_part(t):
            return np.exp(log_phi_mag(np.array([t])))[0] * np.cos(phi_phase(np.array([t]))[0]) / t

        try:
            if abs(c) > 1e-300:
                t1, e1 = quad(im_part, U, np.inf, weight="cos", wvar=c, limlst=200)
                t2, e2 = quad(re_part, U, np.inf, weight="sin", wvar=c, limlst=200)
            else:
                t1, e1 = quad(im_part, U, np.inf, limit=400)
                t2, e2 = 0.0, 0.0
        except Exception as e:
            raise PepError(f"CF tail quadrature failed: {e}") from e
        if e1 + e2 > tol / 2:
            raise PepError(
                f"CF tail quadrature error estimate {e1 + e2:.3e} exceeds tol/2"
            )
        tail = t1 - t2

    def body(n):
        t = np.linspace(0.0, U, n + 1)
        g = np.empty_like(t)
        # limit of Im{phi(t) exp(-i t c)}/t at t -> 0
        g[0] = np.sum(mu) - c
        ts = t[1:]
        g[1:] = np.exp(log_phi_mag(ts)) * np.sin(phi_phase(ts) - ts * c) / ts
        return trapezoid(g, t)

    n = 1 << 10
    prev = body(n)
    last_change = np.inf
    for _ in range(12):
        n *= 2
        cur = body(n)
        last_change = abs(cur - prev)
        if last_change < tol / 4:
            p = 0.5 - (cur + tail) / np.pi
            return min(max(p, 0.0), 1.0)
        prev = cur
    raise PepError(
        f"CF quadrature did not converge; last refinement changed by {last_change:.3e}"
    )


def pep_quadform(covA: ConditionalCovariance, covB: ConditionalCovariance,
                 tol: float = 1e-6) -> PepEstimate:
    """PEP by characteristic-function inversion of the LLR quadratic form."""
    if covA.dim != covB.dim:
        raise ModelError("covariance dimensions must match")
    if covA.dim > 512:
        raise ModelError("quadform PEP limited to dimension <= 512")
    if not (0.0 < tol <= 1e-3):
        raise ModelError("tol must lie in (0, 1e-3]")
    mu, c = _llr_spectrum(covA, covB)
    mu_scale = float(np.max(np.abs(mu))) if mu.size else 0.0
    if mu_scale < 1e-12:
        # Degenerate quadratic form: LLR is the constant -c.
        value = 1.0 if c >= -1e-12 else 0.0
        return PepEstimate(value=value, ci95=0.0, method="quadform-cf", trials=0)
    value = _gil_pelaez(mu, c, tol)
    return PepEstimate(value=value, ci95=tol, method="quadform-cf", trials=0)


def error_prob_bounds(maxPep: float, M: int) -> ErrorBounds:
    """Bracket on the full error probability from the worst pairwise PEP."""
    if M < 2:
        raise ModelError("M must be >= 2")
    if not (0.0 <= maxPep <= 1.0):
        raise ModelError("maxPep must be a probability")
    return ErrorBounds(lower=maxPep / M, upper=min(1.0, (M - 1) * maxPep))


def symbol_error_monte_carlo(alphabet: Alphabet, ch: ChannelModel,
                             nz: NoiseModel, pw: PowerConfig, dims: SystemDims,
                             trials: int, seed: int) -> SymbolErrorResult:
    """Full M-ary error rate under ML detection, each codeword sent equally."""
    M = alphabet.M
    if trials < M:
        raise ModelError("trials must be >= M")
    bank = DetectorBank.from_alphabet(alphabet, ch, nz, pw, dims.Nr)
    per = np.zeros(M)
    counts = np.zeros(M, dtype=int)
    total_err = 0
    for i, cov in enumerate(bank.covariances):
        n_i = trials // M + (1 if i < trials % M else 0)
        if n_i == 0:
            continue
        Y = sample_received(cov, n_i, seed, stream=i)
        dec = ml_detect_many(Y, bank)
        errs = int(np.count_nonzero(dec != i))
        per[i] = errs / n_i
        counts[i] = n_i
        total_err += errs
    _, half = wilson_interval(total_err, trials)
    return SymbolErrorResult(per_codeword=per, average=total_err / trials,
                             ci95=half, trials=trials)
