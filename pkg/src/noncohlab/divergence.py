"""Jeffreys divergence between conditional Gaussian laws, in three equivalent
forms, plus the single-antenna-transmit (SIMO, K = Nt = 1) specialization and
its spectrum-based bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .model import ChannelModel, ConditionalCovariance, ModelError, NoiseModel

_EIG_FLOOR = 1e-14  # relative floor for Hermitian inverse square roots
_NEG_CLAMP = 1e-9


def herm_inv_sqrt(A: np.ndarray) -> np.ndarray:
    """A^{-1/2} for Hermitian PD A via eigendecomposition.

    Eigenvalues are floored at _EIG_FLOOR * sigma_max to keep moderately
    conditioned inputs usable.
    """
    A = 0.5 * (A + A.conj().T)
    w, V = np.linalg.eigh(A)
    floor = _EIG_FLOOR * max(float(w[-1]), 0.0)
    if floor <= 0:
        raise ModelError("matrix is not positive definite")
    w = np.maximum(w, floor)
    return (V / np.sqrt(w)) @ V.conj().T


def _clamp_nonneg(val: float, scale: float = 1.0) -> float:
    if val >= 0.0:
        return val
    if val > -_NEG_CLAMP * max(1.0, scale):
        return 0.0
    raise ModelError(f"divergence came out significantly negative ({val:.3e}); "
                     "inputs are likely not PD")


@dataclass(frozen=True)
class NormalizedCovariance:
    """cRing = sigma_b^{-1/2} sigma_a sigma_b^{-1/2} and its min eigenvalue."""

    cRing: np.ndarray
    sigmaMin: float


@dataclass(frozen=True)
class GammaSpectrum:
    """gammaMatrix = Cz^{-1/2} Ch Cz^{-1/2} (SIMO) and its largest eigenvalue."""

    gammaMatrix: np.ndarray
    sigmaMaxC: float

    @classmethod
    def from_models(cls, ch: ChannelModel, nz: NoiseModel) -> "GammaSpectrum":
        if ch.dim != nz.dim:
            raise ModelError("SIMO spectrum requires Ch and Cz of equal size")
        W = herm_inv_sqrt(nz.Cz)
        G = W @ ch.Ch @ W
        G = 0.5 * (G + G.conj().T)
        w = np.linalg.eigvalsh(G)
        return cls(gammaMatrix=G, sigmaMaxC=float(w[-1]))

    def trace_sq(self) -> float:
        return float(np.real(np.trace(self.gammaMatrix @ self.gammaMatrix)))


@dataclass(frozen=True)
class SimoPair:
    """Transmitted scalar symbols x = sqrt(Px)*s for the two hypotheses."""

    xa: complex
    xb: complex

    @property
    def deltaAB(self) -> float:
        return float(abs(self.xa) ** 2 - abs(self.xb) ** 2)


def _check_pair(covA: ConditionalCovariance, covB: ConditionalCovariance):
    if covA.dim != covB.dim:
        raise ModelError("covariance dimensions must match")


def jeffreys_trace(covA: ConditionalCovariance,
                   covB: ConditionalCovariance) -> float:
    """J = tr{(sigma_b^{-1} - sigma_a^{-1})(sigma_a - sigma_b)}."""
    _check_pair(covA, covB)
    D = covA.sigma - covB.sigma
    M = cho_solve((covB.cholesky, True), D) - cho_solve((covA.cholesky, True), D)
    val = float(np.real(np.trace(M)))
    return _clamp_nonneg(val)


def jeffreys_norm_form(covA: ConditionalCovariance,
                       covB: ConditionalCovariance) -> float:
    """J = || sigma_a^{-1/2} (sigma_a - sigma_b) sigma_b^{-1/2} ||_F^2."""
    _check_pair(covA, covB)
    Wa = herm_inv_sqrt(covA.sigma)
    Wb = herm_inv_sqrt(covB.sigma)
    X = Wa @ (covA.sigma - covB.sigma) @ Wb
    return float(np.linalg.norm(X) ** 2)


def normalized_covariance(covA: ConditionalCovariance,
                          covB: ConditionalCovariance) -> NormalizedCovariance:
    """Whitened ratio of hypotheses, cRing = sigma_b^{-1/2} sigma_a sigma_b^{-1/2}."""
    _check_pair(covA, covB)
    Wb = herm_inv_sqrt(covB.sigma)
    C = Wb @ covA.sigma @ Wb
    C = 0.5 * (C + C.conj().T)
    w = np.linalg.eigvalsh(C)
    return NormalizedCovariance(cRing=C, sigmaMin=float(w[0]))


def jeffreys_weighted_form(covA: ConditionalCovariance,
                           covB: ConditionalCovariance) -> float:
    """J = ||cRing - I||^2 weighted by cRing, i.e. tr{(C-I) C^{-1} (C-I)}."""
    nc = normalized_covariance(covA, covB)
    C = nc.cRing
    D = C - np.eye(C.shape[0])
    val = float(np.real(np.trace(D @ np.linalg.solve(C, D))))
    return _clamp_nonneg(val)


def equivalent_condition_stats(covA: ConditionalCovariance,
                               covB: ConditionalCovariance):
    """(||cRing - I||_F^2, sigma_min(cRing)): the pair of statistics whose
    divergence / positivity is equivalent to large-array singular detection."""
    nc = normalized_covariance(covA, covB)
    D = nc.cRing - np.eye(nc.cRing.shape[0])
    return float(np.linalg.norm(D) ** 2), nc.sigmaMin


def simo_jeffreys(pair: SimoPair, ch: ChannelModel, nz: NoiseModel) -> float:
    """J = delta^2 * tr{Ch sigma_b^{-1} Ch sigma_a^{-1}} for K = Nt = 1,
    with sigma = |x|^2 Ch + Cz."""
    if ch.dim != nz.dim:
        raise ModelError("SIMO requires Ch and Cz of equal size (K = Nt = 1)")
    Sa = abs(pair.xa) ** 2 * ch.Ch + nz.Cz
    Sb = abs(pair.xb) ** 2 * ch.Ch + nz.Cz
    T = np.linalg.solve(Sa, ch.Ch @ np.linalg.solve(Sb, ch.Ch))
    val = pair.deltaAB ** 2 * float(np.real(np.trace(T)))
    return _clamp_nonneg(val)


def simo_bounds(pair: SimoPair, gamma: GammaSpectrum):
    """(lower, upper) bracket on the SIMO Jeffreys divergence."""
    d2 = pair.deltaAB ** 2
    tr2 = gamma.trace_sq()
    C = gamma.sigmaMaxC
    upper = d2 * tr2
    lower = d2 * tr2 / ((abs(pair.xa) ** 2 * C + 1.0) * (abs(pair.xb) ** 2 * C + 1.0))
    return lower, upper
