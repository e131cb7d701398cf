"""Unconditional-model likelihood, LLR and ML codeword decision."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    Alphabet,
    ChannelModel,
    ConditionalCovariance,
    ModelError,
    NoiseModel,
    PowerConfig,
    conditional_covariance,
)

_LN_PI = float(np.log(np.pi))


@dataclass(frozen=True)
class DetectorBank:
    """Per-codeword conditional covariances, in alphabet order."""

    covariances: tuple

    def __post_init__(self):
        if not self.covariances:
            raise ModelError("detector bank must be nonempty")
        d = self.covariances[0].dim
        for c in self.covariances:
            if c.dim != d:
                raise ModelError("all covariances in a bank must share dimension")
        object.__setattr__(self, "covariances", tuple(self.covariances))

    @property
    def M(self) -> int:
        return len(self.covariances)

    @property
    def dim(self) -> int:
        return self.covariances[0].dim

    @classmethod
    def from_alphabet(cls, alphabet: Alphabet, ch: ChannelModel, nz: NoiseModel,
                      pw: PowerConfig, Nr: int) -> "DetectorBank":
        covs = tuple(
            conditional_covariance(c, ch, nz, pw, Nr) for c in alphabet.codewords
        )
        return cls(covs)


def _check_len(y, cov):
    y = np.asarray(y, dtype=np.complex128)
    if y.shape[-1] != cov.dim:
        raise ModelError(f"vector length {y.shape[-1]} != covariance dim {cov.dim}")
    return y


def log_likelihood(y, cov: ConditionalCovariance) -> float:
    """ln f(y | S_i) = -K*Nr*ln(pi) - logdet(sigma) - y^H sigma^{-1} y."""
    y = _check_len(y, cov)
    if y.ndim != 1:
        raise ModelError("log_likelihood expects a single vector; see log_likelihood_many")
    q = float(cov.quad_form(y)[0])
    return -cov.dim * _LN_PI - cov.logdet - q


def log_likelihood_many(Y, cov: ConditionalCovariance) -> np.ndarray:
    """Vectorized log-likelihood for rows of Y."""
    Y = _check_len(np.atleast_2d(Y), cov)
    return -cov.dim * _LN_PI - cov.logdet - cov.quad_form(Y)


def llr(y, covA: ConditionalCovariance, covB: ConditionalCovariance) -> float:
    """y^H (sigma_b^{-1} - sigma_a^{-1}) y - ln(|sigma_a| / |sigma_b|)."""
    return float(llr_many(np.atleast_2d(y), covA, covB)[0])


def llr_many(Y, covA: ConditionalCovariance,
             covB: ConditionalCovariance) -> np.ndarray:
    if covA.dim != covB.dim:
        raise ModelError("LLR requires covariances of matching dimension")
    Y = _check_len(np.atleast_2d(Y), covA)
    return covB.quad_form(Y) - covA.quad_form(Y) - (covA.logdet - covB.logdet)


def ml_detect(y, bank: DetectorBank) -> int:
    """argmax_i log-likelihood; ties break toward the lowest index."""
    return int(ml_detect_many(np.atleast_2d(y), bank)[0])


def ml_detect_many(Y, bank: DetectorBank) -> np.ndarray:
    Y = _check_len(np.atleast_2d(Y), bank.covariances[0])
    scores = np.stack([log_likelihood_many(Y, c) for c in bank.covariances])
    # np.argmax returns the first maximum, i.e. the lowest codeword index.
    return np.argmax(scores, axis=0)
