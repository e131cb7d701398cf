"""Block-fading signal model: dimensions, alphabets, covariances, sampling.

The receiver only knows the distributions of channel and noise (statistical
CSIR), so everything downstream works with the conditional covariance of the
vectorized received signal, sigma_i = Xkron_i @ Ch @ Xkron_i^H + Cz.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


class ModelError(ValueError):
    """Raised for invalid model inputs (shapes, definiteness, power)."""


def _as_complex_matrix(A, name="matrix") -> np.ndarray:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise ModelError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
        raise ModelError(f"{name} contains non-finite entries")
    return A


def _check_hermitian(A, name, tol=1e-12):
    scale = max(np.linalg.norm(A), 1.0)
    if np.linalg.norm(A - A.conj().T) > tol * scale:
        raise ModelError(f"{name} is not Hermitian within tolerance")


@dataclass(frozen=True)
class SystemDims:
    """K: coherence block length, Nt/Nr: antenna counts, M: alphabet size."""

    K: int
    Nt: int
    Nr: int
    M: int

    def __post_init__(self):
        for f in ("K", "Nt", "Nr", "M"):
            v = getattr(self, f)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ModelError(f"{f} must be a strictly positive integer, got {v!r}")

    @property
    def dim_y(self) -> int:
        return self.K * self.Nr

    @property
    def dim_h(self) -> int:
        return self.Nt * self.Nr


@dataclass(frozen=True)
class Codeword:
    """One K x Nt symbol matrix (unitless)."""

    S: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "S", _as_complex_matrix(self.S, "codeword"))

    @property
    def K(self) -> int:
        return self.S.shape[0]

    @property
    def Nt(self) -> int:
        return self.S.shape[1]

    def energy(self) -> float:
        return float(np.linalg.norm(self.S) ** 2)


@dataclass(frozen=True)
class Alphabet:
    """Ordered codeword set; `normalized` asserts mean per-use energy 1."""

    codewords: tuple
    normalized: bool = False

    def __post_init__(self):
        cws = tuple(c if isinstance(c, Codeword) else Codeword(c) for c in self.codewords)
        if not cws:
            raise ModelError("alphabet must contain at least one codeword")
        K, Nt = cws[0].K, cws[0].Nt
        for c in cws:
            if (c.K, c.Nt) != (K, Nt):
                raise ModelError("all codewords must share the same shape")
        object.__setattr__(self, "codewords", cws)
        if self.normalized:
            mean = self.mean_symbol_power()
            if abs(mean - 1.0) > 1e-12 * max(1.0, mean):
                raise ModelError(
                    f"alphabet marked normalized but mean per-use energy is {mean:.6e}"
                )

    @property
    def M(self) -> int:
        return len(self.codewords)

    @property
    def K(self) -> int:
        return self.codewords[0].K

    @property
    def Nt(self) -> int:
        return self.codewords[0].Nt

    def mean_symbol_power(self) -> float:
        """(1/(M*K)) * sum_i ||S_i||_F^2."""
        return sum(c.energy() for c in self.codewords) / (self.M * self.K)

    @classmethod
    def from_matrices(cls, mats, normalize=False) -> "Alphabet":
        cws = [Codeword(m) for m in mats]
        if normalize:
            total = sum(c.energy() for c in cws)
            if total <= 0:
                raise ModelError("cannot normalize an all-zero alphabet")
            scale = np.sqrt(len(cws) * cws[0].K / total)
            cws = [Codeword(c.S * scale) for c in cws]
            return cls(tuple(cws), normalized=True)
        return cls(tuple(cws), normalized=False)


@dataclass(frozen=True)
class PowerConfig:
    """Transmit power Px, noise power Pz, and their linear ratio gamma."""

    Px: float
    Pz: float
    gamma: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.Px < 0:
            raise ModelError("Px must be nonnegative")
        if self.Pz <= 0:
            raise ModelError("Pz must be strictly positive")
        g = self.Px / self.Pz
        if self.gamma is None:
            object.__setattr__(self, "gamma", g)
        elif self.gamma != g:
            raise ModelError("gamma must equal Px/Pz exactly")

    @classmethod
    def from_gamma_db(cls, gamma_db: float, Pz: float = 1.0) -> "PowerConfig":
        g = 10.0 ** (gamma_db / 10.0)
        return cls(Px=g * Pz, Pz=Pz)


@dataclass(frozen=True)
class ChannelModel:
    """Hermitian PSD channel covariance Ch of size (Nt*Nr) x (Nt*Nr)."""

    Ch: np.ndarray

    def __post_init__(self):
        Ch = _as_complex_matrix(self.Ch, "Ch")
        if Ch.shape[0] != Ch.shape[1]:
            raise ModelError("Ch must be square")
        _check_hermitian(Ch, "Ch")
        w = np.linalg.eigvalsh(Ch)
        if w.min() < -1e-12 * max(w.max(), 1.0):
            raise ModelError(f"Ch has negative eigenvalue {w.min():.3e}")
        object.__setattr__(self, "Ch", Ch)

    @property
    def dim(self) -> int:
        return self.Ch.shape[0]

    def is_full_rank(self, tol=1e-12) -> bool:
        w = np.linalg.eigvalsh(self.Ch)
        return bool(w.min() > tol * max(w.max(), 0.0) and w.max() > 0)


@dataclass(frozen=True)
class NoiseModel:
    """Hermitian PD noise covariance Cz of size (K*Nr) x (K*Nr), with Cz/Pz."""

    Cz: np.ndarray
    Pz: float = 1.0
    CzBar: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        Cz = _as_complex_matrix(self.Cz, "Cz")
        if Cz.shape[0] != Cz.shape[1]:
            raise ModelError("Cz must be square")
        _check_hermitian(Cz, "Cz")
        if self.Pz <= 0:
            raise ModelError("Pz must be strictly positive")
        w = np.linalg.eigvalsh(Cz)
        if w.min() <= 0:
            raise ModelError(f"Cz must be positive definite (min eigenvalue {w.min():.3e})")
        object.__setattr__(self, "Cz", Cz)
        object.__setattr__(self, "CzBar", Cz / self.Pz)

    @property
    def dim(self) -> int:
        return self.Cz.shape[0]


@dataclass(frozen=True)
class ConditionalCovariance:
    """Received-signal covariance with cached Cholesky factor and log-det."""

    sigma: np.ndarray
    cholesky: np.ndarray
    logdet: float

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    @classmethod
    def from_matrix(cls, sigma) -> "ConditionalCovariance":
        sigma = _as_complex_matrix(sigma, "sigma")
        _check_hermitian(sigma, "sigma")
        sigma = 0.5 * (sigma + sigma.conj().T)
        w = np.linalg.eigvalsh(sigma)
        if w.min() <= 1e-12 * max(w.max(), 0.0):
            raise ModelError(
                "covariance is (near-)singular: min eigenvalue "
                f"{w.min():.6e} vs max {w.max():.6e}"
            )
        L = np.linalg.cholesky(sigma)
        logdet = 2.0 * float(np.sum(np.log(np.real(np.diag(L)))))
        return cls(sigma=sigma, cholesky=L, logdet=logdet)

    def whiten(self, Y: np.ndarray) -> np.ndarray:
        """Solve L w = y for each row/vector y (forward substitution)."""
        from scipy.linalg import solve_triangular

        return solve_triangular(self.cholesky, np.atleast_2d(Y).T, lower=True).T

    def quad_form(self, Y: np.ndarray) -> np.ndarray:
        """y^H sigma^{-1} y for each row of Y, via the cached factor."""
        W = self.whiten(Y)
        return np.sum(np.abs(W) ** 2, axis=1)


def expand_codeword(S, Nr: int) -> np.ndarray:
    """Kronecker expansion I_Nr (x) S used by the vectorized signal model."""
    if isinstance(S, Codeword):
        S = S.S
    S = _as_complex_matrix(S, "codeword")
    if not isinstance(Nr, (int, np.integer)) or Nr < 1:
        raise ModelError(f"Nr must be a positive integer, got {Nr!r}")
    return np.kron(np.eye(Nr), S)


def conditional_covariance(S, ch: ChannelModel, nz: NoiseModel, pw: PowerConfig,
                           Nr: int) -> ConditionalCovariance:
    """sigma = Xkron Ch Xkron^H + Cz with Xkron = sqrt(Px) * (I_Nr (x) S)."""
    Skron = expand_codeword(S, Nr)
    if ch.dim != Skron.shape[1]:
        raise ModelError(
            f"Ch dimension {ch.dim} does not match Nt*Nr = {Skron.shape[1]}"
        )
    if nz.dim != Skron.shape[0]:
        raise ModelError(
            f"Cz dimension {nz.dim} does not match K*Nr = {Skron.shape[0]}"
        )
    Xkron = np.sqrt(pw.Px) * Skron
    sigma = Xkron @ ch.Ch @ Xkron.conj().T + nz.Cz
    return ConditionalCovariance.from_matrix(sigma)


_SAMPLE_BLOCK = 4096


def _substream(seed: int, stream: int, block: int) -> np.random.Generator:
    # Counter-based keying: independent Philox streams per (seed, stream, block),
    # so parallel and serial runs agree bit-for-bit.
    return np.random.Generator(np.random.Philox(key=[seed, (stream << 32) + block]))


def sample_received(cov: ConditionalCovariance, n: int, seed: int,
                    stream: int = 0, start: int = 0) -> np.ndarray:
    """Draw vectors y = L w, w i.i.d. standard circular complex normal, for
    trial indices [start, start + n).

    Sample i depends only on (seed, stream, i): fixed-size blocks are
    generated from per-block Philox substreams, so results are identical
    regardless of n, start, or how work is split across workers.
    """
    if n < 1:
        raise ModelError("n must be >= 1")
    if start < 0:
        raise ModelError("start must be >= 0")
    d = cov.dim
    out = np.empty((n, d), dtype=np.complex128)
    Lt = cov.cholesky.T
    filled = 0
    for block in range(start // _SAMPLE_BLOCK, (start + n - 1) // _SAMPLE_BLOCK + 1):
        rng = _substream(seed, stream, block)
        w = rng.standard_normal((_SAMPLE_BLOCK, d)) + 1j * rng.standard_normal(
            (_SAMPLE_BLOCK, d)
        )
        lo = max(start - block * _SAMPLE_BLOCK, 0)
        hi = min(start + n - block * _SAMPLE_BLOCK, _SAMPLE_BLOCK)
        out[filled:filled + hi - lo] = (w[lo:hi] / np.sqrt(2.0)) @ Lt
        filled += hi - lo
    return out


def snr(alphabet: Alphabet, ch: ChannelModel, pw: PowerConfig,
        dims: SystemDims) -> float:
    """Receiver SNR: (Px/Pz) * E_S[tr{Skron^H Skron Ch}] / K."""
    if not alphabet.normalized:
        raise ModelError("snr requires a power-normalized alphabet")
    acc = 0.0
    for c in alphabet.codewords:
        Skron = expand_codeword(c, dims.Nr)
        acc += float(np.real(np.trace(Skron.conj().T @ Skron @ ch.Ch)))
    return pw.gamma * acc / (alphabet.M * dims.K)


def check_normalizations(alphabet: Alphabet, ch: ChannelModel, nz: NoiseModel,
                         dims: SystemDims, rtol: float = 1e-9) -> dict:
    """Advisory report on the channel/noise/alphabet power conventions.

    Returns a dict of {constraint: {value, target, ok}}; unnormalized inputs
    are accepted everywhere else in the library, this only measures them.
    """
    report = {}
    tr_ch = float(np.real(np.trace(ch.Ch)))
    report["channel_trace"] = {
        "value": tr_ch, "target": 1.0,
        "ok": abs(tr_ch - 1.0) <= rtol * 1.0,
    }
    tr_cz = float(np.real(np.trace(nz.Cz)))
    target_cz = dims.K * dims.Nr * nz.Pz
    report["noise_trace"] = {
        "value": tr_cz, "target": target_cz,
        "ok": abs(tr_cz - target_cz) <= rtol * target_cz,
    }
    mean = alphabet.mean_symbol_power()
    report["alphabet_power"] = {
        "value": mean, "target": 1.0,
        "ok": abs(mean - 1.0) <= rtol * 1.0,
    }
    return report
