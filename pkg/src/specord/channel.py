"""Spatially correlated MIMO channel synthesis (Kronecker model).

``vec(H)`` stacks the columns of ``H`` (receive index fastest), so with
``R_H = kron(R_BS, R_MS)`` the transmit-side factor ``alpha`` couples
different columns and the receive-side factor ``beta`` couples rows.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (DimensionError, InvalidCorrelationError,
                     InvalidProfileError, UndefinedCorrelationError)

LEVELS = {
    "low": (0.0, 0.0),
    "medium": (0.3, 0.9),
    "high": (0.9, 0.9),
}

EIG_CLAMP = 1e-10


@dataclass(frozen=True)
class CorrelationSpec:
    alpha: complex = 0.0
    beta: complex = 0.0
    level: str = "custom"

    def __post_init__(self):
        if abs(self.alpha) > 1 or abs(self.beta) > 1:
            raise InvalidCorrelationError(
                f"correlation factors must satisfy |alpha|, |beta| <= 1, "
                f"got alpha={self.alpha}, beta={self.beta}")
        if self.level != "custom":
            if self.level not in LEVELS:
                raise InvalidCorrelationError(f"unknown correlation level {self.level!r}")
            if (self.alpha, self.beta) != LEVELS[self.level]:
                raise InvalidCorrelationError(
                    f"level {self.level!r} requires (alpha, beta) = {LEVELS[self.level]}")

    @classmethod
    def from_level(cls, level):
        try:
            alpha, beta = LEVELS[level]
        except KeyError:
            raise InvalidCorrelationError(f"unknown correlation level {level!r}") from None
        return cls(alpha, beta, level)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    r_bs: np.ndarray
    r_ms: np.ndarray
    r_h: np.ndarray
    v: np.ndarray
    d: np.ndarray

    @property
    def n_t(self):
        return self.r_bs.shape[0]

    @property
    def n_r(self):
        return self.r_ms.shape[0]

    @property
    def coloring(self):
        """``V D^{1/2}``, the matrix that maps white ``r`` to ``vec(H)``."""
        return self.v * np.sqrt(self.d)


@dataclass(eq=False)
class ChannelRealization:
    per_tone: Optional[np.ndarray] = None  # (K, Nr, Nt)
    taps: Optional[np.ndarray] = None      # (L_ch, Nr, Nt)

    def __post_init__(self):
        for name in ("per_tone", "taps"):
            arr = getattr(self, name)
            if arr is not None and np.asarray(arr).ndim != 3:
                raise DimensionError(f"{name} must be a stack of matrices, got shape {np.shape(arr)}")

    @property
    def n_tones(self):
        return 0 if self.per_tone is None else self.per_tone.shape[0]


def exponential_correlation(factor, n):
    """``R[i, j] = factor^(j-i)`` above the diagonal, Hermitian below."""
    idx = np.arange(n)
    lag = idx[None, :] - idx[:, None]
    upper = np.power(complex(factor), np.abs(lag))
    r = np.where(lag >= 0, upper, np.conj(upper))
    if np.isrealobj(factor) or np.imag(factor) == 0:
        r = r.real
    return r


def correlation_matrices(spec, n_t=2, n_r=2):
    """Build ``R_BS``, ``R_MS``, their Kronecker product and its eigen-factors.

    For 2 antennas this is exactly ``[[1, a], [a*, 1]]``; larger arrays use the
    exponential model ``a^|i-j|``.  Eigenvalues in ``[-1e-10, 0)`` are clamped
    to zero; anything more negative is rejected.
    """
    if n_t < 1 or n_r < 1:
        raise DimensionError("antenna counts must be >= 1")
    if abs(spec.alpha) > 1 or abs(spec.beta) > 1:
        raise InvalidCorrelationError("correlation factors must satisfy |alpha|, |beta| <= 1")
    r_bs = exponential_correlation(spec.alpha, n_t)
    r_ms = exponential_correlation(spec.beta, n_r)
    r_h = np.kron(r_bs, r_ms)
    d, v = np.linalg.eigh(r_h)
    if d.min() < -EIG_CLAMP:
        raise InvalidCorrelationError(
            f"R_H is not positive semidefinite (min eigenvalue {d.min():.3e})")
    d = np.where(d < 0, 0.0, d)
    return CorrelationMatrix(r_bs=r_bs, r_ms=r_ms, r_h=r_h, v=v, d=d)


def complex_normal(rng, shape):
    """Circularly symmetric CN(0, 1) variates."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * np.sqrt(0.5)


def vec_to_matrix(vec, n_r, n_t):
    """Inverse of column stacking: ``(..., Nr*Nt)`` -> ``(..., Nr, Nt)``."""
    vec = np.asarray(vec)
    return np.swapaxes(vec.reshape(vec.shape[:-1] + (n_t, n_r)), -1, -2)


def matrix_to_vec(h):
    h = np.asarray(h)
    return np.swapaxes(h, -1, -2).reshape(h.shape[:-2] + (-1,))


def generate_channel(corr, rng, size=None):
    """Draw flat channels with ``vec(H) = V D^{1/2} r``.

    ``size`` prepends batch dimensions; ``None`` returns a single
    ``(Nr, Nt)`` matrix.
    """
    batch = () if size is None else tuple(np.atleast_1d(size))
    n = corr.n_t * corr.n_r
    r = complex_normal(rng, batch + (n,))
    vec = r @ corr.coloring.T
    return vec_to_matrix(vec, corr.n_r, corr.n_t)


def spatial_correlation(samples, ij, pq):
    """Sample estimate of the correlation between entries ``H[ij]`` and ``H[pq]``.

    Indices are zero-based ``(row, column)`` = (receive, transmit) pairs.
    """
    samples = np.asarray(samples)
    if samples.ndim != 3 or samples.shape[0] < 2:
        raise DimensionError("need at least two (Nr, Nt) samples")
    a = samples[(slice(None),) + tuple(ij)]
    b = samples[(slice(None),) + tuple(pq)]
    pa = np.mean(np.abs(a) ** 2)
    pb = np.mean(np.abs(b) ** 2)
    if pa == 0 or pb == 0:
        raise UndefinedCorrelationError(f"zero empirical power in channel {ij if pa == 0 else pq}")
    if tuple(ij) == tuple(pq):
        return 1.0 + 0j
    return np.mean(a * np.conj(b)) / np.sqrt(pa * pb)


def tapped_channel(corr, l_ch, power_profile, rng):
    """Independent correlated taps, tap ``l`` scaled by ``sqrt(profile[l])``."""
    profile = np.asarray(power_profile, dtype=float)
    if l_ch < 1 or profile.shape != (l_ch,):
        raise InvalidProfileError(f"power profile must have {l_ch} entries, got {profile.shape}")
    if np.any(profile < 0) or abs(profile.sum() - 1.0) > 1e-9:
        raise InvalidProfileError(f"power profile must be nonnegative and sum to 1, got sum {profile.sum()!r}")
    taps = generate_channel(corr, rng, size=l_ch)
    taps = taps * np.sqrt(profile)[:, None, None]
    return ChannelRealization(taps=taps)


def frequency_response(taps, k, n_fft):
    """``H_k = sum_l H_l exp(-j 2 pi l k / K)``."""
    h = taps.taps if isinstance(taps, ChannelRealization) else np.asarray(taps)
    if h is None:
        raise DimensionError("realization has no taps")
    phase = np.exp(-2j * np.pi * np.arange(h.shape[0]) * k / n_fft)
    return np.tensordot(phase, h, axes=1)


def per_tone_from_taps(real, tones, n_fft):
    """Populate ``real.per_tone`` at the given (signed) tone indices via one FFT."""
    if real.taps is None:
        raise DimensionError("realization has no taps")
    spectrum = np.fft.fft(real.taps, n=n_fft, axis=0)
    real.per_tone = spectrum[np.mod(np.asarray(tones), n_fft)]
    return real


def per_tone_channel(corr, n_tones, rng):
    """Default mode: an independently colored flat channel on every tone."""
    return ChannelRealization(per_tone=generate_channel(corr, rng, size=n_tones))


def trial_rng(seed, trial):
    """Independent generator for one Monte Carlo trial, keyed by ``(seed, trial)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))
