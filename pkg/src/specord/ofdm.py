"""CP-OFDM modulation and averaged-periodogram PSD estimation."""
import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import DimensionError


@dataclass(eq=False)
class OfdmSymbol:
    time_samples: np.ndarray
    grid: object

    @property
    def cp(self):
        return self.time_samples[:self.grid.cp_len]

    @property
    def useful(self):
        return self.time_samples[self.grid.cp_len:]


@dataclass(eq=False)
class PsdTrace:
    freqs: np.ndarray
    power_db: np.ndarray
    resolution_bw: float
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.freqs) != len(self.power_db):
            raise DimensionError("frequency and power axes differ in length")

    def value_at(self, f):
        """Power (dB) of the bin nearest ``f``."""
        return self.power_db[np.argmin(np.abs(self.freqs - f))]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["freq_hz", "power_db"])
            for f, p in zip(self.freqs, self.power_db):
                w.writerow([f"{f:.6f}", f"{p:.6f}"])


def modulate_block(grid, xi):
    """Modulate rows of ``xi`` (``n x |occupied|``); returns ``n x (K + cp)`` samples."""
    xi = np.atleast_2d(np.asarray(xi, dtype=complex))
    if xi.shape[1] != grid.n_occupied:
        raise DimensionError(f"need {grid.n_occupied} tone values, got {xi.shape[1]}")
    spec = np.zeros((xi.shape[0], grid.k_fft), dtype=complex)
    spec[:, np.mod(grid.tone_array, grid.k_fft)] = xi
    x = np.fft.ifft(spec, axis=1, norm="ortho")
    cp = grid.cp_len
    if cp:
        x = np.concatenate([x[:, -cp:], x], axis=1)
    return x


def ofdm_modulate(grid, xi):
    """``x_n = K^-1/2 sum_k X_k exp(j 2 pi n k / K)`` with a cyclic prefix prepended."""
    return OfdmSymbol(modulate_block(grid, xi)[0], grid)


def averaged_periodogram(samples, sample_rate, nfft):
    """Hann-windowed, 50 % overlap averaged periodogram, two-sided, DC centred.

    Returns ``(freqs, density, enbw)`` with density in power per Hz.
    """
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("empty sample stream")
    nfft = min(nfft, samples.size)
    f, p = signal.welch(samples, fs=sample_rate, window="hann", nperseg=nfft,
                        noverlap=nfft // 2, detrend=False, return_onesided=False,
                        scaling="density")
    win = signal.get_window("hann", nfft)
    enbw = sample_rate * np.sum(win ** 2) / np.sum(win) ** 2
    return np.fft.fftshift(f), np.fft.fftshift(p), enbw


def psd_estimate(symbols, nfft, grid=None):
    """PSD of a stream of OFDM symbols (or an ``n x samples`` array of them)."""
    if isinstance(symbols, np.ndarray):
        if grid is None:
            raise ValueError("a raw sample block needs its grid")
        stream = symbols.ravel()
    else:
        syms = list(symbols)
        if not syms:
            raise ValueError("empty symbol stream")
        grid = syms[0].grid
        stream = np.concatenate([s.time_samples for s in syms])
    if stream.size == 0:
        raise ValueError("empty symbol stream")
    f, p, enbw = averaged_periodogram(stream, grid.sample_rate, nfft)
    with np.errstate(divide="ignore"):
        db = 10 * np.log10(p)
    db = np.where(np.isfinite(db), db, -400.0)
    return PsdTrace(freqs=f, power_db=db, resolution_bw=enbw)
