"""Subcarrier grids, notch/band descriptions and the CP-OFDM subcarrier spectrum."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError

LTE_DELTA_F = 15e3
CP_RATIO = 9 / 128


@dataclass(frozen=True)
class SubcarrierGrid:
    k_fft: int
    occupied: tuple
    delta_f: float
    t_s: float
    t_cp: float

    def __post_init__(self):
        occ = tuple(int(k) for k in self.occupied)
        object.__setattr__(self, "occupied", occ)
        if abs(self.t_s * self.delta_f - 1.0) > 1e-12:
            raise ValueError("t_s must equal 1/delta_f")
        if len(set(occ)) != len(occ):
            raise ValueError("occupied subcarrier indices must be unique")
        half = self.k_fft / 2
        if any(not -half < k < half for k in occ):
            raise ValueError(f"occupied indices must lie in (-{half}, {half})")

    @classmethod
    def symmetric(cls, k_fft, half_width, delta_f=LTE_DELTA_F, cp_ratio=CP_RATIO):
        """Tones ``[-half_width, half_width]`` without DC."""
        occ = tuple(k for k in range(-half_width, half_width + 1) if k != 0)
        t_s = 1.0 / delta_f
        return cls(k_fft, occ, delta_f, t_s, cp_ratio * t_s)

    @property
    def n_occupied(self):
        return len(self.occupied)

    @property
    def period(self):
        """Full symbol duration ``T = t_s + t_cp``."""
        return self.t_s + self.t_cp

    @property
    def cp_len(self):
        return int(round(self.k_fft * self.t_cp / self.t_s))

    @property
    def sample_rate(self):
        return self.delta_f * self.k_fft

    @property
    def tone_array(self):
        return np.asarray(self.occupied)


@dataclass(frozen=True)
class NotchSpec:
    """Either discrete notch frequencies (LSN) or OOB bands sampled every
    ``sample_spacing`` Hz (PLM).  An empty spec means no constraints."""

    frequencies: tuple = ()
    bands: tuple = ()
    sample_spacing: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        bands = tuple((float(lo), float(hi)) for lo, hi in self.bands)
        object.__setattr__(self, "bands", bands)
        if bands:
            if self.sample_spacing is None or self.sample_spacing <= 0:
                raise ValueError("band notches need a positive sample spacing")
            ordered = sorted(bands)
            for lo, hi in ordered:
                if hi < lo:
                    raise ValueError(f"band ({lo}, {hi}) has hi < lo")
            for (_, hi0), (lo1, _) in zip(ordered, ordered[1:]):
                if lo1 <= hi0:
                    raise ValueError("bands must not overlap")

    @property
    def is_band(self):
        return bool(self.bands)

    def sample_points(self):
        """Sample frequencies of every band, endpoints included."""
        pts = []
        for lo, hi in self.bands:
            n = int(np.floor((hi - lo) / self.sample_spacing + 1e-9)) + 1
            pts.append(lo + self.sample_spacing * np.arange(n))
        return np.concatenate(pts) if pts else np.empty(0)


def paired_notches(centers, offset):
    """``{+-c +- offset}`` for every center, sorted ascending."""
    freqs = [s * c + o for c in centers for s in (-1, 1) for o in (-offset, offset)]
    return tuple(sorted(freqs))


def spectral_response(grid, k, f):
    """Continuous spectrum of occupied tone ``k`` over the CP-extended window.

    a_k(f) = sqrt(T) exp(j pi nu (t_s - t_cp)) sinc(nu T),  nu = k df - f

    Broadcasts over ``k`` and ``f``.
    """
    k_arr = np.asarray(k)
    if not np.all(np.isin(k_arr, grid.tone_array)):
        raise IndexError(f"tone {k} is not occupied")
    nu = k_arr * grid.delta_f - np.asarray(f, dtype=float)
    t = grid.period
    return np.sqrt(t) * np.exp(1j * np.pi * nu * (grid.t_s - grid.t_cp)) * np.sinc(nu * t)


def response_matrix(grid, freqs):
    """Rows ``a(f)^T`` over the occupied tones for each frequency."""
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size == 0:
        return np.zeros((0, grid.n_occupied), dtype=complex)
    return spectral_response(grid, grid.tone_array[None, :], freqs[:, None])


def check_length(vec, n, what="vector"):
    if np.shape(vec)[0] != n:
        raise DimensionError(f"{what} has length {np.shape(vec)[0]}, expected {n}")
