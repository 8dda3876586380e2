"""Effective channel assembly and Monte Carlo ergodic capacity.

Two routes compute ``log2 det(I + rho H_eff^H H_eff)``:

* the Gram route factors the ``(Nt L) x (Nt L)`` matrix directly;
* the deflation route uses ``G G^H = I - W W^H`` (true for every precoder
  built here) and Sylvester's identity to reduce the determinant to per-tone
  ``Nt x Nt`` terms plus one ``(Nt m) x (Nt m)`` correction, so a trial costs
  ``O(K m^2 Nt^2)`` instead of ``O((K Nt)^3)``.
"""
import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .channel import (correlation_matrices, per_tone_channel, per_tone_from_taps,
                      tapped_channel, trial_rng)
from .errors import DimensionError
from .precoder import Precoder

CHUNK_TRIALS = 50
Z95 = 1.959963984540054
CSV_COLUMNS = ("scenario", "correlation", "snr_db", "capacity_bps_hz",
               "ci_halfwidth", "trials", "seed")


@dataclass(eq=False)
class EffectiveChannel:
    matrix: np.ndarray   # (K Nr, L Nt), block (k, j) = g_kj H_k
    n_r: int
    n_t: int
    block_diagonal_hint: bool = False

    @property
    def n_tones(self):
        return self.matrix.shape[0] // self.n_r

    @property
    def n_streams(self):
        return self.matrix.shape[1] // self.n_t

    def block(self, k, j):
        return self.matrix[k * self.n_r:(k + 1) * self.n_r, j * self.n_t:(j + 1) * self.n_t]

    def diagonal_blocks(self):
        return np.stack([self.block(k, k) for k in range(self.n_tones)])


def assemble_effective_channel(p, ch):
    """Tile the precoder over the per-tone channels: block ``(k, j) = g_kj H_k``."""
    g = p.matrix() if isinstance(p, Precoder) else np.atleast_2d(np.asarray(p))
    h = ch.per_tone if hasattr(ch, "per_tone") else np.asarray(ch)
    if h is None or h.ndim != 3:
        raise DimensionError("channel realization has no per-tone matrices")
    k, l = g.shape
    if h.shape[0] != k:
        raise DimensionError(f"precoder has {k} subcarriers, channel has {h.shape[0]} tones")
    _, n_r, n_t = h.shape
    blocks = g[:, :, None, None] * h[:, None, :, :]
    mat = blocks.transpose(0, 2, 1, 3).reshape(k * n_r, l * n_t)
    if isinstance(p, Precoder) and p.kind == "identity":
        hint = k == l
    else:
        hint = k == l and np.array_equal(g, np.eye(k))
    return EffectiveChannel(mat, n_r, n_t, block_diagonal_hint=hint)


def instantaneous_capacity(h_eff, varrho):
    """``log2 det(I + rho H^H H)`` in bits per channel use (per OFDM symbol)."""
    if varrho <= 0:
        raise ValueError("per-stream SNR must be positive")
    mat = h_eff.matrix if isinstance(h_eff, EffectiveChannel) else np.asarray(h_eff)
    if not np.all(np.isfinite(mat)):
        raise ValueError("effective channel has non-finite entries")
    if isinstance(h_eff, EffectiveChannel) and h_eff.block_diagonal_hint:
        logdet, _ = _kernels.tone_stats(h_eff.diagonal_blocks()[None], varrho)
        return float(np.sum(logdet))
    gram = np.conj(mat.T) @ mat
    a = np.eye(gram.shape[0]) + varrho * gram
    chol = np.linalg.cholesky(0.5 * (a + np.conj(a.T)))
    return float(2.0 * np.sum(np.log(np.real(np.diag(chol)))) / math.log(2))


def deflation_capacity(h, complement, rhos):
    """Capacity of ``G G^H = I - W W^H`` precoding for a stack of channels.

    ``h`` is ``(n, K, Nr, Nt)``; returns ``(n, len(rhos))`` totals in bits.
    """
    h = np.asarray(h, dtype=complex)
    w = np.asarray(complement, dtype=complex)
    if w.shape[0] != h.shape[1]:
        raise DimensionError(f"complement basis has {w.shape[0]} rows, channel has {h.shape[1]} tones")
    z = np.conj(w)[:, :, None] * w[:, None, :]
    out = np.empty((h.shape[0], len(rhos)))
    for i, rho in enumerate(rhos):
        logdet, q = _kernels.tone_stats(h, rho)
        tot = logdet.sum(axis=1)
        if w.shape[1]:
            tot = tot + _kernels.deflation_logdet(z, q, rho)
        out[:, i] = tot
    return out


def gram_capacity(h, g, rhos):
    """Reference route: assemble ``H_eff`` per trial and factor its Gram matrix."""
    out = np.empty((len(h), len(rhos)))
    for n, hk in enumerate(h):
        eff = assemble_effective_channel(g, hk)
        for i, rho in enumerate(rhos):
            out[n, i] = instantaneous_capacity(eff, rho)
    return out


def snr_to_varrho(snr_db, n_t):
    """``rho = 1 / (Nt sigma^2)`` with unit symbol energy and ``sigma^2 = 10^(-SNR/10)``."""
    return 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0) / n_t


@dataclass(eq=False)
class CapacityResult:
    scenario: str
    correlation: str
    snr_db: np.ndarray
    capacity: np.ndarray       # bit/s/Hz, total / occupied subcarriers
    ci_halfwidth: np.ndarray
    trials: int
    seed: int
    total_bits: np.ndarray     # mean bits per OFDM symbol, all tones
    n_subcarriers: int
    n_streams: int
    samples: Optional[np.ndarray] = field(default=None, repr=False)  # (trials, n_snr) totals

    @property
    def per_stream(self):
        return self.total_bits / self.n_streams

    def rows(self):
        for s, c, h in zip(self.snr_db, self.capacity, self.ci_halfwidth):
            yield (self.scenario, self.correlation, f"{s:g}", f"{c:.10f}", f"{h:.10f}",
                   str(self.trials), str(self.seed))


def write_capacity_csv(results, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for res in results:
            w.writerows(res.rows())


def read_capacity_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _draw_channels(scenario, corr, trials, seed):
    k = scenario.grid.n_occupied
    hs = np.empty((len(trials), k, corr.n_r, corr.n_t), dtype=complex)
    profile = scenario.power_profile
    for i, t in enumerate(trials):
        rng = trial_rng(seed, t)
        if profile is None:
            hs[i] = per_tone_channel(corr, k, rng).per_tone
        else:
            real = tapped_channel(corr, len(profile), profile, rng)
            hs[i] = per_tone_from_taps(real, scenario.grid.occupied, scenario.grid.k_fft).per_tone
    return hs


def capacity_samples(scenario, precoder, snr_db, trials, seed, workers=1, method="deflation"):
    """Per-trial total capacities, ``(trials, len(snr_db))``.

    Trial ``t`` always uses the generator keyed by ``(seed, t)``, and trials
    are processed in fixed-size chunks, so the output does not depend on the
    worker count.
    """
    corr = correlation_matrices(scenario.correlation_spec, scenario.n_t, scenario.n_r)
    rhos = snr_to_varrho(snr_db, scenario.n_t)
    chunks = [range(s, min(s + CHUNK_TRIALS, trials)) for s in range(0, trials, CHUNK_TRIALS)]

    def work(chunk):
        h = _draw_channels(scenario, corr, chunk, seed)
        if method == "gram":
            return gram_capacity(h, precoder, rhos)
        return deflation_capacity(h, precoder.complement(), rhos)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return np.concatenate(parts, axis=0) if parts else np.empty((0, len(rhos)))


def half_width(samples, axis=0):
    """95 % normal-approximation half-width of the mean; 0 for a single trial."""
    samples = np.asarray(samples)
    n = samples.shape[axis]
    if n < 2:
        return np.zeros(np.delete(samples.shape, axis))
    return Z95 * np.std(samples, axis=axis, ddof=1) / np.sqrt(n)


def ergodic_capacity(scenario, snrs=None, trials=None, seed=None, precoder=None,
                     workers=1, method="deflation"):
    """Monte Carlo ergodic capacity of one scenario over its SNR grid."""
    snr_db = np.asarray(scenario.snr_db if snrs is None else snrs, dtype=float)
    trials = scenario.trials if trials is None else int(trials)
    seed = scenario.seed if seed is None else int(seed)
    if trials < 1:
        raise ValueError("need at least one trial")
    if precoder is None:
        precoder = scenario.build_precoder()
    samples = capacity_samples(scenario, precoder, snr_db, trials, seed, workers, method)
    k = precoder.n_subcarriers
    total = samples.mean(axis=0)
    return CapacityResult(
        scenario=scenario.name,
        correlation=scenario.correlation,
        snr_db=snr_db,
        capacity=total / k,
        ci_halfwidth=half_width(samples) / k,
        trials=trials,
        seed=seed,
        total_bits=total,
        n_subcarriers=k,
        n_streams=precoder.n_streams,
        samples=samples,
    )
