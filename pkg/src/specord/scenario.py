"""Scenario definitions, the built-in LTE and desk-scale presets, and JSON loading.

A config file holds ``{"scenarios": [ {...}, ... ]}``.  Each entry needs
``name``, ``precoder`` and ``correlation``; every other key falls back to
the value of the matching preset at the entry's ``scale`` (default
``lte``).  Unknown keys are rejected at every level.
"""
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import LEVELS, CorrelationSpec
from .errors import ConfigError
from .grid import CP_RATIO, LTE_DELTA_F, NotchSpec, SubcarrierGrid, paired_notches
from .precoder import (block_reflector_factorize, constraint_matrix, identity_precoder,
                       leakage_matrix, lsn_precoder, plm_precoder)

PRESETS = ("conventional", "lsn", "plm")
PRECODERS = ("identity", "lsn", "plm")
SCALES = ("lte", "desk")
PRESET_PRECODER = {"conventional": "identity", "lsn": "lsn", "plm": "plm"}

LTE_HALF = 300
DESK_HALF = 32
N_CONSTRAINTS = 8
NOTCH_CENTERS = (5100e3, 6100e3)
NOTCH_OFFSET = 1e3
PLM_BAND = (5e6, 40e6)
PLM_SPACING = 200e3
DEFAULT_SNR = tuple(range(-10, 31, 5))

_SCALE = {
    # k_fft, half width, trials, psd symbols, psd nfft
    "lte": (2048, LTE_HALF, 200, 500, 16384),
    "desk": (128, DESK_HALF, 2000, 10000, 1024),
}


def _shrink(scale):
    """Frequency scaling that maps the LTE occupied band edge onto the desk one."""
    return 1.0 if scale == "lte" else DESK_HALF / LTE_HALF


def default_grid(scale):
    k_fft, half = _SCALE[scale][:2]
    return SubcarrierGrid.symmetric(k_fft, half, LTE_DELTA_F, CP_RATIO)


def default_notch(precoder, scale):
    s = _shrink(scale)
    if precoder == "lsn":
        # band-edge distances scale with the grid; the +-1 kHz pair spacing does not
        return NotchSpec(frequencies=paired_notches([c * s for c in NOTCH_CENTERS], NOTCH_OFFSET))
    if precoder == "plm":
        lo, hi = PLM_BAND[0] * s, PLM_BAND[1] * s
        return NotchSpec(bands=((-hi, -lo), (lo, hi)), sample_spacing=PLM_SPACING * s)
    return NotchSpec()


def default_streams(precoder, lsn_mode, n_occupied):
    if precoder == "identity" or (precoder == "lsn" and lsn_mode == "projector"):
        return n_occupied
    return n_occupied - N_CONSTRAINTS


_PRECODER_CACHE = {}


@dataclass(frozen=True)
class Scenario:
    name: str
    precoder: str
    correlation: str
    scale: str = "lte"
    lsn_mode: str = "orthonormal"
    n_t: int = 2
    n_r: int = 2
    alpha: float = 0.0
    beta: float = 0.0
    snr_db: tuple = DEFAULT_SNR
    trials: int = 200
    seed: int = 0
    grid: SubcarrierGrid = field(default_factory=lambda: default_grid("lte"))
    notch: NotchSpec = field(default_factory=NotchSpec)
    n_streams: int = 600
    power_profile: Optional[tuple] = None
    psd_symbols: int = 500
    psd_nfft: int = 16384

    @property
    def correlation_spec(self):
        return CorrelationSpec(self.alpha, self.beta, self.correlation)

    @property
    def precoder_kind(self):
        if self.precoder == "lsn":
            return "lsn_" + self.lsn_mode
        return self.precoder

    def build_precoder(self):
        key = (self.precoder, self.lsn_mode, self.grid, self.notch, self.n_streams)
        p = _PRECODER_CACHE.get(key)
        if p is None:
            p = _design(self)
            _PRECODER_CACHE[key] = p
        return p

    def to_dict(self):
        g = self.grid
        grid = {"k_fft": g.k_fft, "occupied": list(g.occupied), "delta_f_hz": g.delta_f,
                "cp_ratio": g.t_cp / g.t_s}
        notch = {}
        if self.notch.frequencies:
            notch["frequencies_hz"] = list(self.notch.frequencies)
        if self.notch.bands:
            notch["bands_hz"] = [list(b) for b in self.notch.bands]
            notch["sample_spacing_hz"] = self.notch.sample_spacing
        corr = self.correlation if self.correlation != "custom" else {"alpha": self.alpha, "beta": self.beta}
        return {
            "name": self.name, "scale": self.scale, "precoder": self.precoder,
            "lsn_mode": self.lsn_mode, "n_t": self.n_t, "n_r": self.n_r,
            "correlation": corr, "snr_db": list(self.snr_db), "trials": self.trials,
            "seed": self.seed, "grid": grid, "notch": notch, "n_streams": self.n_streams,
            "power_profile": None if self.power_profile is None else list(self.power_profile),
            "psd_symbols": self.psd_symbols, "psd_nfft": self.psd_nfft,
        }


def _design(sc):
    k = sc.grid.n_occupied
    if sc.precoder == "identity":
        return identity_precoder(k, grid=sc.grid)
    if sc.precoder == "lsn":
        a = constraint_matrix(sc.grid, sc.notch)
        return block_reflector_factorize(lsn_precoder(a, sc.lsn_mode, sc.grid, sc.notch))
    b = leakage_matrix(sc.grid, sc.notch)
    return plm_precoder(b, sc.n_streams, sc.grid, sc.notch)


def preset_scenario(name, correlation, scale="lte"):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}", field="preset")
    return from_dict({"name": f"{name}-{correlation}", "precoder": PRESET_PRECODER[name],
                      "correlation": correlation, "scale": scale})


def preset_scenarios(name, scale="lte", levels=tuple(LEVELS)):
    """One scenario per correlation level for a preset scheme."""
    return [preset_scenario(name, lvl, scale) for lvl in levels]


_TOP_KEYS = {"name", "scale", "precoder", "lsn_mode", "n_t", "n_r", "correlation", "snr_db",
             "trials", "seed", "grid", "notch", "n_streams", "power_profile", "psd_symbols",
             "psd_nfft"}
_GRID_KEYS = {"k_fft", "occupied", "occupied_half_width", "delta_f_hz", "cp_ratio"}
_NOTCH_KEYS = {"frequencies_hz", "bands_hz", "sample_spacing_hz"}


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object", field=where)
    for key in d:
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}", field=key)


def _int(d, key, where, default, minimum=None):
    val = d.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, np.integer)):
        raise ConfigError(f"{where}.{key}: expected an integer, got {val!r}", field=key)
    if minimum is not None and val < minimum:
        raise ConfigError(f"{where}.{key}: must be >= {minimum}", field=key)
    return int(val)


def from_dict(d, where="scenario"):
    _check_keys(d, _TOP_KEYS, where)
    for req in ("name", "precoder", "correlation"):
        if req not in d:
            raise ConfigError(f"{where}: missing required key {req!r}", field=req)
    name = d["name"]
    if not isinstance(name, str) or not name or any(c in name for c in "/\\"):
        raise ConfigError(f"{where}.name: must be a non-empty string without path separators", field="name")
    where = f"{where}[{name}]"
    scale = d.get("scale", "lte")
    if scale not in SCALES:
        raise ConfigError(f"{where}.scale: must be one of {SCALES}", field="scale")
    prec = d["precoder"]
    if prec not in PRECODERS:
        raise ConfigError(f"{where}.precoder: must be one of {PRECODERS}", field="precoder")
    lsn_mode = d.get("lsn_mode", "orthonormal")
    if lsn_mode not in ("orthonormal", "projector"):
        raise ConfigError(f"{where}.lsn_mode: must be 'orthonormal' or 'projector'", field="lsn_mode")

    corr = d["correlation"]
    if isinstance(corr, str):
        if corr not in LEVELS:
            raise ConfigError(f"{where}.correlation: unknown level {corr!r}", field="correlation")
        level, (alpha, beta) = corr, LEVELS[corr]
    elif isinstance(corr, dict):
        _check_keys(corr, {"alpha", "beta"}, f"{where}.correlation")
        level, alpha, beta = "custom", float(corr.get("alpha", 0.0)), float(corr.get("beta", 0.0))
        if abs(alpha) > 1 or abs(beta) > 1:
            raise ConfigError(f"{where}.correlation: |alpha|, |beta| must be <= 1", field="correlation")
    else:
        raise ConfigError(f"{where}.correlation: expected a level name or {{alpha, beta}}", field="correlation")

    _, half, trials0, psd_syms0, psd_nfft0 = _SCALE[scale]
    grid = _grid_from(d.get("grid"), scale, where)
    notch = _notch_from(d.get("notch"), prec, scale, where)

    snr = d.get("snr_db", list(DEFAULT_SNR))
    try:
        snr = tuple(float(s) for s in snr)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.snr_db: expected a list of numbers", field="snr_db") from None
    if not snr or not all(np.isfinite(snr)) or any(b <= a for a, b in zip(snr, snr[1:])):
        raise ConfigError(f"{where}.snr_db: must be a non-empty, finite, ascending list", field="snr_db")

    n_streams = _int(d, "n_streams", where, default_streams(prec, lsn_mode, grid.n_occupied), 1)
    if n_streams > grid.n_occupied:
        raise ConfigError(f"{where}.n_streams: exceeds {grid.n_occupied} occupied tones", field="n_streams")
    if prec == "identity" and n_streams != grid.n_occupied:
        raise ConfigError(f"{where}.n_streams: conventional OFDM uses every occupied tone", field="n_streams")
    if prec == "lsn":
        m = len(notch.frequencies)
        want = grid.n_occupied if lsn_mode == "projector" else grid.n_occupied - m
        if n_streams != want:
            raise ConfigError(f"{where}.n_streams: LSN {lsn_mode} with {m} notches needs {want}", field="n_streams")

    profile = d.get("power_profile")
    if profile is not None:
        try:
            profile = tuple(float(p) for p in profile)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}.power_profile: expected a list of numbers", field="power_profile") from None
        if not profile or min(profile) < 0 or abs(sum(profile) - 1) > 1e-9:
            raise ConfigError(f"{where}.power_profile: must be nonnegative and sum to 1", field="power_profile")

    return Scenario(
        name=name, precoder=prec, correlation=level, scale=scale, lsn_mode=lsn_mode,
        n_t=_int(d, "n_t", where, 2, 1), n_r=_int(d, "n_r", where, 2, 1),
        alpha=alpha, beta=beta, snr_db=snr,
        trials=_int(d, "trials", where, trials0, 1), seed=_int(d, "seed", where, 0, 0),
        grid=grid, notch=notch, n_streams=n_streams, power_profile=profile,
        psd_symbols=_int(d, "psd_symbols", where, psd_syms0, 1),
        psd_nfft=_int(d, "psd_nfft", where, psd_nfft0, 8),
    )


def _grid_from(g, scale, where):
    if g is None:
        return default_grid(scale)
    where = f"{where}.grid"
    _check_keys(g, _GRID_KEYS, where)
    base = default_grid(scale)
    k_fft = _int(g, "k_fft", where, base.k_fft, 2)
    if "occupied" in g and "occupied_half_width" in g:
        raise ConfigError(f"{where}: give 'occupied' or 'occupied_half_width', not both", field="occupied")
    delta_f = float(g.get("delta_f_hz", base.delta_f))
    cp_ratio = float(g.get("cp_ratio", CP_RATIO))
    if delta_f <= 0 or cp_ratio < 0:
        raise ConfigError(f"{where}: delta_f_hz must be > 0 and cp_ratio >= 0", field="delta_f_hz")
    try:
        if "occupied" in g:
            t_s = 1.0 / delta_f
            return SubcarrierGrid(k_fft, tuple(g["occupied"]), delta_f, t_s, cp_ratio * t_s)
        half = _int(g, "occupied_half_width", where, base.n_occupied // 2, 1)
        return SubcarrierGrid.symmetric(k_fft, half, delta_f, cp_ratio)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}", field="occupied") from None


def _notch_from(n, prec, scale, where):
    if n is None:
        return default_notch(prec, scale)
    where = f"{where}.notch"
    _check_keys(n, _NOTCH_KEYS, where)
    try:
        spec = NotchSpec(frequencies=tuple(n.get("frequencies_hz", ())),
                         bands=tuple(tuple(b) for b in n.get("bands_hz", ())),
                         sample_spacing=n.get("sample_spacing_hz"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}", field="notch") from None
    if prec == "lsn" and spec.is_band:
        raise ConfigError(f"{where}: LSN takes discrete frequencies_hz", field="bands_hz")
    if prec == "plm" and not spec.is_band:
        raise ConfigError(f"{where}: PLM needs bands_hz and sample_spacing_hz", field="bands_hz")
    if prec == "identity" and (spec.frequencies or spec.bands):
        raise ConfigError(f"{where}: conventional OFDM takes no notches", field="notch")
    return spec


def load_scenarios(path):
    """Parse and validate a JSON scenario file."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    if not text.strip():
        raise ConfigError(f"{path}: file is empty")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    _check_keys(doc, {"scenarios"}, str(path))
    entries = doc.get("scenarios")
    if not isinstance(entries, list) or not entries:
        raise ConfigError(f"{path}: 'scenarios' must be a non-empty list", field="scenarios")
    out = [from_dict(e, where=f"scenarios[{i}]") for i, e in enumerate(entries)]
    names = [s.name for s in out]
    if len(set(names)) != len(names):
        raise ConfigError(f"{path}: scenario names must be unique", field="name")
    return out
