"""Run scenarios end to end and write capacity / PSD artifacts."""
import dataclasses
import json
import os
import platform
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__, _kernels
from .capacity import ergodic_capacity, write_capacity_csv
from .errors import SpecordError
from .ofdm import modulate_block, psd_estimate
from .precoder import apply_precoder

PSD_STREAM_KEY = 0x7053_4400


def qpsk(rng, shape):
    return (rng.choice((-1.0, 1.0), shape) + 1j * rng.choice((-1.0, 1.0), shape)) / np.sqrt(2)


def transmit_psd(scenario, precoder, n_symbols=None, nfft=None, seed=None):
    """PSD of one antenna's precoded QPSK stream."""
    n_symbols = scenario.psd_symbols if n_symbols is None else n_symbols
    nfft = scenario.psd_nfft if nfft is None else nfft
    seed = scenario.seed if seed is None else seed
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence(int(seed), spawn_key=(PSD_STREAM_KEY,))))
    d = qpsk(rng, (precoder.n_streams, n_symbols))
    xi = apply_precoder(precoder, d).T
    x = modulate_block(scenario.grid, xi)
    trace = psd_estimate(x, nfft, scenario.grid)
    nyq = scenario.grid.sample_rate / 2
    for lo, hi in scenario.notch.bands:
        if max(abs(lo), abs(hi)) > nyq:
            trace.notes.append(
                f"band [{lo:g}, {hi:g}] Hz extends past the +-{nyq:g} Hz sampled span; clipped")
    return trace


def _versions():
    import scipy
    out = {"specord": __version__, "python": platform.python_version(),
           "numpy": np.__version__, "scipy": scipy.__version__}
    try:
        import numba
        out["numba"] = numba.__version__
    except ImportError:  # pragma: no cover
        pass
    return out


def apply_overrides(scenarios, seed=None, trials=None, snr_db=None):
    changes = {}
    if seed is not None:
        changes["seed"] = int(seed)
    if trials is not None:
        changes["trials"] = int(trials)
    if snr_db is not None:
        changes["snr_db"] = tuple(float(s) for s in snr_db)
    return [dataclasses.replace(s, **changes) for s in scenarios]


def run(scenarios, out_dir, seed=None, trials=None, snr_db=None, psd=False, workers=1, log=None):
    """Simulate every scenario and write ``capacity_<name>.csv``, ``capacity.csv``,
    optional ``psd_<name>.csv`` and ``manifest.json`` into ``out_dir``.

    Returns ``(0, manifest)``.  CSV bodies depend only on scenarios and overrides.
    """
    scenarios = apply_overrides(scenarios, seed, trials, snr_db)
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write-test")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        raise SpecordError(f"output directory {out_dir!r} is not writable: {exc.strerror}") from None

    started = time.perf_counter()
    manifest = {
        "started_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "backend": _kernels.BACKEND,
        "versions": _versions(),
        "workers": workers,
        "scenarios": [],
    }
    results = []
    for sc in scenarios:
        t0 = time.perf_counter()
        try:
            precoder = sc.build_precoder()
            res = ergodic_capacity(sc, precoder=precoder, workers=workers)
        except SpecordError as exc:
            raise SpecordError(f"scenario {sc.name!r}: {exc}") from exc
        except (np.linalg.LinAlgError, FloatingPointError) as exc:
            raise SpecordError(f"scenario {sc.name!r}: numerical failure: {exc}") from exc
        results.append(res)
        cap_path = f"capacity_{sc.name}.csv"
        write_capacity_csv([res], os.path.join(out_dir, cap_path))
        entry = {
            "name": sc.name, "seed": sc.seed, "trials": sc.trials,
            "config": sc.to_dict(),
            "n_subcarriers": res.n_subcarriers, "n_streams": res.n_streams,
            "total_bits": [float(v) for v in res.total_bits],
            "capacity_per_stream": [float(v) for v in res.per_stream],
            "artifacts": [cap_path], "notes": [],
        }
        if psd:
            trace = transmit_psd(sc, precoder)
            psd_path = f"psd_{sc.name}.csv"
            trace.to_csv(os.path.join(out_dir, psd_path))
            entry["artifacts"].append(psd_path)
            entry["notes"].extend(trace.notes)
            entry["psd_resolution_bw_hz"] = trace.resolution_bw
        entry["wall_time_s"] = round(time.perf_counter() - t0, 3)
        manifest["scenarios"].append(entry)
        if log:
            log(f"{sc.name}: {sc.trials} trials in {entry['wall_time_s']} s")
    write_capacity_csv(results, os.path.join(out_dir, "capacity.csv"))
    manifest["wall_time_s"] = round(time.perf_counter() - started, 3)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
    return 0, manifest
