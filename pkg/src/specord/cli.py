"""Command line entry point: ``specord run`` and ``specord precoder``."""
import argparse
import sys

import numpy as np

from .channel import LEVELS
from .errors import SpecordError
from .io import save_precoder
from .precoder import leakage, leakage_matrix
from .scenario import PRESETS, SCALES, load_scenarios, preset_scenario, preset_scenarios
from .simulate import run


def _parser():
    ap = argparse.ArgumentParser(prog="specord", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate capacity curves")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON scenario file")
    src.add_argument("--preset", action="append", choices=PRESETS,
                     help="built-in scheme preset (repeatable)")
    r.add_argument("--scale", choices=SCALES, default="lte", help="preset scale (default: lte)")
    r.add_argument("--correlation", action="append", choices=list(LEVELS),
                   help="restrict presets to these levels (repeatable)")
    r.add_argument("--seed", type=int)
    r.add_argument("--trials", type=int)
    r.add_argument("--snr", type=float, nargs="+", metavar="DB", help="SNR grid in dB")
    r.add_argument("--psd", action="store_true", help="also write transmit PSD CSVs")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("-q", "--quiet", action="store_true")

    p = sub.add_parser("precoder", help="design a preset precoder and export it")
    p.add_argument("--preset", required=True, choices=("lsn", "plm"))
    p.add_argument("--scale", choices=SCALES, default="lte")
    p.add_argument("--export", required=True, help="output matrix file")
    return ap


def _cmd_run(args):
    if args.config:
        scenarios = load_scenarios(args.config)
    else:
        levels = tuple(args.correlation) if args.correlation else tuple(LEVELS)
        scenarios = [s for name in args.preset for s in preset_scenarios(name, args.scale, levels)]
    log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    status, _ = run(scenarios, args.out, seed=args.seed, trials=args.trials, snr_db=args.snr,
                    psd=args.psd, workers=args.workers, log=log)
    return status


def _cmd_precoder(args):
    sc = preset_scenario(args.preset, "low", args.scale)
    p = sc.build_precoder()
    save_precoder(p, args.export)
    g = p.matrix()
    msg = f"{p.kind}: K={p.n_subcarriers} L={p.n_streams} m={p.n_constraints}"
    if p.constraints is not None and p.constraints.size:
        msg += f", |A G|/|A| = {np.linalg.norm(p.constraints @ g) / np.linalg.norm(p.constraints):.2e}"
    if sc.notch.is_band:
        msg += f", leakage trace = {leakage(p, leakage_matrix(sc.grid, sc.notch)):.6e}"
    print(msg)
    return 0


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_precoder(args)
    except (SpecordError, OSError) as exc:
        print(f"specord: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
