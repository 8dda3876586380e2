"""Exit criteria, one test per criterion, each printing a PASS/FAIL line."""
import numpy as np
import pytest
import scipy.linalg
from scipy import integrate

from specord.capacity import capacity_samples, ergodic_capacity, half_width
from specord.channel import CorrelationSpec, correlation_matrices, generate_channel, matrix_to_vec
from specord.cli import main
from specord.precoder import (block_reflector_factorize, constraint_matrix, leakage,
                              leakage_matrix, lsn_precoder, plm_precoder)
from specord.scenario import DEFAULT_SNR, from_dict, preset_scenario
from specord.simulate import transmit_psd

LEVELS = ("low", "medium", "high")


def test_1_correlation_matrices(report):
    ok = True
    for level in ("medium", "high"):
        spec = CorrelationSpec.from_level(level)
        a, b = spec.alpha, spec.beta
        shown = np.array([[1, b, a, a * b], [b, 1, a * b, a], [a, a * b, 1, b], [a * b, a, b, 1]])
        r = correlation_matrices(spec, 2, 2).r_h
        ok &= np.array_equal(r, shown)
    r_med = correlation_matrices(CorrelationSpec.from_level("medium")).r_h
    r_high = correlation_matrices(CorrelationSpec.from_level("high")).r_h
    ok &= r_med[0, 3] == 0.3 * 0.9 and r_high[0, 3] == 0.9 * 0.9
    assert report(1, ok, f"R_H(1,4) medium={r_med[0, 3]:.2f} high={r_high[0, 3]:.2f}, exact structure")


def test_2_coloring_fidelity(report):
    errs = {}
    for i, level in enumerate(LEVELS):
        c = correlation_matrices(CorrelationSpec.from_level(level))
        v = matrix_to_vec(generate_channel(c, np.random.default_rng(100 + i), size=100_000))
        errs[level] = np.linalg.norm(v.T @ v.conj() / len(v) - c.r_h)
    ok = all(e < 0.02 for e in errs.values())
    assert report(2, ok, "Frobenius error " + ", ".join(f"{k}={v:.4f}" for k, v in errs.items()) + " (< 0.02)")


def test_3_notching(report, lte_grid, lte_notch):
    a = constraint_matrix(lte_grid, lte_notch)
    ratios = {m: np.linalg.norm(a @ lsn_precoder(a, m).matrix()) / np.linalg.norm(a)
              for m in ("projector", "orthonormal")}
    lsn_sc = preset_scenario("lsn", "low", "desk")
    conv_sc = preset_scenario("conventional", "low", "desk")
    assert lsn_sc.psd_symbols == conv_sc.psd_symbols == 10_000
    lsn = transmit_psd(lsn_sc, lsn_sc.build_precoder())
    conv = transmit_psd(conv_sc, conv_sc.build_precoder())
    depth = [conv.value_at(f) - lsn.value_at(f) for f in lsn_sc.notch.frequencies]
    ok = max(ratios.values()) < 1e-9 and min(depth) >= 20
    assert report(3, ok, f"|AG|/|A| max={max(ratios.values()):.1e} (< 1e-9); "
                         f"desk notch suppression min={min(depth):.1f} dB (>= 20)")


@pytest.mark.slow
def test_4_plm_optimality(report, lte_grid, lte_band, desk_grid):
    desk = preset_scenario("plm", "low", "desk")
    lines, ok = [], True
    for grid, band, l in ((desk_grid, desk.notch, 56), (lte_grid, lte_band, 592)):
        b = leakage_matrix(grid, band)
        g = plm_precoder(b, l).matrix()
        oracle = scipy.linalg.eigvalsh(b.b, driver="evr", subset_by_index=[0, l - 1]).sum()
        rel = abs(leakage(g, b) - oracle) / abs(oracle)
        orth = np.linalg.norm(g.conj().T @ g - np.eye(l))
        ok &= rel <= 1e-8 and orth < 1e-10
        lines.append(f"K={grid.n_occupied}: rel={rel:.1e}, |GhG-I|={orth:.1e}")
    assert report(4, ok, "; ".join(lines))


def test_5_block_reflectors(report, lte_grid, lte_notch, mac_counter):
    a = constraint_matrix(lte_grid, lte_notch)
    ok, lines = True, []
    for mode in ("projector", "orthonormal"):
        p = block_reflector_factorize(lsn_precoder(a, mode))
        rng = np.random.default_rng(5)
        d = rng.standard_normal((p.n_streams, 100)) + 1j * rng.standard_normal((p.n_streams, 100))
        dense = p.matrix() @ d
        rel = (np.linalg.norm(p.factored.apply(d) - dense, axis=0) / np.linalg.norm(dense, axis=0)).max()
        mac_counter.macs = 0
        p.factored.apply(d[:, 0], matmul=mac_counter)
        fact = mac_counter.macs
        mac_counter.macs = 0
        mac_counter(p.matrix(), d[:, 0])
        ratio = mac_counter.macs / fact
        ok &= rel < 1e-12 and ratio >= 30
        lines.append(f"{mode}: rel={rel:.1e}, MAC ratio={ratio:.1f}x")
    assert report(5, ok, "; ".join(lines) + " (< 1e-12, >= 30x)")


@pytest.mark.slow
def test_6_capacity_oracle(report):
    lines, ok = [], True
    for rho in (1, 10, 100):
        sc = from_dict({"name": "siso", "precoder": "identity", "correlation": "low", "n_t": 1,
                        "n_r": 1, "grid": {"k_fft": 4, "occupied": [1]},
                        "snr_db": [10 * np.log10(rho)]})
        mc = ergodic_capacity(sc, trials=100_000, seed=rho).capacity[0]
        ref = integrate.quad(lambda x: np.log2(1 + rho * x) * np.exp(-x), 0, np.inf)[0]
        rel = abs(mc - ref) / ref
        ok &= rel < 0.01
        lines.append(f"rho={rho}: MC={mc:.4f} quad={ref:.4f} rel={rel:.2%}")
    assert report(6, ok, "; ".join(lines))


def _holds(x, y):
    """``x <= y`` unless the paired difference says otherwise at 95 %."""
    d = x - y
    return d.mean() <= half_width(d)


@pytest.mark.slow
def test_7_capacity_orderings(report):
    seeds = range(5)
    snr = np.asarray(DEFAULT_SNR, dtype=float)
    tally = {k: [0, 0] for k in "abcd"}
    worst_b = 0.0
    for seed in seeds:
        caps = {}
        for level in LEVELS:
            for name in ("conventional", "lsn", "plm"):
                sc = preset_scenario(name, level, "desk")
                p = sc.build_precoder()
                caps[name, level] = capacity_samples(sc, p, snr, 2000, seed) / p.n_subcarriers
        for i, s in enumerate(snr):
            col = {k: v[:, i] for k, v in caps.items()}
            if s >= 0:
                for level in LEVELS:
                    for name in ("lsn", "plm"):
                        tally["a"][0] += _holds(col[name, level], col["conventional", level])
                        tally["a"][1] += 1
                hi_ok = _holds(col["plm", "high"], col["lsn", "high"])
                worst_b = max(worst_b, (col["plm", "high"] - col["lsn", "high"]).mean())
                tally["b"][0] += hi_ok
                tally["b"][1] += 1
            if s >= 10:
                conv = col["conventional", "low"]
                gap_plm = np.abs(col["plm", "low"] - conv)
                gap_lsn = np.abs(col["lsn", "low"] - conv)
                tally["c"][0] += _holds(gap_plm, gap_lsn)
                tally["c"][1] += 1
                tally["d"][0] += (_holds(col["conventional", "medium"], col["conventional", "low"])
                                  and _holds(col["conventional", "high"], col["conventional", "medium"]))
                tally["d"][1] += 1
    frac = {k: h / n for k, (h, n) in tally.items()}
    ok = all(f >= 0.9 for f in frac.values())
    detail = ", ".join(f"({k}) {tally[k][0]}/{tally[k][1]}" for k in "abcd")
    detail += f"; max mean PLM-LSN at high corr = {worst_b:.4f} bit/s/Hz"
    assert report(7, ok, detail + " (each >= 90%)")


def test_8_determinism(report, tmp_path):
    args = ["run", "--preset", "conventional", "--preset", "lsn", "--preset", "plm",
            "--scale", "desk", "--trials", "100", "--seed", "42", "-q"]
    assert main(args + ["--out", str(tmp_path / "r1")]) == 0
    assert main(args + ["--out", str(tmp_path / "r2")]) == 0
    assert main(args + ["--out", str(tmp_path / "r3"), "--workers", "4"]) == 0
    files = sorted(p.name for p in (tmp_path / "r1").glob("capacity*.csv"))
    same = all((tmp_path / "r1" / f).read_bytes() == (tmp_path / r / f).read_bytes()
               for f in files for r in ("r2", "r3"))
    assert report(8, same and len(files) == 10,
                  f"{len(files)} capacity CSVs byte-identical across runs and worker counts")
