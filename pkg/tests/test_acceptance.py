"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Reference capacity values are asserted exactly as stated. Three of them
(marked below) are internally inconsistent with the system model and are
not reproducible by any faithful simulation; those assertions fail with a
quantified message, and companion tests right below them demonstrate that
the values are reproduced under the corrected parameter assignments
(a K=3/K=4 row transposition in one source table and a 20 vs 30 dB column
label in the other).
"""

import math
import time

import numpy as np
from scipy.integrate import quad

from siasim import (
    SystemConfig,
    cdf_F_complex,
    cdf_F_real_even,
    cdf_F_real_even_approx,
    cdf_F_real_k2nr1,
    cdf_F_real_k2nr3,
    coeff_lookup,
    draw_channel,
    estimate_mean_sum_capacity,
    estimate_stream_outage_mc,
    estimate_top_mc,
    fit_scaling_exponent,
    icm_eigensystem,
    nicm,
    pdf_mev_complex,
    pdf_mev_real_even,
    pdf_mev_real_k2nr3,
    post_sinr_eigenform,
    post_sinr_mmse,
    real_table_key,
    sequential_max_sinr,
    sinr_lower_bound,
    stream_sinr_mu,
    substream,
    top_closed_form,
    top_ub_mu,
    users_required,
)
from siasim.outage import cdf_F_real_k2nr1_quadrature
from siasim.validate import check_wishart_ks, check_wishart_normalization


def _report(criterion: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {'PASS' if ok else 'FAIL'} {criterion}: {detail}")


def _mean_capacity(N_r, L, K, snr_db, encoding, seed=0, trials=1000):
    cfg = SystemConfig(K=K, N_t=1, N_r=N_r, L=L, encoding=encoding,
                       trials=trials, seed=seed)
    t0 = time.perf_counter()
    curve = estimate_mean_sum_capacity(cfg, [snr_db])
    return float(curve.value[0]), float(curve.stderr[0]), time.perf_counter() - t0


def test_c1_mean_capacity_nr1_cells():
    cells = [
        (1, 10, 3, 5.0, "complex", 4.75, 0.3),
        (1, 10, 3, 30.0, "real", 11.0, 0.6),
        # stated cell; the source table's K=3/K=4 real rows are transposed
        # in this column, so the faithful K=4 simulation cannot reach it
        (1, 50, 4, 30.0, "real", 14.9, 0.8),
    ]
    lines, ok = [], True
    for N_r, L, K, snr, enc, expect, tol in cells:
        value, se, elapsed = _mean_capacity(N_r, L, K, snr, enc)
        hit = abs(value - expect) <= tol and elapsed < 60.0
        ok &= hit
        lines.append(f"{enc} K={K} L={L} SNR={snr:.0f}: {value:.2f} "
                     f"(target {expect}+-{tol}, {elapsed:.1f}s)")
    _report("C1 table-nr1 reproduction", ok, "; ".join(lines))
    assert ok, "; ".join(lines)


def test_c1_companion_transposed_cells_reproduce():
    # the 14.9 value is reproduced by K=3 at the same L/SNR, and the K=4
    # simulation lands on the 12.5 printed in the K=3 slot
    v3, _, _ = _mean_capacity(1, 50, 3, 30.0, "real")
    v4, _, _ = _mean_capacity(1, 50, 4, 30.0, "real")
    assert abs(v3 - 14.9) <= 0.8
    assert abs(v4 - 12.5) <= 0.8


def test_c2_mean_capacity_nr2_cells():
    cells = [
        # stated cells; this source column is labeled 20 dB but its values
        # match a 30 dB operating point (see companion test)
        (2, 50, 3, 20.0, "complex", 21.4, 0.8),
        (2, 50, 5, 20.0, "real", 25.97, 1.0),
    ]
    lines, ok = [], True
    for N_r, L, K, snr, enc, expect, tol in cells:
        value, se, elapsed = _mean_capacity(N_r, L, K, snr, enc)
        hit = abs(value - expect) <= tol
        ok &= hit
        lines.append(f"{enc} K={K} L={L} SNR={snr:.0f}: {value:.2f} "
                     f"(target {expect}+-{tol}, {elapsed:.1f}s)")
    _report("C2 table-nr2 reproduction", ok, "; ".join(lines))
    assert ok, "; ".join(lines)


def test_c2_companion_column_reproduces_at_30db():
    for K, enc, expect, tol in [(3, "complex", 21.4, 0.8), (4, "complex", 15.84, 0.8),
                                (5, "complex", 13.66, 0.8), (3, "real", 19.67, 1.0),
                                (4, "real", 25.14, 1.0), (5, "real", 25.97, 1.0)]:
        value, _, _ = _mean_capacity(2, 50, K, 30.0, enc)
        assert abs(value - expect) <= tol, f"{enc} K={K}: {value:.2f} vs {expect}"


def test_c3_top_bound_tightness_complex():
    cfg = SystemConfig.at_snr_db(20.0, K=3, N_t=1, N_r=2, L=10, seed=2,
                                 trials=100_000)
    beta_db = np.arange(-10.0, 31.0, 2.0)
    betas = 10.0 ** (beta_db / 10.0)
    t0 = time.perf_counter()
    curve = estimate_top_mc(cfg, betas, mode="lb_sinr")
    elapsed = time.perf_counter() - t0
    forms = np.array([top_closed_form(b, cfg).top_ub for b in betas])
    se = np.sqrt(forms * (1.0 - forms) / curve.trials)
    mask = forms >= 1e-3
    worst = float((np.abs(curve.value - forms)[mask] / se[mask]).max())
    ok = worst <= 2.0 and elapsed < 120.0
    _report("C3 complex TOP bound tightness", ok,
            f"max |MC-F^L| = {worst:.2f} null-stderr over {int(mask.sum())} "
            f"grid points, {elapsed:.1f}s at 1e5 trials")
    assert ok


def test_c4_real_encoding_top_tightness():
    beta_db = np.arange(15.0, 31.0, 1.0)
    betas = 10.0 ** (beta_db / 10.0)
    lines, ok = [], True

    cfg6 = SystemConfig.at_snr_db(20.0, K=6, N_t=1, N_r=2, L=10,
                                  encoding="real", seed=0, trials=100_000)
    mc6 = estimate_top_mc(cfg6, betas, mode="lb_sinr")
    dev6 = float(np.abs(
        mc6.value - [top_closed_form(b, cfg6).top_ub for b in betas]).max())
    hit6 = dev6 <= 0.03
    ok &= hit6
    lines.append(f"K=6 exact A1+A2: max abs dev {dev6:.4f}")

    # K = 2N_r + 1: the two-exponential Q approximation carries an
    # irreducible ~6% absolute error around beta ~ 20 dB, so the stated 3%
    # band cannot hold across this range
    cfg5 = SystemConfig.at_snr_db(20.0, K=5, N_t=1, N_r=2, L=10,
                                  encoding="real", seed=0, trials=100_000)
    mc5 = estimate_top_mc(cfg5, betas, mode="lb_sinr")
    dev5 = float(np.abs(
        mc5.value - [top_closed_form(b, cfg5).top_ub for b in betas]).max())
    hit5 = dev5 <= 0.03
    ok &= hit5
    lines.append(f"K=5 approximation: max abs dev {dev5:.4f}")

    _report("C4 real TOP closed forms within 3% absolute (beta >= 15 dB)",
            ok, "; ".join(lines))
    assert ok, "; ".join(lines)


def test_c4_companion_k5_quadrature_matches_mc():
    # with the exact projection-power cdf under the integral (no Q
    # approximation) the K=5 curve matches Monte Carlo to sampling noise
    cfg5 = SystemConfig.at_snr_db(20.0, K=5, N_t=1, N_r=2, L=10,
                                  encoding="real", seed=0, trials=100_000)
    beta_db = np.arange(15.0, 31.0, 3.0)
    betas = 10.0 ** (beta_db / 10.0)
    mc = estimate_top_mc(cfg5, betas, mode="lb_sinr")
    from siasim.outage import q_exact
    from siasim.wishart import pdf_mev_real_k2nr1

    def f_exact(beta):
        val, _ = quad(
            lambda u: 2 * u * pdf_mev_real_k2nr1(u * u, 1.0, 4)
            * (1 - 2 * q_exact(math.sqrt(2 * beta * (u * u + cfg5.N_0 / 2)))),
            0.0, 8.0, limit=300)
        return val

    forms = np.array([f_exact(b) ** cfg5.L for b in betas])
    assert np.abs(mc.value - forms).max() < 0.005


def test_c5_wishart_density_validation():
    ok_norm, detail_norm = check_wishart_normalization()
    ok_ks, detail_ks = check_wishart_ks(count=100_000)
    ok = ok_norm and ok_ks
    _report("C5 MEV density validation", ok, f"{detail_norm}; {detail_ks}")
    assert ok


def test_c6_scaling_law_recovery():
    grid = np.arange(10.0, 41.0, 2.0)
    cases = [
        (SystemConfig(K=3, N_t=1, N_r=2, L=10), 1.0, "complex K=3"),
        (SystemConfig(K=4, N_t=1, N_r=2, L=10), 2.0, "complex K=4"),
        (SystemConfig(K=6, N_t=1, N_r=2, L=10, encoding="real"), 1.0, "real K=6"),
        (SystemConfig(K=8, N_t=1, N_r=2, L=10, encoding="real"), 2.0, "real K=8"),
        (SystemConfig(K=5, N_t=1, N_r=2, L=10, encoding="real"), 0.5, "real K=5"),
    ]
    lines, ok = [], True
    for base, target, label in cases:
        Ls = []
        for snr in grid:
            snr_lin = 10.0 ** (snr / 10.0)
            cfg = base.replace(N_0=base.S / snr_lin)
            Ls.append(users_required(0.1, snr_lin, cfg).exact)
        slope, _ = fit_scaling_exponent(grid, Ls)
        hit = abs(slope - target) <= 0.15 * target
        ok &= hit
        lines.append(f"{label}: {slope:.3f} (target {target})")
    _report("C6 scaling exponents within 15%", ok, "; ".join(lines))
    assert ok, "; ".join(lines)


def _complex_f_2d_quadrature(beta, cfg):
    coeffs = coeff_lookup(cfg.N_r, cfg.K - 1, "complex")

    def inner(lam):
        thr = beta * (lam + cfg.N_0) / cfg.S
        mass, _ = quad(lambda x: math.exp(-x), 0.0, thr, limit=100)
        return mass * pdf_mev_complex(lam, coeffs, cfg.I_0)

    val, _ = quad(inner, 0.0, 120.0, limit=250)
    return val


def _real_even_f_2d_quadrature(beta, cfg):
    coeffs = coeff_lookup(*real_table_key(cfg.K, cfg.N_r), ensemble="real")
    pdf = lambda lam: pdf_mev_real_even(lam, coeffs, cfg.I_0, cfg.K, cfg.N_r)

    def survival(lam0):
        val, _ = quad(pdf, max(lam0, 0.0), 160.0, limit=200)
        return val

    def outer(x):
        lam0 = cfg.S * x / beta - cfg.N_0 / 2.0
        return survival(lam0) * math.exp(-x) / math.sqrt(math.pi * x)

    from siasim import area_A1

    a2, _ = quad(outer, beta * cfg.N_0 / (2 * cfg.S), 130.0, limit=300)
    return area_A1(beta, cfg.S, cfg.N_0) + a2


def test_c7_oracle_equivalence():
    lines, ok = [], True
    # exact forms against nested 2-D quadrature, 1e-6
    worst = 0.0
    for cfg in (SystemConfig(K=3, N_t=1, N_r=2, L=10, N_0=0.01),
                SystemConfig(K=4, N_t=1, N_r=2, L=10, S=1.3, I_0=0.6, N_0=0.02)):
        for beta in (0.5, 4.0, 40.0):
            worst = max(worst, abs(cdf_F_complex(beta, cfg)
                                   - _complex_f_2d_quadrature(beta, cfg)))
    hit = worst <= 1e-6
    ok &= hit
    lines.append(f"complex F vs quadrature: {worst:.1e}")

    worst = 0.0
    for cfg in (SystemConfig(K=6, N_t=1, N_r=2, L=10, N_0=0.01, encoding="real"),
                SystemConfig(K=8, N_t=1, N_r=2, L=10, S=1.4, I_0=0.9, N_0=0.05,
                             encoding="real")):
        for beta in (0.5, 4.0, 40.0):
            worst = max(worst, abs(cdf_F_real_even(beta, cfg)
                                   - _real_even_f_2d_quadrature(beta, cfg)))
    hit = worst <= 1e-6
    ok &= hit
    lines.append(f"even-K A1+A2 vs quadrature: {worst:.1e}")

    # high-SNR approximations within 5% at beta >= 20 dB
    worst = 0.0
    cfg5 = SystemConfig.at_snr_db(20.0, K=5, N_t=1, N_r=2, L=10, encoding="real")
    for bdb in (20.0, 25.0, 30.0):
        b = 10 ** (bdb / 10)
        ref = cdf_F_real_k2nr1_quadrature(b, cfg5)
        worst = max(worst, abs(cdf_F_real_k2nr1(b, cfg5) - ref) / ref)
    cfg7 = SystemConfig.at_snr_db(20.0, K=7, N_t=1, N_r=2, L=10, encoding="real")

    def k2nr3_quadrature(beta):
        acc = 0.0
        for w, c in ((1 / 12, 0.5), (1 / 4, 2 / 3)):
            val, _ = quad(
                lambda u: 2 * u * pdf_mev_real_k2nr3(u * u, 1.0, 4)
                * math.exp(-2 * c * beta * (u * u + cfg7.N_0 / 2)),
                0.0, 10.0, limit=300)
            acc += w * val
        return 1.0 - 2.0 * acc

    for bdb in (20.0, 25.0, 30.0):
        b = 10 ** (bdb / 10)
        ref = k2nr3_quadrature(b)
        worst = max(worst, abs(cdf_F_real_k2nr3(b, cfg7) - ref) / ref)
    cfg6 = SystemConfig.at_snr_db(20.0, K=6, N_t=1, N_r=2, L=10, encoding="real")
    for bdb in (20.0, 25.0, 30.0):
        b = 10 ** (bdb / 10)
        ref = cdf_F_real_even(b, cfg6)
        worst = max(worst, abs(cdf_F_real_even_approx(b, cfg6) - ref) / ref)
    hit = worst <= 0.05
    ok &= hit
    lines.append(f"high-SNR approximations vs quadrature: {worst:.2%}")

    _report("C7 oracle equivalence", ok, "; ".join(lines))
    assert ok, "; ".join(lines)


def test_c8_receiver_identities():
    cfg = SystemConfig(K=4, N_t=1, N_r=2, L=1, S=1.2, I_0=0.8, N_0=0.03)
    rng = substream(0, 80)
    worst_rel = 0.0
    t0 = time.perf_counter()
    for _ in range(10_000):
        s = draw_channel(cfg, rng)
        R = nicm(s, cfg)
        w, U = icm_eigensystem(R - cfg.N_0 * np.eye(cfg.N_r))
        g_mmse = post_sinr_mmse(s.h, R, cfg.S)
        g_eig = post_sinr_eigenform(s.h, w, U, cfg.S, cfg.N_0)
        g_lb = sinr_lower_bound(s.h, w, U, cfg.S, cfg.N_0)
        worst_rel = max(worst_rel, abs(g_mmse - g_eig) / g_mmse)
        assert g_lb <= g_mmse * (1 + 1e-12)
        assert stream_sinr_mu(s, 0, cfg) == g_mmse  # N_t = 1: identical path
    ok = worst_rel <= 1e-10
    _report("C8 receiver identities", ok,
            f"max |mmse-eigenform| rel = {worst_rel:.2e} over 1e4 draws "
            f"({time.perf_counter() - t0:.1f}s); bound and MU identities exact")
    assert ok


def test_c9_scheduler_properties_and_mu_bound():
    rng = substream(0, 81)
    for _ in range(10_000):
        L = int(rng.integers(2, 10))
        t = int(rng.integers(1, min(L, 4) + 1))
        cqi = rng.random((L, t))
        dec = sequential_max_sinr(cqi)
        assert len(set(dec.users)) == t
        taken = set()
        for a in dec.assignments:
            eligible = [l for l in range(L) if l not in taken]
            assert a.user == max(eligible, key=lambda l: cqi[l, a.stream])
            taken.add(a.user)

    cfg = SystemConfig.at_snr_db(15.0, K=2, N_t=2, N_r=2, L=10, seed=1,
                                 trials=100_000)
    betas = np.array([0.25, 0.5, 1.0, 2.0, 4.0, 8.0])
    curves = estimate_stream_outage_mc(cfg, betas, mode="true_sinr")
    worst = -np.inf
    for i, curve in enumerate(curves):
        for b, p, se in zip(betas, curve.value, curve.stderr):
            bound = top_ub_mu(b, cfg, i)
            worst = max(worst, p - bound - 2 * max(se, 1e-5))
    ok = worst <= 0.0
    _report("C9 scheduler properties + per-stream bound", ok,
            f"1e4 CQI tables distinct/argmax ok; max (outage - bound - 2se) "
            f"= {worst:.2e} at 1e5 trials")
    assert ok


def test_c10_runtime_budget(tmp_path):
    from siasim.cli import main
    from siasim.validate import run_all

    t0 = time.perf_counter()
    failures = run_all(verbose=False)
    from siasim.figures import FIGURE_IDS, TABLE_IDS

    for fid in FIGURE_IDS:
        assert main(["figure", fid, "--out", str(tmp_path)]) == 0
    for tid in TABLE_IDS:
        assert main(["table", tid, "--out", str(tmp_path)]) == 0
    elapsed = time.perf_counter() - t0
    ok = elapsed < 1800.0 and failures == 0
    _report("C10 runtime budget", ok,
            f"validate + all figures/tables in {elapsed:.0f}s "
            f"(budget 1800s), {failures} validate failures")
    assert ok
