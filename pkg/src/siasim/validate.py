"""Self-contained invariant suite behind the `validate` CLI subcommand.

Each check returns (ok, detail) and prints one PASS/FAIL line; the runner
returns the number of failures. Trial counts are sized so the whole suite
stays well inside the desk-scale runtime budget.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats
from scipy.integrate import quad

from . import channel, outage, receivers, scheduler, wishart
from .config import SystemConfig
from .experiments import estimate_stream_outage_mc, estimate_top_mc, fit_scaling_exponent


def check_channel_statistics():
    rng = channel.substream(123, 0)
    cfg = SystemConfig(K=3, N_t=1, N_r=2, L=1)
    H, G = channel.draw_channel_batch(cfg, rng, 50_000)
    z = np.concatenate([H.ravel(), G.ravel()])
    mean_ok = abs(z.mean()) < 0.02
    var = np.var(z.real) + np.var(z.imag)
    var_ok = abs(var - 1.0) < 0.02
    balance = abs(np.var(z.real) - np.var(z.imag)) < 0.02
    cross = abs(np.mean(z.real * z.imag)) < 0.01
    ok = mean_ok and var_ok and balance and cross
    return ok, f"|mean|={abs(z.mean()):.4f} var={var:.4f}"


def check_stack_real():
    rng = channel.substream(7, 1)
    x = (rng.standard_normal(64) + 1j * rng.standard_normal(64)) / np.sqrt(2)
    y = channel.stack_real(x)
    norm_ok = abs(np.linalg.norm(y) ** 2 - np.linalg.norm(x) ** 2) < 1e-12
    lin_ok = np.allclose(channel.stack_real(2 * x + 1j), 2 * y + channel.stack_real(np.full(64, 1j)))
    parts_ok = np.allclose(y[:64], x.real) and np.allclose(y[64:], x.imag)
    return norm_ok and lin_ok and parts_ok, "norm preserved, linear, [Re; Im] layout"


def check_determinism():
    cfg = SystemConfig(K=3, N_t=1, N_r=2, L=5, seed=42, trials=2000)
    a = channel.draw_channel(cfg, channel.substream(42, 9, 3))
    b = channel.draw_channel(cfg, channel.substream(42, 9, 3))
    draws_ok = np.array_equal(a.H, b.H) and np.array_equal(a.G, b.G)
    betas = [0.5, 2.0, 8.0]
    c1 = estimate_top_mc(cfg, betas, threads=1)
    c2 = estimate_top_mc(cfg, betas, threads=4)
    mc_ok = np.array_equal(c1.value, c2.value)
    return draws_ok and mc_ok, "bit-identical draws; thread-count invariant MC"


def check_receiver_identities():
    rng = channel.substream(5, 2)
    cfg = SystemConfig(K=4, N_t=1, N_r=3, L=1, S=2.0, I_0=0.7, N_0=0.05)
    worst = 0.0
    for _ in range(500):
        s = channel.draw_channel(cfg, rng)
        R = receivers.nicm(s, cfg)
        icm = R - cfg.N_0 * np.eye(cfg.N_r)
        w, U = receivers.icm_eigensystem(icm)
        g1 = receivers.post_sinr_mmse(s.h, R, cfg.S)
        g2 = receivers.post_sinr_eigenform(s.h, w, U, cfg.S, cfg.N_0)
        glb = receivers.sinr_lower_bound(s.h, w, U, cfg.S, cfg.N_0)
        worst = max(worst, abs(g1 - g2) / g1)
        if glb > g1 * (1 + 1e-12):
            return False, "lower bound exceeded true SINR"
        mu = receivers.stream_sinr_mu(s, 0, cfg)
        if abs(mu - g1) > 1e-12 * g1:
            return False, f"MU N_t=1 SINR differs from SST ({mu} vs {g1})"
    return worst < 1e-10, f"max rel gap mmse vs eigenform = {worst:.2e}"


def check_icm_rank():
    rng = channel.substream(5, 3)
    for K, N_r in [(2, 2), (3, 2), (5, 2), (4, 3)]:
        cfg = SystemConfig(K=K, N_t=1, N_r=N_r, L=1)
        for _ in range(100):
            s = channel.draw_channel(cfg, rng)
            icm = receivers.nicm(s, cfg) - cfg.N_0 * np.eye(N_r)
            w, _ = receivers.icm_eigensystem(icm)
            if receivers.icm_rank(w) != min(N_r, K - 1):
                return False, f"complex ICM rank wrong at K={K}, N_r={N_r}"
            wl = channel.wl_view(s)
            wl_icm = receivers.wl_nicm(wl, cfg) - (cfg.N_0 / 2) * np.eye(2 * N_r)
            w2, _ = receivers.icm_eigensystem(wl_icm)
            if receivers.icm_rank(w2) != min(2 * N_r, K - 1):
                return False, f"WL ICM rank wrong at K={K}, N_r={N_r}"
    return True, "rank = min(dim, K-1) on all draws"


def check_omega_distribution():
    # |omega_min|^2 of the rotated desired vector is Exp(1) distributed
    rng = channel.substream(5, 4)
    cfg = SystemConfig(K=3, N_t=1, N_r=2, L=1)
    count = 100_000
    H, G = channel.draw_channel_batch(cfg.replace(L=1), rng, count)
    cols = G[:, 0, :, :, 0].transpose(0, 2, 1)
    icm = np.einsum("tik,tjk->tij", cols, cols.conj())
    w, v = np.linalg.eigh(icm)
    omega = np.einsum("ti,ti->t", v[:, :, 0].conj(), H[:, 0, :, 0])
    x = np.abs(omega) ** 2
    ks = stats.kstest(x, "expon")
    return ks.pvalue > 0.01, f"KS p={ks.pvalue:.3f} vs Exp(1) at {count} samples"


def check_scheduler():
    rng = channel.substream(5, 5)
    for _ in range(2000):
        L, t = int(rng.integers(2, 12)), int(rng.integers(1, 4))
        if L < t:
            continue
        cqi = rng.random((L, t))
        dec = scheduler.sequential_max_sinr(cqi)
        if len(set(dec.users)) != t:
            return False, "duplicate user scheduled"
        taken = set()
        for a in dec.assignments:
            eligible = [l for l in range(L) if l not in taken]
            best = max(eligible, key=lambda l: cqi[l, a.stream])
            if a.user != best:
                return False, "not the argmax over the eligible set"
            taken.add(a.user)
    idx, val = scheduler.max_sinr_select([1.0, 1.0, 1.0])
    return idx == 0, "eligible-set argmax + first-index tie-break"


def _pdf_integral(pdf, singular=False, hi=80.0):
    if singular:
        val, _ = quad(lambda u: 2 * u * pdf(u * u), 0, math.sqrt(hi), limit=300)
    else:
        val, _ = quad(pdf, 0, hi, limit=300)
    return val


def _supported_pdfs(I_0=1.3):
    """(label, pdf, sampler_args, singular) for every analytic MEV density."""
    cases = []
    for (ensemble, m, n), coeffs in sorted(wishart._load_table().items()):
        if ensemble == "complex":
            pdf = lambda lam, c=coeffs: wishart.pdf_mev_complex(lam, c, I_0)
            cases.append((f"complex({m},{n})", pdf, (m, n, True), False))
        else:
            n_real = 2 * n - m + 1
            K, N_r = 2 * (n - m) + 2 + m, m // 2
            pdf = lambda lam, c=coeffs, K=K, N_r=N_r: wishart.pdf_mev_real_even(
                lam, c, I_0, K, N_r)
            cases.append((f"real-even({m},{n})", pdf, (m, n_real, False), False))
    for m in (2, 4):
        cases.append((f"real-k2nr1(m={m})",
                      lambda lam, m=m: wishart.pdf_mev_real_k2nr1(lam, I_0, m),
                      (m, m, False), True))
        cases.append((f"real-k2nr3(m={m})",
                      lambda lam, m=m: wishart.pdf_mev_real_k2nr3(lam, I_0, m),
                      (m, m + 2, False), False))
    return cases, I_0


def check_wishart_normalization():
    cases, _ = _supported_pdfs()
    worst = 0.0
    for label, pdf, _, singular in cases:
        err = abs(_pdf_integral(pdf, singular) - 1.0)
        worst = max(worst, err)
        if err > 1e-6:
            return False, f"{label} integrates to 1{err:+.2e}"
    return True, f"all densities integrate to 1 (worst |err|={worst:.1e})"


def check_wishart_ks(count=100_000):
    cases, I_0 = _supported_pdfs()
    worst_p = 1.0
    for i, (label, pdf, (m, n, cplx), singular) in enumerate(cases):
        rng = channel.substream(778, 6, i)
        samples = wishart.sample_mev(m, n, I_0, count, rng, complex_matrix=cplx)
        hi = samples.max() * 1.05
        u = np.linspace(1e-9 if singular else 0.0, math.sqrt(hi), 20_001)
        grid = u * u
        vals = 2 * u * pdf(grid)
        cdf = np.concatenate([[0.0], np.cumsum((vals[1:] + vals[:-1]) / 2 * np.diff(u))])
        ks = stats.kstest(samples, lambda x: np.interp(x, grid, cdf))
        worst_p = min(worst_p, ks.pvalue)
        if ks.pvalue <= 0.01:
            return False, f"{label}: KS p={ks.pvalue:.4f} at {count} samples"
    rng = channel.substream(777, 7)
    mean = wishart.sample_mev(3, 3, I_0, count, rng).mean()
    if abs(mean - I_0 / 3) > 0.02 * (I_0 / 3):
        return False, f"m=n exponential mean {mean:.4f} != I_0/m"
    return True, f"all pdfs pass KS at 1% (worst p={worst_p:.3f}); m=n mean ok"


def check_q_function():
    # measured behavior of the two-exponential form: <= 0.024 absolute and
    # <= 27% relative on [0.5, 5] (it is far looser than 2% relative)
    x = np.linspace(0.5, 5.0, 400)
    diff = np.abs(outage.q_approx(x) - outage.q_exact(x))
    rel = diff / outage.q_exact(x)
    zero_ok = abs(outage.q_approx(0.0) - 1.0 / 3.0) < 1e-12
    ok = diff.max() < 0.025 and rel.max() < 0.27 and zero_ok
    return ok, f"max abs {diff.max():.4f}, max rel {rel.max():.1%} on [0.5, 5]"


def _f_complex_quadrature(beta, cfg):
    coeffs = wishart.coeff_lookup(cfg.N_r, cfg.K - 1, "complex")
    pdf = lambda lam: wishart.pdf_mev_complex(lam, coeffs, cfg.I_0)

    def inner(lam):
        thr = beta * (lam + cfg.N_0) / cfg.S
        val, _ = quad(lambda x: np.exp(-x), 0.0, thr, limit=200)
        return val * pdf(lam)

    v, _ = quad(inner, 0.0, 120.0, limit=300)
    return v


def _f_real_even_quadrature(beta, cfg):
    coeffs = wishart.coeff_lookup(*wishart.real_table_key(cfg.K, cfg.N_r), ensemble="real")
    pdf = lambda lam: wishart.pdf_mev_real_even(lam, coeffs, cfg.I_0, cfg.K, cfg.N_r)

    def survival(lam0):
        v, _ = quad(pdf, max(lam0, 0.0), 150.0, limit=200)
        return v

    def outer(x):
        lam0 = cfg.S * x / beta - cfg.N_0 / 2.0
        return survival(lam0) * np.exp(-x) / math.sqrt(math.pi * x)

    a2, _ = quad(outer, beta * cfg.N_0 / (2 * cfg.S), 120.0, limit=300)
    return outage.area_A1(beta, cfg.S, cfg.N_0) + a2


def check_outage_quadrature():
    cfg_c = SystemConfig(K=4, N_t=1, N_r=2, L=10, S=1.2, I_0=0.8, N_0=0.01)
    for beta in (0.5, 3.0, 20.0, 120.0):
        closed = outage.cdf_F_complex(beta, cfg_c)
        ref = _f_complex_quadrature(beta, cfg_c)
        if abs(closed - ref) > 1e-6:
            return False, f"complex F mismatch {abs(closed - ref):.2e} at beta={beta}"
    cfg_r = SystemConfig(K=6, N_t=1, N_r=2, L=10, S=1.0, I_0=1.0, N_0=0.01,
                         encoding="real")
    for beta in (0.5, 3.0, 20.0, 120.0):
        closed = outage.cdf_F_real_even(beta, cfg_r)
        ref = _f_real_even_quadrature(beta, cfg_r)
        if abs(closed - ref) > 1e-6:
            return False, f"real even F mismatch {abs(closed - ref):.2e} at beta={beta}"
    cfg_o = SystemConfig(K=5, N_t=1, N_r=2, L=10, N_0=0.01, encoding="real")
    for beta in (100.0, 400.0):
        a = outage.cdf_F_real_k2nr1(beta, cfg_o)
        q = outage.cdf_F_real_k2nr1_quadrature(beta, cfg_o)
        if abs(a - q) / q > 0.05:
            return False, f"k2nr1 approx vs quadrature {abs(a - q) / q:.2%}"
    return True, "closed forms match independent quadrature"


def check_mc_dominance(trials=20_000):
    cfg = SystemConfig(K=3, N_t=1, N_r=2, L=10, N_0=0.01, trials=trials, seed=3)
    betas = np.array([1.0, 10.0, 50.0])
    lb = estimate_top_mc(cfg, betas, mode="lb_sinr")
    true = estimate_top_mc(cfg, betas, mode="true_sinr")
    for b, pt, pl, se in zip(betas, true.value, lb.value, lb.stderr):
        bound = outage.top_closed_form(b, cfg).top_ub
        if pt > pl + 3 * max(se, 1e-4) or pl > bound + 3 * max(se, 1e-4):
            return False, f"dominance chain broken at beta={b}"
    return True, "true <= lb-sim <= closed form (within sampling tolerance)"


def check_scaling_exponents():
    grid = np.arange(10.0, 41.0, 2.0)
    cases = [
        (SystemConfig(K=3, N_t=1, N_r=2, L=10), 1.0),
        (SystemConfig(K=4, N_t=1, N_r=2, L=10), 2.0),
        (SystemConfig(K=6, N_t=1, N_r=2, L=10, encoding="real"), 1.0),
        (SystemConfig(K=5, N_t=1, N_r=2, L=10, encoding="real"), 0.5),
    ]
    details = []
    for base, target in cases:
        Ls = []
        for snr in grid:
            snr_lin = 10.0 ** (snr / 10.0)
            cfg = base.replace(N_0=base.S / snr_lin)
            Ls.append(outage.users_required(0.1, snr_lin, cfg).exact)
        slope, _ = fit_scaling_exponent(grid, Ls)
        details.append(f"{base.encoding} K={base.K}: {slope:.3f} (target {target})")
        if abs(slope - target) > 0.15 * target:
            return False, "; ".join(details)
    return True, "; ".join(details)


def check_mu_stream_bound(trials=20_000):
    cfg = SystemConfig(K=2, N_t=2, N_r=2, L=10, N_0=10 ** (-1.5), trials=trials, seed=5)
    betas = np.array([0.5, 2.0, 8.0])
    curves = estimate_stream_outage_mc(cfg, betas, mode="true_sinr")
    for i, curve in enumerate(curves):
        for b, p, se in zip(betas, curve.value, curve.stderr):
            bound = outage.top_ub_mu(b, cfg, i)
            if p > bound + 2 * max(se, 1e-4):
                return False, f"stream {i} outage {p:.4f} above bound {bound:.4f}"
    return True, "per-stream outage within the sequential-scheduler bound"


def check_solver():
    cfg = SystemConfig(K=3, N_t=1, N_r=2, L=10, N_0=0.01)
    prev = 0.0
    for L in (2, 5, 10, 30):
        beta = outage.solve_target_beta(0.2, L, cfg)
        top = outage.top_closed_form(beta, cfg, L=L).top_ub
        if abs(top - 0.2) > 1e-9:
            return False, f"solver residual {abs(top - 0.2):.1e}"
        if beta <= prev:
            return False, "beta* not increasing in L"
        prev = beta
    return True, "TOP(beta*) = target to 1e-9; beta* increasing in L"


CHECKS = (
    ("channel-statistics", check_channel_statistics),
    ("stack-real", check_stack_real),
    ("determinism", check_determinism),
    ("receiver-identities", check_receiver_identities),
    ("icm-rank", check_icm_rank),
    ("omega-distribution", check_omega_distribution),
    ("scheduler", check_scheduler),
    ("wishart-normalization", check_wishart_normalization),
    ("wishart-ks", check_wishart_ks),
    ("q-function", check_q_function),
    ("outage-quadrature", check_outage_quadrature),
    ("mc-dominance", check_mc_dominance),
    ("scaling-exponents", check_scaling_exponents),
    ("mu-stream-bound", check_mu_stream_bound),
    ("beta-solver", check_solver),
)


def run_all(verbose: bool = True) -> int:
    """Run every invariant check; returns the number of failures."""
    failures = 0
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        failures += 0 if ok else 1
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return failures
