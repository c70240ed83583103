import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from siasim import (
    BracketingError,
    SystemConfig,
    UnsupportedAnalyticsError,
    area_A1,
    area_A2,
    cdf_F_complex,
    cdf_F_real_even,
    cdf_F_real_even_approx,
    cdf_F_real_k2nr1,
    cdf_F_real_k2nr3,
    coeff_lookup,
    pdf_mev_complex,
    pdf_mev_real_even,
    pdf_mev_real_k2nr3,
    q_approx,
    q_exact,
    real_table_key,
    solve_target_beta,
    substream,
    sum_outage_capacity,
    top_closed_form,
    top_ub,
    top_ub_mu,
    users_required,
    users_required_complex,
)
from siasim.outage import cdf_F_real_k2nr1_quadrature

CFG_C = SystemConfig.at_snr_db(20.0, K=3, N_t=1, N_r=2, L=10)
CFG_R6 = SystemConfig.at_snr_db(20.0, K=6, N_t=1, N_r=2, L=10, encoding="real")
CFG_R5 = SystemConfig.at_snr_db(20.0, K=5, N_t=1, N_r=2, L=10, encoding="real")
CFG_R5_NR1 = SystemConfig.at_snr_db(20.0, K=5, N_t=1, N_r=1, L=10, encoding="real")


def test_q_functions():
    assert np.allclose(q_exact([0.0, 1.0]), [0.5, norm.sf(1.0)])
    assert q_approx(0.0) == pytest.approx(1.0 / 3.0)
    assert q_approx(50.0) < 1e-200
    # measured accuracy of the two-exponential form on [0.5, 5]
    x = np.linspace(0.5, 5.0, 500)
    diff = np.abs(q_approx(x) - q_exact(x))
    assert diff.max() < 0.025
    assert (diff / q_exact(x)).max() < 0.27


def test_cdf_F_complex_limits_and_form():
    assert cdf_F_complex(0.0, CFG_C) == pytest.approx(0.0)
    # N_r = K-1 = 2, S = I_0 = 1, vanishing noise: F = 1 - 2/(beta+2)
    cfg0 = CFG_C.replace(N_0=1e-12)
    for beta in (0.5, 2.0, 10.0):
        assert cdf_F_complex(beta, cfg0) == pytest.approx(1 - 2 / (beta + 2), abs=1e-9)
    betas = np.linspace(0.01, 50, 80)
    vals = [cdf_F_complex(b, CFG_C) for b in betas]
    assert np.all(np.diff(vals) > 0)
    assert all(0 <= v <= 1 for v in vals)


def test_cdf_F_complex_matches_2d_quadrature():
    cfg = SystemConfig(K=4, N_t=1, N_r=2, L=10, S=1.3, I_0=0.6, N_0=0.02)
    coeffs = coeff_lookup(2, 3, "complex")

    def oracle(beta):
        def inner(lam):
            thr = beta * (lam + cfg.N_0) / cfg.S
            mass, _ = quad(lambda x: math.exp(-x), 0, thr, limit=100)
            return mass * pdf_mev_complex(lam, coeffs, cfg.I_0)

        val, _ = quad(inner, 0, 100, limit=200)
        return val

    for beta in (0.3, 2.0, 15.0, 80.0):
        assert abs(cdf_F_complex(beta, cfg) - oracle(beta)) < 1e-6


def test_top_ub_basics():
    assert top_ub(0.5, 3) == pytest.approx(0.125)
    assert top_ub(0.7, 1) == pytest.approx(0.7)
    assert top_ub(0.7, 10) < top_ub(0.7, 5)
    with pytest.raises(ValueError):
        top_ub(1.2, 3)
    with pytest.raises(ValueError):
        top_ub(0.5, 0)


def test_top_ub_matches_empirical_max_of_L():
    # empirical max-of-L outage frequency within binomial confidence
    rng = substream(0, 40)
    F_target, L, n = 0.6, 4, 200_000
    beta = None
    lo, hi = 1e-6, 1e6
    for _ in range(80):  # invert F numerically
        mid = 0.5 * (lo + hi)
        if cdf_F_complex(mid, CFG_C) < F_target:
            lo = mid
        else:
            hi = mid
    beta = 0.5 * (lo + hi)
    # sample the lower-bound SINR directly from its construction
    g = (rng.standard_normal((n, L, 2, 2)) + 1j * rng.standard_normal((n, L, 2, 2))) / np.sqrt(2)
    h = (rng.standard_normal((n, L, 2)) + 1j * rng.standard_normal((n, L, 2))) / np.sqrt(2)
    icm = np.einsum("tlka,tlkb->tlab", g, g.conj())
    w, v = np.linalg.eigh(icm)
    lam = w[..., 0].real
    om = np.einsum("tla,tla->tl", v[..., 0].conj(), h)
    gamma = np.abs(om) ** 2 / (lam + CFG_C.N_0)
    p_hat = (gamma.max(axis=1) < beta).mean()
    expect = top_ub(F_target, L)
    assert abs(p_hat - expect) < 3 * math.sqrt(expect * (1 - expect) / n)


def test_users_required_complex():
    req = users_required_complex(0.1, 100.0, CFG_C)
    assert req.exact > 1 and req.approx > 1
    assert req.large_argument
    # beta -> 0: one user suffices
    assert users_required_complex(0.1, 1e-9, CFG_C).exact == 1.0
    with pytest.raises(ValueError):
        users_required_complex(1.5, 1.0, CFG_C)


def test_users_required_exact_vs_approx_in_regime():
    # agreement within 10% once beta I_0/S >= 10 m
    cfg = CFG_C.replace(N_0=1e-4)
    m = 2
    for beta in (10 * m, 40 * m, 200 * m):
        req = users_required_complex(0.05, float(beta), cfg)
        assert req.large_argument
        assert abs(req.approx - req.exact) / req.exact < 0.10


def test_sum_outage_capacity_by_encoding():
    assert sum_outage_capacity(1.0, SystemConfig(K=3, N_t=1, N_r=1, L=1)) == pytest.approx(3.0)
    cfg_real = SystemConfig(K=3, N_t=1, N_r=1, L=1, encoding="real")
    assert sum_outage_capacity(1.0, cfg_real) == pytest.approx(1.5)  # half pre-log
    # t = 2 N_t real-encoded matches complex MU capacity
    mu = SystemConfig(K=2, N_t=3, N_r=2, L=6)
    real2nt = SystemConfig(K=2, N_t=6, N_r=2, L=6, encoding="real")
    assert sum_outage_capacity(5.0, mu) == pytest.approx(sum_outage_capacity(5.0, real2nt))
    mixed = SystemConfig(K=2, N_t=3, N_r=2, L=6, encoding="mixed", mixed_m=2)
    assert sum_outage_capacity(3.0, mixed) == pytest.approx(2 * 2.5 * math.log2(4.0))


def test_top_ub_mu_degenerates_to_sst():
    cfg = SystemConfig(K=3, N_t=1, N_r=2, L=10, S=1.0, I_0=1.0, N_0=0.01)
    for beta in (0.5, 5.0, 50.0):
        assert top_ub_mu(beta, cfg, 0) == pytest.approx(
            top_ub(cdf_F_complex(beta, cfg), cfg.L), rel=1e-12)


def test_top_ub_mu_exponent_identity():
    # stream 2's bound with L users equals stream 1's bound with L-1 users
    cfg = SystemConfig(K=2, N_t=2, N_r=2, L=10, N_0=0.03)
    for beta in (0.5, 4.0):
        a = top_ub_mu(beta, cfg, 1)
        b = top_ub_mu(beta, cfg.replace(L=9), 0)
        assert a == pytest.approx(b, rel=1e-12)
    assert top_ub_mu(1.0, cfg, 0, simplified=True) == pytest.approx(
        top_ub_mu(1.0, cfg, 0), rel=1e-6)


def test_top_ub_mu_validation():
    cfg = SystemConfig(K=2, N_t=2, N_r=2, L=10, S=2.0, I_0=1.0)
    with pytest.raises(UnsupportedAnalyticsError):
        top_ub_mu(1.0, cfg, 0)
    with pytest.raises(ValueError):
        top_ub_mu(1.0, SystemConfig(K=2, N_t=2, N_r=2, L=10), 2)


def test_area_A1():
    assert area_A1(1.0, 1.0, 1e-12) < 1e-6
    # beta N_0/S = 1: 1 - 2 Q(1) = erf(1/sqrt(2))
    assert area_A1(100.0, 1.0, 0.01) == pytest.approx(math.erf(1 / math.sqrt(2)), abs=1e-12)
    # Monte Carlo mass of the region x < beta N_0 / (2S), where x is the
    # squared magnitude of an N(0, 1/2) projection
    rng = substream(0, 41)
    x = rng.standard_normal(400_000) ** 2 / 2.0
    for beta, S, N_0 in [(50.0, 1.0, 0.01), (5.0, 2.0, 0.3)]:
        mass = (x < beta * N_0 / (2 * S)).mean()
        a1 = area_A1(beta, S, N_0)
        assert abs(mass - a1) < 3 * math.sqrt(a1 * (1 - a1) / x.size) + 1e-4


def _real_even_oracle(beta, cfg):
    # direct 2-D quadrature of the exact double integral
    coeffs = coeff_lookup(*real_table_key(cfg.K, cfg.N_r), ensemble="real")
    pdf = lambda lam: pdf_mev_real_even(lam, coeffs, cfg.I_0, cfg.K, cfg.N_r)

    def survival(lam0):
        val, _ = quad(pdf, max(lam0, 0.0), 160.0, limit=200)
        return val

    def outer(x):
        lam0 = cfg.S * x / beta - cfg.N_0 / 2.0
        return survival(lam0) * math.exp(-x) / math.sqrt(math.pi * x)

    a2, _ = quad(outer, beta * cfg.N_0 / (2 * cfg.S), 130.0, limit=300)
    return area_A1(beta, cfg.S, cfg.N_0) + a2


@pytest.mark.parametrize("cfg", [
    CFG_R6,
    SystemConfig(K=8, N_t=1, N_r=2, L=10, S=1.4, I_0=0.9, N_0=0.05, encoding="real"),
    SystemConfig(K=4, N_t=1, N_r=1, L=10, S=1.0, I_0=2.0, N_0=0.02, encoding="real"),
])
def test_area_A2_matches_2d_quadrature(cfg):
    for beta in (0.5, 4.0, 30.0, 150.0):
        closed = cdf_F_real_even(beta, cfg)
        assert abs(closed - _real_even_oracle(beta, cfg)) < 1e-6


def test_real_even_limits():
    # beta -> infinity: total probability mass
    assert cdf_F_real_even(1e7, CFG_R6) == pytest.approx(1.0, abs=1e-6)
    vals = [cdf_F_real_even(b, CFG_R6) for b in np.linspace(0.01, 200, 60)]
    assert all(0 <= v <= 1.0 + 1e-12 for v in vals)
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(UnsupportedAnalyticsError):
        area_A2(1.0, CFG_R5)  # odd K


def test_real_even_approx_accuracy():
    # Q-approximated cdf within 3% absolute of A1+A2 for beta >= 10 dB
    for bdb in np.arange(10, 31, 2.5):
        beta = 10 ** (bdb / 10)
        ex = cdf_F_real_even(beta, CFG_R6)
        ap = cdf_F_real_even_approx(beta, CFG_R6)
        assert abs(ex - ap) < 0.03
    # beta -> 0 bounds check: 1 - 2 (1/12 + 1/4) = 1/3 for k0 = 0
    assert cdf_F_real_even_approx(1e-12, CFG_R6) == pytest.approx(1 / 3, abs=1e-9)
    with pytest.raises(UnsupportedAnalyticsError):
        cdf_F_real_even_approx(1.0, CFG_R5)


def test_real_k2nr1_forms():
    # frozen-origin approximation against the exact-Tricomi quadrature form
    for bdb in (20.0, 25.0, 30.0):
        beta = 10 ** (bdb / 10)
        a = cdf_F_real_k2nr1(beta, CFG_R5)
        q = cdf_F_real_k2nr1_quadrature(beta, CFG_R5)
        assert abs(a - q) / q < 0.05
    with pytest.raises(UnsupportedAnalyticsError):
        cdf_F_real_k2nr1(1.0, CFG_R6)


CFG_R7 = SystemConfig.at_snr_db(20.0, K=7, N_t=1, N_r=2, L=10, encoding="real")


@pytest.mark.parametrize("cfg", [CFG_R5_NR1, CFG_R7])
def test_real_k2nr3_forms(cfg):
    m = 2 * cfg.N_r
    betas = 10 ** (np.arange(0, 31, 3.0) / 10)
    vals = [cdf_F_real_k2nr3(b, cfg) for b in betas]
    assert all(0 <= v <= 1 for v in vals)

    def oracle(beta):
        # Q-approximated outage integral over the validated density
        acc = 0.0
        for w, c in ((1 / 12, 0.5), (1 / 4, 2 / 3)):
            val, _ = quad(
                lambda u: 2 * u * pdf_mev_real_k2nr3(u * u, 1.0, m)
                * math.exp(-2 * c * beta * (u * u + cfg.N_0 / 2)),
                0, 12.0, limit=300)
            acc += w * val
        return 1 - 2 * acc

    for bdb in (20.0, 25.0, 30.0):
        beta = 10 ** (bdb / 10)
        closed = cdf_F_real_k2nr3(beta, cfg)
        oracle_val = oracle(beta)
        assert abs(closed - oracle_val) / oracle_val < 0.05
        # the origin-frozen tail also tracks the quadrature tail
        assert abs((1 - closed) - (1 - oracle_val)) / (1 - oracle_val) < 0.10


def test_real_k2nr3_rejects_wrong_k():
    with pytest.raises(UnsupportedAnalyticsError):
        cdf_F_real_k2nr3(1.0, CFG_R5)  # K = 2 N_r + 1, not + 3
    with pytest.raises(UnsupportedAnalyticsError):
        cdf_F_real_k2nr3(1.0, CFG_R6)


def test_users_required_real_dispatch():
    for cfg in (CFG_R6, CFG_R5, CFG_R5_NR1):
        req = users_required(0.1, 200.0, cfg)
        assert req.exact >= 1.0 and req.approx > 0
    with pytest.raises(UnsupportedAnalyticsError):
        users_required(0.1, 10.0, CFG_R6.replace(K=9))  # odd, not 2Nr+1/+3


def test_top_closed_form_dispatch():
    assert top_closed_form(5.0, CFG_C).analytic_kind == "exact_ub"
    assert top_closed_form(5.0, CFG_R6).analytic_kind == "exact_ub"
    assert top_closed_form(5.0, CFG_R5).analytic_kind == "approx_ub"
    assert top_closed_form(5.0, CFG_R5_NR1).analytic_kind == "approx_ub"
    res = top_closed_form(5.0, CFG_C, target_top=0.2)
    assert res.top_ub == pytest.approx(res.f_beta ** CFG_C.L, rel=1e-12)
    assert res.users_required >= 1.0
    assert res.sum_outage_capacity == pytest.approx(3 * math.log2(6.0))
    with pytest.raises(UnsupportedAnalyticsError):
        top_closed_form(5.0, CFG_C.replace(encoding="mixed", mixed_m=0))


def test_solve_target_beta():
    for cfg in (CFG_C, CFG_R6, CFG_R5):
        beta = solve_target_beta(0.2, 10, cfg)
        assert abs(top_closed_form(beta, cfg, L=10).top_ub - 0.2) <= 1e-9
    # beta* increases with L at a fixed target
    prev = 0.0
    for L in (2, 5, 10, 50):
        b = solve_target_beta(0.2, L, CFG_C)
        assert b > prev
        prev = b
    with pytest.raises(BracketingError) as err:
        solve_target_beta(0.1, 1, CFG_R5)  # approx F(0+) > target at L=1
    assert err.value.lo < err.value.hi
