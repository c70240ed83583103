r"""Closed-form transmitter outage probability (TOP) and capacity formulas.

A transmitter is in outage when its scheduled user's mutual information
falls below the target log2(1+beta). With every user reporting the
minimum-eigenvalue lower bound on its post-SINR, the L reports are i.i.d.
with cdf F, so the TOP upper bound is F^L(beta).

Complex encoding uses the complex-Wishart MEV coefficients; real (widely
linear) encoding uses the real ensemble, the half-Gaussian power density
p(x) = e^{-x}/sqrt(pi x) for the projection term, and either the exact
A1+A2 area decomposition (even K) or two-exponential Q-function
approximations (odd K). All SNR-like quantities are linear here; dB only
at the CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc, gammaincc, gammaln

from .config import SystemConfig
from .errors import BracketingError, UnsupportedAnalyticsError
from .scheduler import build_streams
from .wishart import MevCoefficients, coeff_lookup, real_table_key, tricomi_u

# two-exponential Q-function approximation Q(x) ~ sum_i W_i exp(-c_i x^2)
_Q_C = (0.5, 2.0 / 3.0)
_Q_W = (1.0 / 12.0, 1.0 / 4.0)


def q_exact(x):
    """Gaussian tail Q(x) via the complementary error function."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def q_approx(x):
    """Two-exponential approximation (1/12) e^{-x^2/2} + (1/4) e^{-2x^2/3}.

    Within ~2% relative of the exact Q over x in [0.5, 5]; at x = 0 it
    gives 1/3 instead of 1/2 (documented offset at the origin).
    """
    x = np.asarray(x, dtype=float)
    return _Q_W[0] * np.exp(-_Q_C[0] * x**2) + _Q_W[1] * np.exp(-_Q_C[1] * x**2)


def _require_sst(cfg: SystemConfig, what: str):
    if cfg.N_t != 1:
        raise UnsupportedAnalyticsError(f"{what} applies to single-stream configs (N_t=1)")


def _poly_laplace_sum(coeffs: MevCoefficients, denom: float) -> float:
    """sum_k a(k) k! / denom^(k+1): the Laplace transform of the
    polynomial-exponential MEV density evaluated through the outage
    integral."""
    return sum(
        coeffs.a[k] * math.factorial(k) / denom ** (k + 1)
        for k in range(coeffs.k0, coeffs.K0 + 1)
    )


def cdf_F_complex(beta: float, cfg: SystemConfig) -> float:
    """Per-user cdf of the lower-bound SINR for complex encoding:

        F(beta) = 1 - e^{-beta N_0/S} sum_k a(k) k! / (beta I_0/S + m)^{k+1}

    with (m, n) = (N_r, K-1) complex-ensemble coefficients.
    """
    _require_sst(cfg, "cdf_F_complex")
    if cfg.K - 1 < cfg.N_r:
        raise UnsupportedAnalyticsError("complex closed form needs K-1 >= N_r (full-rank ICM)")
    coeffs = coeff_lookup(cfg.N_r, cfg.K - 1, "complex")
    denom = beta * cfg.I_0 / cfg.S + coeffs.m
    return 1.0 - math.exp(-beta * cfg.N_0 / cfg.S) * _poly_laplace_sum(coeffs, denom)


def top_ub(F_beta: float, L_effective: int) -> float:
    """TOP upper bound F^L; decreasing in L, increasing in F."""
    if not 0.0 <= F_beta <= 1.0:
        raise ValueError("F must be a probability")
    if L_effective < 1:
        raise ValueError("L must be >= 1")
    return F_beta**L_effective


@dataclass(frozen=True)
class UsersRequired:
    """Active users needed to meet a TOP target: the exact ln-ratio value,
    the paper-style large-argument approximation, and whether the
    large-argument regime (beta I_0/S >= m) actually holds. Continuous
    values; apply ceil only when reporting."""

    exact: float
    approx: float
    large_argument: bool


def users_required_complex(target_top: float, beta: float, cfg: SystemConfig) -> UsersRequired:
    """L meeting F^L(beta) = target for complex encoding, exact and
    approximate (leading coefficient + ln(1-x) ~ -x)."""
    if not 0.0 < target_top < 1.0:
        raise ValueError("target_top must be in (0, 1)")
    F = cdf_F_complex(beta, cfg)
    coeffs = coeff_lookup(cfg.N_r, cfg.K - 1, "complex")
    k0 = coeffs.k0
    denom = beta * cfg.I_0 / cfg.S + coeffs.m
    approx = (
        math.exp(beta * cfg.N_0 / cfg.S)
        * math.log(1.0 / target_top)
        * denom ** (k0 + 1)
        / (coeffs.a[k0] * math.factorial(k0))
    )
    # F <= target means a single user already meets it; never below one user
    exact = 1.0 if F <= 0.0 else max(1.0, math.log(target_top) / math.log(F))
    return UsersRequired(exact=exact, approx=approx,
                         large_argument=beta * cfg.I_0 / cfg.S >= coeffs.m)


def sum_outage_capacity(beta: float, cfg: SystemConfig) -> float:
    """Network sum outage capacity K R log2(1+beta) in bits/s/Hz, with the
    multiplexing rate R determined by the encoding (N_t complex, t/2 real,
    (N_t+m)/2 mixed)."""
    plan = build_streams(cfg)
    return cfg.K * plan.sm_rate * math.log2(1.0 + beta)


def top_ub_mu(beta: float, cfg: SystemConfig, stream: int, simplified: bool = False) -> float:
    """Per-stream outage bound for multi-user spatial multiplexing with
    complex encoding:

        [1 - e^{-beta N_t N_0/S} sum_k a(k) k!/(beta+m)^{k+1}]^(L - stream)

    over (m, n) = (N_r, K N_t - 1) complex coefficients, stream 0-based.
    `simplified` uses exponent L (the L >> N_t form). Derived for S = I_0;
    unequal powers are excluded from analytic mode (Monte Carlo covers
    them).
    """
    if cfg.S != cfg.I_0:
        raise UnsupportedAnalyticsError("MU bound derived for S = I_0 only")
    if not 0 <= stream < cfg.N_t:
        raise ValueError(f"stream index {stream} outside [0, {cfg.N_t})")
    n = cfg.K * cfg.N_t - 1
    if n < cfg.N_r:
        raise UnsupportedAnalyticsError("MU bound needs K N_t - 1 >= N_r")
    coeffs = coeff_lookup(cfg.N_r, n, "complex")
    F = 1.0 - math.exp(-beta * cfg.N_t * cfg.N_0 / cfg.S) * _poly_laplace_sum(
        coeffs, beta + coeffs.m
    )
    exponent = cfg.L if simplified else cfg.L - stream
    return top_ub(F, exponent)


def area_A1(beta: float, S: float, N_0: float) -> float:
    """Probability mass of the region where the projection power alone is
    below the noise-scaled threshold: 1 - 2 Q(sqrt(beta N_0 / S))."""
    return 1.0 - 2.0 * float(q_exact(math.sqrt(beta * N_0 / S)))


def _upper_gamma_over_sqrt_pi(s: float, x0: float) -> float:
    # (1/sqrt(pi)) * Gamma(s, x0), via the regularized upper incomplete gamma
    return math.exp(gammaln(s) - 0.5 * math.log(math.pi)) * float(gammaincc(s, x0))


def area_A2(beta: float, cfg: SystemConfig) -> float:
    """Remaining mass of the exact even-K outage integral, reduced to a
    triple sum whose inner term is a normalized upper incomplete gamma of
    half-integer order:

        A2 = e^{m N_0/(2 I_0)} sum_k a(k)/m^{k+1} sum_p (m/I_0)^{k-p}
             sum_r C(k-p, r) (-N_0/2)^r (S/beta)^{k-p-r}
             D_{kpr} / (m S/(I_0 beta) + 1)^{k-p-r+1/2},

    D = Gamma(k-p-r+1/2, x0)/sqrt(pi), x0 = (beta N_0/(2S)) (m S/(I_0 beta) + 1).
    A1 + A2 is the exact per-user cdf for even K (verified against 2-D
    quadrature of the underlying double integral; note the k!/(k-p)!
    factor from the incomplete-gamma expansion, which one printed variant
    of this sum drops).
    """
    _require_sst(cfg, "area_A2")
    if cfg.K % 2 != 0:
        raise UnsupportedAnalyticsError("A2 closed form needs even K")
    coeffs = coeff_lookup(*real_table_key(cfg.K, cfg.N_r), ensemble="real")
    m = coeffs.m
    S, I_0, N_0 = cfg.S, cfg.I_0, cfg.N_0
    A = m * S / (I_0 * beta) + 1.0
    x0 = beta * N_0 / (2.0 * S) * A
    total = 0.0
    for k in range(coeffs.k0, coeffs.K0 + 1):
        for p in range(k + 1):
            for r in range(k - p + 1):
                s_half = k - p - r + 0.5
                term = (
                    coeffs.a[k]
                    / m ** (k + 1)
                    * (math.factorial(k) / math.factorial(k - p))
                    * (m / I_0) ** (k - p)
                    * math.comb(k - p, r)
                    * (-N_0 / 2.0) ** r
                    * (S / beta) ** (k - p - r)
                    * _upper_gamma_over_sqrt_pi(s_half, x0)
                    / A**s_half
                )
                total += term
    return math.exp(m * N_0 / (2.0 * I_0)) * total


def cdf_F_real_even(beta: float, cfg: SystemConfig) -> float:
    """Exact per-user lower-bound cdf for real encoding with even K:
    A1 + A2."""
    return area_A1(beta, cfg.S, cfg.N_0) + area_A2(beta, cfg)


def cdf_F_real_even_approx(beta: float, cfg: SystemConfig) -> float:
    """Two-exponential Q-approximation of the even-K cdf:

        1 - 2 sum_i W_i e^{-c_i beta N_0/S}
              sum_k a(k) k! / (2 c_i I_0 beta/S + m)^{k+1}.
    """
    _require_sst(cfg, "cdf_F_real_even_approx")
    if cfg.K % 2 != 0:
        raise UnsupportedAnalyticsError("even-K approximation needs even K")
    coeffs = coeff_lookup(*real_table_key(cfg.K, cfg.N_r), ensemble="real")
    acc = 0.0
    for w, c in zip(_Q_W, _Q_C):
        denom = 2.0 * c * cfg.I_0 * beta / cfg.S + coeffs.m
        acc += w * math.exp(-c * beta * cfg.N_0 / cfg.S) * _poly_laplace_sum(coeffs, denom)
    return 1.0 - 2.0 * acc


def _k2nr1_prefactor(m: int) -> float:
    # 2 m Gamma((m+1)/2) Gamma(3/2) / Gamma(m/2 + 1)
    return 2.0 * m * math.exp(
        gammaln((m + 1) / 2.0) + gammaln(1.5) - gammaln(m / 2.0 + 1.0)
    )


def cdf_F_real_k2nr1(beta: float, cfg: SystemConfig) -> float:
    """High-SNR approximation of the per-user cdf for K = 2 N_r + 1
    (Tricomi function frozen at its origin value):

        1 - 2 m G((m+1)/2) G(3/2)/G(m/2+1)
            sum_i W_i e^{-c_i beta N_0/S} / sqrt(2 c_i I_0 beta/S + m).
    """
    _require_sst(cfg, "cdf_F_real_k2nr1")
    m = 2 * cfg.N_r
    if cfg.K != 2 * cfg.N_r + 1:
        raise UnsupportedAnalyticsError("this form needs K = 2 N_r + 1")
    acc = sum(
        w * math.exp(-c * beta * cfg.N_0 / cfg.S) / math.sqrt(2.0 * c * cfg.I_0 * beta / cfg.S + m)
        for w, c in zip(_Q_W, _Q_C)
    )
    return 1.0 - _k2nr1_prefactor(m) * acc


def cdf_F_real_k2nr1_quadrature(beta: float, cfg: SystemConfig) -> float:
    """Same cdf with the Tricomi function kept exact under the integral
    (only the Q-function approximated); the reference the frozen-origin
    form is checked against."""
    _require_sst(cfg, "cdf_F_real_k2nr1_quadrature")
    m = 2 * cfg.N_r
    if cfg.K != 2 * cfg.N_r + 1:
        raise UnsupportedAnalyticsError("this form needs K = 2 N_r + 1")
    acc = 0.0
    for w, c in zip(_Q_W, _Q_C):
        B = 2.0 * c * cfg.I_0 * beta / cfg.S + m
        integral, _ = quad(
            lambda u, B=B: 2.0 * math.exp(-u * u) * tricomi_u((m - 1) / 2.0, -0.5, u * u / B),
            0.0, 8.0, epsabs=0.0, epsrel=1e-9, limit=200,
        )
        acc += w * math.exp(-c * beta * cfg.N_0 / cfg.S) / math.sqrt(B) * integral
    pref = 2.0 * math.exp(gammaln((m + 1) / 2.0)) * m / math.sqrt(math.pi)
    return 1.0 - pref * acc


def _k2nr3_prefactor(m: int) -> float:
    # sqrt(pi) C(m+1, m-1) Gamma((m+1)/2) / Gamma(m/2 + 1); the
    # Gamma-ratio factor is dropped in one printed variant of this result
    # but is required to match the quadrature of the validated density
    return math.comb(m + 1, m - 1) * math.sqrt(math.pi) * math.exp(
        gammaln((m + 1) / 2.0) - gammaln(m / 2.0 + 1.0)
    )


def cdf_F_real_k2nr3(beta: float, cfg: SystemConfig) -> float:
    """High-SNR approximation for K = 2 N_r + 3 (Laguerre and Tricomi
    terms frozen at their origin values):

        1 - sqrt(pi) C(m+1, m-1) G((m+1)/2)/G(m/2+1)
            sum_i W_i e^{-c_i beta N_0/S} / (2 c_i I_0 beta/S + m)^{3/2}.
    """
    _require_sst(cfg, "cdf_F_real_k2nr3")
    m = 2 * cfg.N_r
    if cfg.K != 2 * cfg.N_r + 3:
        raise UnsupportedAnalyticsError("this form needs K = 2 N_r + 3")
    acc = sum(
        w * math.exp(-c * beta * cfg.N_0 / cfg.S) / (2.0 * c * cfg.I_0 * beta / cfg.S + m) ** 1.5
        for w, c in zip(_Q_W, _Q_C)
    )
    return 1.0 - _k2nr3_prefactor(m) * acc


def users_required(target_top: float, beta: float, cfg: SystemConfig) -> UsersRequired:
    """Users needed for the configured encoding; dispatches on encoding/K
    and returns the exact ln-ratio value plus the matching leading-term
    approximation."""
    if cfg.encoding == "complex":
        return users_required_complex(target_top, beta, cfg)
    if not 0.0 < target_top < 1.0:
        raise ValueError("target_top must be in (0, 1)")
    m = 2 * cfg.N_r
    ratio = cfg.I_0 * beta / cfg.S
    ln_inv = math.log(1.0 / target_top)
    if cfg.K % 2 == 0:
        F = cdf_F_real_even(beta, cfg)
        coeffs = coeff_lookup(*real_table_key(cfg.K, cfg.N_r), ensemble="real")
        k0 = coeffs.k0
        lead = 2.0 * sum(
            w
            * math.exp(-c * beta * cfg.N_0 / cfg.S)
            * coeffs.a[k0]
            * math.factorial(k0)
            / (2.0 * c * ratio + m) ** (k0 + 1)
            for w, c in zip(_Q_W, _Q_C)
        )
    elif cfg.K == 2 * cfg.N_r + 1:
        F = cdf_F_real_k2nr1(beta, cfg)
        lead = _k2nr1_prefactor(m) * sum(
            w * math.exp(-c * beta * cfg.N_0 / cfg.S) / math.sqrt(2.0 * c * ratio + m)
            for w, c in zip(_Q_W, _Q_C)
        )
    elif cfg.K == 2 * cfg.N_r + 3:
        F = cdf_F_real_k2nr3(beta, cfg)
        lead = _k2nr3_prefactor(m) * sum(
            w * math.exp(-c * beta * cfg.N_0 / cfg.S) / (2.0 * c * ratio + m) ** 1.5
            for w, c in zip(_Q_W, _Q_C)
        )
    else:
        raise UnsupportedAnalyticsError(
            f"no validated real-encoding closed form for K={cfg.K}, N_r={cfg.N_r}"
        )
    exact = 1.0 if F <= 0.0 else max(1.0, math.log(target_top) / math.log(F))
    return UsersRequired(exact=exact, approx=ln_inv / lead, large_argument=ratio >= m)


@dataclass(frozen=True)
class TopResult:
    """One closed-form TOP evaluation: the per-user cdf value, the TOP
    bound F^L, the kind of expression used, and (when requested) the
    users-required figure and sum outage capacity."""

    f_beta: float
    top_ub: float
    analytic_kind: str
    users_required: float | None = None
    sum_outage_capacity: float | None = None


def top_closed_form(beta: float, cfg: SystemConfig, L: int | None = None,
                    target_top: float | None = None) -> TopResult:
    """Dispatch to the applicable single-stream closed form.

    complex -> exact upper bound; real even K -> exact A1+A2;
    real K = 2N_r+1 or 2N_r+3 -> Q-approximation forms.
    """
    _require_sst(cfg, "top_closed_form")
    L = cfg.L if L is None else L
    if cfg.encoding == "complex":
        F, kind = cdf_F_complex(beta, cfg), "exact_ub"
    elif cfg.encoding == "real":
        if cfg.K % 2 == 0:
            F, kind = cdf_F_real_even(beta, cfg), "exact_ub"
        elif cfg.K == 2 * cfg.N_r + 1:
            F, kind = cdf_F_real_k2nr1(beta, cfg), "approx_ub"
        elif cfg.K == 2 * cfg.N_r + 3:
            F, kind = cdf_F_real_k2nr3(beta, cfg), "approx_ub"
        else:
            raise UnsupportedAnalyticsError(
                f"no validated real-encoding closed form for K={cfg.K}, N_r={cfg.N_r}"
            )
    else:
        raise UnsupportedAnalyticsError("closed-form TOP covers complex and real encodings")
    F = min(max(F, 0.0), 1.0)
    req = None
    if target_top is not None:
        req = users_required(target_top, beta, cfg).exact
    return TopResult(
        f_beta=F,
        top_ub=top_ub(F, L),
        analytic_kind=kind,
        users_required=req,
        sum_outage_capacity=sum_outage_capacity(beta, cfg),
    )


def solve_target_beta(target_top: float, L: int, cfg: SystemConfig,
                      tol: float = 1e-9, max_iter: int = 200) -> float:
    """Bisection for the target SNR beta* with TOP(beta*) = target_top.

    TOP = F^L is monotone increasing in beta, so a bracket is grown
    geometrically and then bisected until the TOP value is within `tol`.
    """
    if not 0.0 < target_top < 1.0:
        raise ValueError("target_top must be in (0, 1)")

    def f(beta):
        return top_closed_form(beta, cfg, L=L).top_ub - target_top

    lo, hi = 1e-12, 1.0
    f_lo = f(lo)
    f_hi = f(hi)
    while f_hi < 0.0 and hi < 1e15:
        hi *= 10.0
        f_hi = f(hi)
    if f_lo > 0.0 or f_hi < 0.0:
        raise BracketingError("TOP target not bracketed in beta", lo, f_lo + target_top,
                              hi, f_hi + target_top)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if abs(val) <= tol:
            return mid
        if val < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
