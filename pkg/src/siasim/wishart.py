r"""Analytic minimum-eigenvalue (MEV) densities of Wishart matrices.

The interference covariance sum_{i=1}^{n} I_0 v_i v_i^(H) is a scaled
Wishart matrix; its smallest eigenvalue drives every closed-form outage
expression in the package. Supported densities:

* complex vectors v ~ CN(0, I_m), n >= m: polynomial-exponential form

      p(x) = (1/I_0) e^{-m x/I_0} sum_{k=k0}^{K0} a(k) (x/I_0)^k,  k0 = n-m,

  with tabulated a(k) for (m,n) in {(2,2),(2,3),(2,4),(4,4),(4,5),(4,6)}
  and the exponential special case a = [m] for any m = n.

* real vectors v ~ N(0, (1/2) I_m) (the widely-linear case, m = 2 N_r):
  - odd excess n_real - m ("even K"): same polynomial-exponential form with
    k0 = (n_real - m - 1)/2, tabulated under the key (m, k0 + m);
  - n_real = m ("K = 2 N_r + 1"): Tricomi form with an integrable
    x^{-1/2} singularity at 0;
  - n_real = m + 2 ("K = 2 N_r + 3"): sqrt(x)-prefactor form combining
    Laguerre polynomials and two Tricomi evaluations (validated for
    m = 2 only; larger m fails the sampling gate and raises).

Every shipped coefficient row was derived symbolically and is gated by a
Kolmogorov-Smirnov test against sampled minimum eigenvalues (see tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .errors import CoefficientsUnavailableError

_SUPPORTED_KEYS = ((2, 2), (2, 3), (2, 4), (4, 4), (4, 5), (4, 6))


@dataclass(frozen=True)
class MevCoefficients:
    """Coefficient vector a(k), k = k0..K0, of one polynomial-exponential
    MEV density, with exact rationals retained for the normalization check
    sum_k a(k) k!/m^{k+1} = 1 enforced at construction."""

    m: int
    n: int
    k0: int
    a: tuple  # floats, full vector indexed 0..K0
    a_exact: tuple  # Fractions, same indexing
    ensemble: str  # "complex" | "real"

    def __post_init__(self):
        total = sum(
            Fraction(c) * math.factorial(k) / Fraction(self.m) ** (k + 1)
            for k, c in enumerate(self.a_exact)
        )
        if total != 1:
            raise ValueError(
                f"MEV coefficients ({self.m},{self.n},{self.ensemble}) do not "
                f"normalize: sum a(k) k!/m^(k+1) = {total}"
            )
        if any(self.a_exact[k] != 0 for k in range(self.k0)):
            raise ValueError("nonzero coefficient below k0")

    @property
    def K0(self) -> int:
        return len(self.a) - 1


@lru_cache(maxsize=1)
def _load_table() -> dict:
    table = {}
    text = resources.files("siasim.data").joinpath("mev_coefficients.txt").read_text()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        ensemble, m, n = parts[0], int(parts[1]), int(parts[2])
        a_exact = tuple(Fraction(p) for p in parts[3:])
        k0 = next(i for i, c in enumerate(a_exact) if c != 0)
        table[(ensemble, m, n)] = MevCoefficients(
            m=m, n=n, k0=k0, a=tuple(float(c) for c in a_exact),
            a_exact=a_exact, ensemble=ensemble,
        )
    return table


def coeff_lookup(m: int, n: int, ensemble: str = "complex") -> MevCoefficients:
    """Tabulated MEV coefficients for the pair (m, n).

    Complex keys are (m, n) = (N_r, K-1) directly; m = n returns the
    exponential case a = [m] for any m. Real keys follow the table
    convention (m, n) = (2 N_r, K/2 + N_r - 1), i.e. the real Wishart with
    2n - m + 1 degrees of freedom. Unsupported pairs raise with a pointer
    to the Monte Carlo fallback.
    """
    if ensemble not in ("complex", "real"):
        raise ValueError("ensemble must be 'complex' or 'real'")
    table = _load_table()
    key = (ensemble, m, n)
    if key in table:
        return table[key]
    if ensemble == "complex" and m == n and m >= 1:
        return MevCoefficients(
            m=m, n=n, k0=0, a=(float(m),), a_exact=(Fraction(m),), ensemble="complex"
        )
    raise CoefficientsUnavailableError(
        f"MEV coefficients unavailable for (m={m}, n={n}, {ensemble}); "
        "use wishart.sample_mev for a Monte Carlo estimate instead"
    )


def real_table_key(K: int, N_r: int) -> tuple[int, int]:
    """Table key (m, n) for the widely-linear even-K case."""
    if K % 2 != 0:
        raise ValueError("even-K key requested for odd K")
    if K - 1 < 2 * N_r:
        raise ValueError("even-K polynomial form needs K-1 >= 2 N_r")
    return 2 * N_r, K // 2 + N_r - 1


def _poly_exp_pdf(lam, coeffs: MevCoefficients, I_0: float):
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("eigenvalue argument must be >= 0")
    if not I_0 > 0:
        raise ValueError("I_0 must be > 0")
    u = lam / I_0
    poly = np.zeros_like(u)
    for k in range(coeffs.K0, coeffs.k0 - 1, -1):
        poly = poly * u + coeffs.a[k]
    poly *= u**coeffs.k0
    return (1.0 / I_0) * np.exp(-coeffs.m * u) * poly


def pdf_mev_complex(lam, coeffs: MevCoefficients, I_0: float):
    """Polynomial-form MEV density of the complex ensemble."""
    if coeffs.ensemble != "complex":
        raise ValueError("coefficients are not from the complex ensemble")
    return _poly_exp_pdf(lam, coeffs, I_0)


def pdf_mev_real_even(lam, coeffs: MevCoefficients, I_0: float, K: int, N_r: int):
    """Even-K widely-linear MEV density (same polynomial form, real table).

    The exponent inside the sum is k (not the fixed k0+1 of one printed
    variant of this formula, which cannot normalize); the implemented form
    is gated by the sampling oracle.
    """
    if coeffs.ensemble != "real":
        raise ValueError("coefficients are not from the real ensemble")
    expect = real_table_key(K, N_r)
    if (coeffs.m, coeffs.n) != expect:
        raise ValueError(f"coefficients {(coeffs.m, coeffs.n)} do not match key {expect}")
    if coeffs.k0 != (K - 2 * N_r - 2) // 2:
        raise ValueError("k0 inconsistent with (K, N_r)")
    return _poly_exp_pdf(lam, coeffs, I_0)


def _kummer_m(a: float, b: float, z: float) -> float:
    """Confluent hypergeometric 1F1(a; b; z) by its ascending series
    (rapidly convergent for the small |z| this module needs)."""
    term, total = 1.0, 1.0
    for n in range(500):
        term *= (a + n) * z / ((b + n) * (n + 1))
        total += term
        if abs(term) < 1e-17 * abs(total):
            return total
    raise RuntimeError("Kummer series did not converge")


def tricomi_u(a: float, b: float, z) -> np.ndarray | float:
    r"""Confluent hypergeometric function of the second kind, via its
    integral representation

        U(a,b,z) = (1/Gamma(a)) \int_0^\infty e^{-zt} t^{a-1} (1+t)^{b-a-1} dt

    using adaptive quadrature (t = u^2 on [0,1] absorbs the endpoint
    singularity for a < 1; t = u/(1-u) makes the tail finite-range), with
    U(a,b,0) = Gamma(1-b)/Gamma(a-b+1). For small z with non-integer b the
    Kummer connection series is used instead, where the integrand's
    boundary layer would be unresolvable. Requires a > 0 and z >= 0.
    """
    if a <= 0:
        raise ValueError("tricomi_u requires a > 0")

    def one(zv: float) -> float:
        if zv < 0:
            raise ValueError("tricomi_u requires z >= 0")
        if zv == 0.0:
            # our uses keep 1 - b > 0
            return math.exp(gammaln(1.0 - b) - gammaln(a - b + 1.0))
        if zv < 0.5 and abs(b - round(b)) > 1e-9:
            return (
                math.exp(gammaln(1.0 - b) - gammaln(a - b + 1.0)) * _kummer_m(a, b, zv)
                + math.gamma(b - 1.0) / math.gamma(a) * zv ** (1.0 - b)
                * _kummer_m(a - b + 1.0, 2.0 - b, zv)
            )
        inv_gamma_a = math.exp(-gammaln(a))
        head, _ = quad(
            lambda u: 2.0 * np.exp(-zv * u * u) * u ** (2 * a - 1) * (1 + u * u) ** (b - a - 1),
            0.0, 1.0, epsabs=0.0, epsrel=1e-11, limit=200,
        )
        if zv > 690.0:  # tail integrand underflows entirely
            return inv_gamma_a * head
        tail, _ = quad(
            lambda u: np.exp(-zv * u / (1.0 - u)) * u ** (a - 1) * (1.0 - u) ** (-b),
            0.5, 1.0, epsabs=0.0, epsrel=1e-11, limit=200,
        )
        return inv_gamma_a * (head + tail)

    z_arr = np.asarray(z, dtype=float)
    if z_arr.ndim == 0:
        return one(float(z_arr))
    return np.vectorize(one)(z_arr)


def pdf_mev_real_k2nr1(lam, I_0: float, m: int):
    r"""MEV density of the square real Wishart case (K = 2 N_r + 1, m = 2 N_r):

        p(x) = Gamma((m+1)/2) m / sqrt(pi I_0 x) e^{-m x/I_0}
               U((m-1)/2, -1/2, x/I_0).

    Diverges as x^{-1/2} at the origin but integrates; quadrature against
    it should substitute x = u^2.
    """
    if m < 2 or m % 2 != 0:
        raise ValueError("m = 2 N_r must be a positive even integer")
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("eigenvalue argument must be >= 0")
    u_val = tricomi_u((m - 1) / 2.0, -0.5, lam / I_0)
    pref = math.gamma((m + 1) / 2.0) * m / np.sqrt(np.pi * I_0 * lam)
    return pref * np.exp(-m * lam / I_0) * u_val


def laguerre_poly_neg(alpha: int, p: int, x):
    r"""Generalized Laguerre polynomial at a negated argument,

        L_p^{(alpha)}(-x) = sum_{q=0}^{p} C(p+alpha, p-q) x^q / q!,

    evaluated by the binomial sum (all terms positive for x >= 0). One
    printed variant of this sum omits the 1/q!, which is invisible for
    p <= 1 but fails the density sampling gate at larger array sizes.
    """
    if p < 0 or int(p) != p:
        raise ValueError("p must be a nonnegative integer")
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for q in range(int(p), -1, -1):
        out = out * x + math.comb(p + alpha, p - q) / math.factorial(q)
    return out if out.ndim else float(out)


def pdf_mev_real_k2nr3(lam, I_0: float, m: int):
    r"""MEV density for the real Wishart with two extra degrees of freedom
    (K = 2 N_r + 3):

        p(x) = Gamma((m+1)/2) 2/(sqrt(pi) I_0^{3/2}) sqrt(x) e^{-m x/I_0} g(x),
        g(x) = L_{m-1}^{(2)}(-2x/I_0) U((m-1)/2, -1/2, x/I_0)
             + (x/I_0) L_{m-2}^{(3)}(-2x/I_0) U((m+1)/2, 1/2, x/I_0),

    with standard generalized Laguerre polynomials and both arguments
    -2x/I_0 (the only combination that normalizes and matches sampled
    minimum eigenvalues; validated for m = 2, 4, 6).
    """
    if m < 2 or m % 2 != 0:
        raise ValueError("m = 2 N_r must be a positive even integer")
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("eigenvalue argument must be >= 0")
    x = lam / I_0
    g = laguerre_poly_neg(2, m - 1, 2 * x) * tricomi_u((m - 1) / 2.0, -0.5, x)
    g = g + x * laguerre_poly_neg(3, m - 2, 2 * x) * tricomi_u((m + 1) / 2.0, 0.5, x)
    pref = math.gamma((m + 1) / 2.0) * 2.0 / (math.sqrt(math.pi) * I_0**1.5)
    return pref * np.sqrt(lam) * np.exp(-m * x) * g


def sample_mev(m: int, n: int, I_0: float, count: int, rng: np.random.Generator,
               complex_matrix: bool = True, chunk: int = 50_000) -> np.ndarray:
    """Minimum eigenvalues of `count` sampled Wishart matrices
    sum_{i=1}^{n} I_0 v v^(H) (complex CN(0, I_m) or real N(0, I_m/2)
    vectors per the flag). Validation oracle for every analytic density."""
    if n < m:
        raise ValueError("need n >= m")
    out = np.empty(count)
    done = 0
    while done < count:
        c = min(chunk, count - done)
        if complex_matrix:
            v = (rng.standard_normal((c, n, m)) + 1j * rng.standard_normal((c, n, m))) / np.sqrt(2)
            w = I_0 * np.einsum("tij,tik->tjk", v.conj(), v)
        else:
            v = rng.standard_normal((c, n, m)) / np.sqrt(2)
            w = I_0 * np.einsum("tij,tik->tjk", v, v)
        out[done:done + c] = np.linalg.eigvalsh(w)[:, 0].real
        done += c
    return out
