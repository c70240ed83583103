r"""Post-processing SINR of MMSE and widely-linear MMSE receivers.

For a desired vector h, noise-plus-interference covariance R and signal
power S, the MMSE output SINR is gamma = S h^H R^{-1} h. With the
interference covariance eigendecomposed as U^H diag(lambda) U and
omega = U h, the same quantity reads

    gamma = S sum_p |omega_p|^2 / (lambda_p + N_0),

whose smallest-eigenvalue term alone is the lower bound used throughout
the outage analysis. The widely-linear variants live on the stacked real
space of dimension 2 N_r with noise N_0 / 2 per real dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSample, WLChannelSample
from .config import SystemConfig
from .errors import SingularMatrixError

# eigenvalue clamped to 0 when within this absolute slack of negative
_EIG_CLAMP = 1e-12
# eigenvalue counted as zero if below this fraction of the largest
RANK_RTOL = 1e-10
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class SinrReport:
    """Per-user, per-stream receiver report.

    gamma >= gamma_lb >= 0 always; lambda_min is the smallest eigenvalue of
    the (WL-)interference covariance matrix the bound was computed from.
    """

    user: int
    stream: int
    gamma: float
    gamma_lb: float
    lambda_min: float


def _gram(cols: np.ndarray) -> np.ndarray:
    """sum_i c_i c_i^H for the columns of `cols` (n x p)."""
    return cols @ cols.conj().T


def _solve_quadratic_form(h: np.ndarray, R: np.ndarray) -> float:
    """h^H R^{-1} h via a linear solve (no explicit inverse)."""
    if np.linalg.cond(R) > _COND_LIMIT:
        raise SingularMatrixError(
            "covariance matrix numerically singular (condition number "
            f"> {_COND_LIMIT:g}); check that N_0 is not effectively zero"
        )
    x = np.linalg.solve(R, h)
    return float(np.real(np.vdot(h, x)))


def nicm(sample: ChannelSample, cfg: SystemConfig) -> np.ndarray:
    """Short-term noise-plus-interference covariance for single-stream
    transmission: sum_i I_0 g_i g_i^H + N_0 I. Hermitian positive definite."""
    if cfg.N_t != 1:
        raise ValueError("nicm is the single-stream form; use stream_sinr_mu for N_t > 1")
    cols = sample.G[:, :, 0].T  # N_r x (K-1)
    return cfg.I_0 * _gram(cols) + cfg.N_0 * np.eye(cfg.N_r)


def post_sinr_mmse(h: np.ndarray, nicm_mat: np.ndarray, S: float) -> float:
    """MMSE output SINR  gamma = S h^H R^{-1} h  (linear)."""
    return S * _solve_quadratic_form(h, nicm_mat)


def icm_eigensystem(icm: np.ndarray):
    """Descending eigenvalues and the unitary U with omega = U h.

    Eigenvalues within 1e-12 of negative are clamped to 0 (floating-point
    noise on a PSD matrix); a genuinely negative spectrum raises.
    """
    w, v = np.linalg.eigh(icm)
    if w[0] < -_EIG_CLAMP * max(1.0, abs(w[-1])):
        raise ValueError("interference covariance has a negative eigenvalue")
    w = np.clip(w, 0.0, None)[::-1]
    U = v[:, ::-1].conj().T
    return w, U


def post_sinr_eigenform(h, eigvals, U, S: float, N_0: float) -> float:
    """Eigen-decomposition form of the MMSE SINR.

    eigvals: ICM eigenvalues sorted descending, all >= 0 (zeros for the
    rank-deficient part); U: unitary with omega = U h.
    """
    eigvals = np.asarray(eigvals, dtype=float)
    if np.any(eigvals < 0):
        raise ValueError("eigenvalues must be nonnegative")
    if np.any(np.diff(eigvals) > 0):
        raise ValueError("eigenvalues must be sorted descending")
    if not np.allclose(U @ U.conj().T, np.eye(U.shape[0]), atol=1e-10):
        raise ValueError("U is not unitary to 1e-10")
    omega = U @ h
    return S * float(np.sum(np.abs(omega) ** 2 / (eigvals + N_0)))


def sinr_lower_bound(h, eigvals, U, S: float, N_0: float) -> float:
    """Minimum-eigenvalue term of the eigen-form sum: the reported lower
    bound  S |omega_min|^2 / (lambda_min + N_0)."""
    eigvals = np.asarray(eigvals, dtype=float)
    omega = U @ h
    return S * float(np.abs(omega[-1]) ** 2 / (eigvals[-1] + N_0))


def report(sample: ChannelSample, cfg: SystemConfig, user: int = 0, stream: int = 0) -> SinrReport:
    """Full single-stream receiver report (true SINR, bound, MEV)."""
    R = nicm(sample, cfg)
    icm = R - cfg.N_0 * np.eye(cfg.N_r)
    w, U = icm_eigensystem(icm)
    return SinrReport(
        user=user,
        stream=stream,
        gamma=post_sinr_mmse(sample.h, R, cfg.S),
        gamma_lb=sinr_lower_bound(sample.h, w, U, cfg.S, cfg.N_0),
        lambda_min=float(w[-1]),
    )


def wl_nicm(sample: WLChannelSample, cfg: SystemConfig) -> np.ndarray:
    """Widely-linear NICM: sum_i I_0 g~_i g~_i^T + (N_0/2) I on the 2N_r
    stacked space."""
    cols = sample.g_t.T  # 2N_r x (K-1)
    return cfg.I_0 * _gram(cols) + (cfg.N_0 / 2.0) * np.eye(2 * cfg.N_r)


def post_sinr_wl(h_t: np.ndarray, wl_nicm_mat: np.ndarray, S: float) -> float:
    """WL-MMSE output SINR  gamma = S h~^T Rbar^{-1} h~."""
    return S * _solve_quadratic_form(h_t, wl_nicm_mat)


def mu_covariance(sample: ChannelSample, stream: int, cfg: SystemConfig) -> np.ndarray:
    """Noise-plus-interference covariance seen by stream `stream` under
    multi-user spatial multiplexing:

        R_i = (S/N_t) sum_{j != i} h_j h_j^H
            + (I_0/N_t) sum_l G_l G_l^H + N_0 I.

    With S = I_0 = 1 this is the per-stream covariance of the symmetric
    model (up to the overall 1/N_t normalization also applied to gamma).
    """
    if not 0 <= stream < cfg.N_t:
        raise ValueError(f"stream index {stream} outside [0, {cfg.N_t})")
    own = np.delete(sample.H, stream, axis=1)  # N_r x (N_t-1)
    other = sample.G.transpose(1, 0, 2).reshape(cfg.N_r, -1)  # N_r x (K-1)N_t
    return (
        (cfg.S / cfg.N_t) * _gram(own)
        + (cfg.I_0 / cfg.N_t) * _gram(other)
        + cfg.N_0 * np.eye(cfg.N_r)
    )


def stream_sinr_mu(sample: ChannelSample, stream: int, cfg: SystemConfig) -> float:
    """Per-stream MMSE SINR with self-interference included.

    gamma_i = (S/N_t) h_i^H R_i^{-1} h_i; at N_t = 1 this reduces exactly
    to the single-stream post_sinr_mmse path.
    """
    R = mu_covariance(sample, stream, cfg)
    return (cfg.S / cfg.N_t) * _solve_quadratic_form(sample.H[:, stream], R)


def icm_rank(eigvals, rtol: float = RANK_RTOL) -> int:
    """Number of eigenvalues above rtol x largest (scale-invariant rank)."""
    eigvals = np.asarray(eigvals, dtype=float)
    top = eigvals.max(initial=0.0)
    if top <= 0.0:
        return 0
    return int(np.count_nonzero(eigvals > rtol * top))
