r"""Random channel generation and the real/imaginary stacking transform.

Channel entries are i.i.d. circularly symmetric complex Gaussian with unit
variance: real and imaginary parts are independent N(0, 1/2). Stacking real
over imaginary parts therefore yields real vectors ~ N(0, (1/2) I) on the
virtual array of size 2 N_r.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent, reproducible generator for a (seed, key...) address.

    Distinct keys give statistically independent streams; the same
    (seed, key) always reproduces the same draws regardless of what other
    streams were consumed. Safe to hand out across trial workers.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


@dataclass(frozen=True)
class ChannelSample:
    """One user's channel realization: desired H (N_r x N_t) and a stack of
    K-1 interferer matrices G ((K-1) x N_r x N_t)."""

    H: np.ndarray
    G: np.ndarray

    @property
    def h(self) -> np.ndarray:
        """Single-stream desired vector (first/only column of H)."""
        return self.H[:, 0]


@dataclass(frozen=True)
class WLChannelSample:
    """Widely-linear view: stacked real desired vector (2N_r,) and stacked
    interferer vectors ((K-1) x 2N_r), each entry ~ N(0, 1/2)."""

    h_t: np.ndarray
    g_t: np.ndarray


def _cn_matrix(rng: np.random.Generator, shape) -> np.ndarray:
    # two independent N(0, 1/2) draws per entry -> unit-variance CN(0,1)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_channel(cfg: SystemConfig, rng: np.random.Generator) -> ChannelSample:
    """Draw one user's desired and interfering channels."""
    H = _cn_matrix(rng, (cfg.N_r, cfg.N_t))
    G = _cn_matrix(rng, (cfg.K - 1, cfg.N_r, cfg.N_t))
    return ChannelSample(H=H, G=G)


def draw_channel_batch(cfg: SystemConfig, rng: np.random.Generator, count: int):
    """Draw channels for `count` trials x L users in one shot.

    Returns (H, G) with shapes (count, L, N_r, N_t) and
    (count, L, K-1, N_r, N_t). Draw order is fixed (H first), so results
    are reproducible for a given generator state.
    """
    H = _cn_matrix(rng, (count, cfg.L, cfg.N_r, cfg.N_t))
    G = _cn_matrix(rng, (count, cfg.L, cfg.K - 1, cfg.N_r, cfg.N_t))
    return H, G


def stack_real(x: np.ndarray) -> np.ndarray:
    """Stack real parts over imaginary parts along the last axis.

    Length-n complex -> length-2n real; linear and norm-preserving.
    The quadrature-phase image of a complex stream is stack_real(1j * x).
    """
    x = np.asarray(x)
    return np.concatenate([x.real, x.imag], axis=-1)


def wl_view(sample: ChannelSample) -> WLChannelSample:
    """Widely-linear (stacked) view of a single-stream channel sample."""
    return WLChannelSample(h_t=stack_real(sample.h), g_t=stack_real(sample.G[:, :, 0]))
