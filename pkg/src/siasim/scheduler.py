"""Opportunistic user selection and stream-set construction.

Single stream: serve the user with the maximum reported post-SINR.
Multi-stream: greedy sequential max-SINR, excluding already-scheduled users
from each later stream's eligible set, so no user receives two streams.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import ConfigError


@dataclass(frozen=True)
class StreamSpec:
    """One transmitted stream: which antenna carries it, its component
    ("complex" | "in_phase" | "quadrature" | "real"), the receiver that
    detects it, the fraction of total transmit power it gets, and the
    pre-log rate factor (1 for a complex stream, 1/2 for a real one)."""

    antenna: int
    component: str
    receiver: str  # "mmse" | "wl-mmse"
    power_share: float
    rate_prelog: float


@dataclass(frozen=True)
class StreamPlan:
    streams: tuple
    t: int
    sm_rate: float  # total pre-log multiplexing rate R


def build_streams(cfg: SystemConfig) -> StreamPlan:
    """Stream descriptors for the configured encoding.

    complex:  N_t complex streams, one per antenna, R = N_t.
    real:     t = N_t real streams on t antennas, R = t/2.
    mixed(m): each of the first m antennas carries an I/Q pair of real
              streams (two scheduled users per antenna), the remaining
              N_t - m antennas carry one real stream each; t = N_t + m,
              R = (N_t + m)/2, all streams detected widely-linearly.
    """
    if cfg.encoding == "complex":
        streams = tuple(
            StreamSpec(a, "complex", "mmse", 1.0 / cfg.N_t, 1.0) for a in range(cfg.N_t)
        )
    elif cfg.encoding == "real":
        streams = tuple(
            StreamSpec(a, "real", "wl-mmse", 1.0 / cfg.N_t, 0.5) for a in range(cfg.N_t)
        )
    else:  # mixed
        m = cfg.mixed_m
        if not 0 <= m <= cfg.N_t:
            raise ConfigError(f"mixed_m={m} outside [0, N_t]")
        specs = []
        for a in range(m):
            # a complex antenna splits its power between its I and Q streams
            specs.append(StreamSpec(a, "in_phase", "wl-mmse", 0.5 / cfg.N_t, 0.5))
            specs.append(StreamSpec(a, "quadrature", "wl-mmse", 0.5 / cfg.N_t, 0.5))
        for a in range(m, cfg.N_t):
            specs.append(StreamSpec(a, "real", "wl-mmse", 1.0 / cfg.N_t, 0.5))
        streams = tuple(specs)
    return StreamPlan(streams=streams, t=len(streams), sm_rate=sum(s.rate_prelog for s in streams))


@dataclass(frozen=True)
class StreamAssignment:
    stream: int
    user: int
    gamma: float
    rate: float  # log2(1 + gamma); pre-log factors applied by the caller


@dataclass(frozen=True)
class ScheduleDecision:
    assignments: tuple
    t: int
    encoding: str

    @property
    def users(self):
        return tuple(a.user for a in self.assignments)

    @property
    def sum_rate(self) -> float:
        return sum(a.rate for a in self.assignments)


def max_sinr_select(gammas) -> tuple[int, float]:
    """Index and value of the maximum report; ties break to the lowest index."""
    gammas = np.asarray(gammas, dtype=float)
    if gammas.size == 0:
        raise ValueError("empty report list")
    idx = int(np.argmax(gammas))
    return idx, float(gammas[idx])


def sequential_max_sinr(cqi: np.ndarray, encoding: str = "complex",
                        allow_multi_stream: bool = False) -> ScheduleDecision:
    """Greedy per-stream scheduling over an L x t CQI table.

    Stream i takes the argmax over users not scheduled for streams < i
    (eligible set size L - i). With allow_multi_stream the exclusion is
    dropped and one user may win several streams.
    """
    cqi = np.asarray(cqi, dtype=float)
    L, t = cqi.shape
    if L < t and not allow_multi_stream:
        raise ValueError(f"need L >= t to schedule distinct users (L={L}, t={t})")
    taken = np.zeros(L, dtype=bool)
    assignments = []
    for i in range(t):
        col = cqi[:, i].copy()
        if not allow_multi_stream:
            col[taken] = -np.inf
        user = int(np.argmax(col))
        gamma = float(cqi[user, i])
        taken[user] = True
        assignments.append(StreamAssignment(i, user, gamma, math.log2(1.0 + gamma)))
    return ScheduleDecision(assignments=tuple(assignments), t=t, encoding=encoding)


def exhaustive_best_group(cqi: np.ndarray) -> tuple[tuple[int, ...], float]:
    """Brute-force optimal distinct-user assignment (sum-rate objective).

    Reference oracle for measuring the greedy scheduler's sub-optimality
    gap; exponential in t, so restricted to small tables (L <= 8, t <= 3).
    """
    cqi = np.asarray(cqi, dtype=float)
    L, t = cqi.shape
    if L > 8 or t > 3:
        raise ValueError("exhaustive search restricted to L <= 8, t <= 3")
    best, best_rate = None, -np.inf
    for perm in itertools.permutations(range(L), t):
        rate = sum(math.log2(1.0 + cqi[u, i]) for i, u in enumerate(perm))
        if rate > best_rate:
            best, best_rate = perm, rate
    return best, float(best_rate)
