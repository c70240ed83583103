r"""Monte Carlo estimation engine and sweep orchestration.

Trials are processed in fixed-size chunks, each with its own reproducible
RNG substream keyed by (seed, domain, chunk index), so results are a pure
function of the configuration no matter how many worker threads run the
chunks. Within a capacity sweep the same channel draws are reused across
the whole SNR grid (common random numbers): only the noise power changes,
which also makes per-realization capacity monotone in SNR.

Per-trial work is vectorized: covariance matrices for a whole chunk of
trials and users are built at once, and per-stream MMSE SINRs come from
one batched solve via the rank-one identity

    gamma_s = q_s / (1 - q_s),   q_s = c_s^H B^{-1} c_s,

where B is the full covariance including the desired stream c_s.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .channel import stack_real, substream
from .config import SystemConfig
from .errors import ConfigError, UnsupportedAnalyticsError
from .outage import solve_target_beta, sum_outage_capacity, top_closed_form
from .scheduler import StreamPlan, build_streams

# substream domain labels (part of the public reproducibility contract)
DOMAIN_TOP = 1
DOMAIN_CAPACITY = 2
DOMAIN_STREAM_OUTAGE = 3

_DEFAULT_THREADS = min(8, os.cpu_count() or 1)


def _chunk_trials(cfg: SystemConfig, t: int) -> int:
    """Chunk size bounded by working-set size; depends only on the config
    shape so outputs stay byte-identical across machines and thread counts."""
    n = 2 * cfg.N_r
    per_trial = cfg.L * n * (cfg.K * max(t, 1) + n) * 16 * 4
    return int(np.clip(32_000_000 // max(per_trial, 1), 16, 1024))


def _pool_map(fn, items, threads):
    workers = _DEFAULT_THREADS if threads is None else max(1, int(threads))
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# batched channel/CQI kernels
# ---------------------------------------------------------------------------

def _draw_unit_channels(cfg: SystemConfig, rng: np.random.Generator, count: int):
    """Unit-power desired and interferer matrices for count trials x L users:
    H (count, L, N_r, N_t), G (count, L, K-1, N_r, N_t)."""
    shape_h = (count, cfg.L, cfg.N_r, cfg.N_t)
    shape_g = (count, cfg.L, cfg.K - 1, cfg.N_r, cfg.N_t)
    H = (rng.standard_normal(shape_h) + 1j * rng.standard_normal(shape_h)) / np.sqrt(2.0)
    G = (rng.standard_normal(shape_g) + 1j * rng.standard_normal(shape_g)) / np.sqrt(2.0)
    return H, G


def _wl_columns(M: np.ndarray, plan: StreamPlan, power: float) -> np.ndarray:
    """Stacked-real stream columns for a complex channel matrix M
    (..., N_r, N_a) under the encoding plan: (..., 2 N_r, t)."""
    cols = []
    for s in plan.streams:
        base = M[..., :, s.antenna]
        if s.component == "quadrature":
            stacked = stack_real(1j * base)
        else:
            stacked = stack_real(base)
        cols.append(math.sqrt(power * s.power_share) * stacked)
    return np.stack(cols, axis=-1)


def _stream_columns(H, G, cfg: SystemConfig, plan: StreamPlan):
    """(own, interferer) column tensors in the receiver's working domain:
    complex N_r space for complex encoding, stacked real 2 N_r space
    otherwise. Interfering transmitters reuse the same encoding plan."""
    if cfg.encoding == "complex":
        own = math.sqrt(cfg.S / cfg.N_t) * H
        inter = math.sqrt(cfg.I_0 / cfg.N_t) * np.moveaxis(G, -3, -2).reshape(
            *G.shape[:-3], cfg.N_r, (cfg.K - 1) * cfg.N_t
        )
        return own, inter
    own = _wl_columns(H, plan, cfg.S)
    inter = np.concatenate(
        [_wl_columns(G[..., i, :, :], plan, cfg.I_0) for i in range(cfg.K - 1)], axis=-1
    )
    return own, inter


def _noise_per_dim(cfg_encoding: str, N_0: float) -> float:
    return N_0 if cfg_encoding == "complex" else N_0 / 2.0


def _gram_batch(cols: np.ndarray) -> np.ndarray:
    return np.einsum("...ia,...ja->...ij", cols, cols.conj())


def _true_cqi(own, inter, noise: float) -> np.ndarray:
    """True per-stream post-SINRs (..., L, t) via the rank-one identity."""
    n = own.shape[-2]
    B = _gram_batch(own) + _gram_batch(inter)
    B[..., np.arange(n), np.arange(n)] += noise
    X = np.linalg.solve(B, own)
    q = np.einsum("...ia,...ia->...a", own.conj(), X).real
    return q / (1.0 - q)


def _lb_cqi(own, inter, noise: float) -> np.ndarray:
    """Minimum-eigenvalue lower-bound SINRs (..., L, t)."""
    t = own.shape[-1]
    out = np.empty(own.shape[:-2] + (t,))
    gram_inter = _gram_batch(inter)
    gram_own = _gram_batch(own) if t > 1 else None
    for i in range(t):
        ci = own[..., i]
        if t == 1:  # single stream: no self-interference term
            icm = gram_inter
        else:
            icm = gram_inter + gram_own - np.einsum("...i,...j->...ij", ci, ci.conj())
        w, v = np.linalg.eigh(icm)
        lam_min = np.clip(w[..., 0].real, 0.0, None)
        omega = np.einsum("...i,...i->...", v[..., 0].conj(), ci)
        out[..., i] = np.abs(omega) ** 2 / (lam_min + noise)
    return out


def _schedule_batch(cqi: np.ndarray):
    """Sequential max-SINR over batched (..., L, t) CQI tables.

    Returns (users, gammas) of shape (..., t); later streams exclude
    already-scheduled users (first-index tie-break via argmax).
    """
    L, t = cqi.shape[-2:]
    taken = np.zeros(cqi.shape[:-2] + (L,), dtype=bool)
    users = np.empty(cqi.shape[:-2] + (t,), dtype=np.int64)
    gammas = np.empty(cqi.shape[:-2] + (t,))
    for i in range(t):
        col = np.where(taken, -np.inf, cqi[..., i])
        sel = np.argmax(col, axis=-1)
        users[..., i] = sel
        gammas[..., i] = np.take_along_axis(cqi[..., i], sel[..., None], axis=-1)[..., 0]
        np.put_along_axis(taken, sel[..., None], True, axis=-1)
    return users, gammas


def _cqi_for(cfg: SystemConfig, H, G, N_0: float, mode: str, plan: StreamPlan) -> np.ndarray:
    own, inter = _stream_columns(H, G, cfg, plan)
    noise = _noise_per_dim(cfg.encoding, N_0)
    if mode == "true_sinr":
        return _true_cqi(own, inter, noise)
    if mode == "lb_sinr":
        return _lb_cqi(own, inter, noise)
    raise ValueError("mode must be 'true_sinr' or 'lb_sinr'")


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McCurve:
    """Monte Carlo curve: estimate and binomial/sample stderr per x point.

    For tail probabilities, points backed by fewer than 10 events are
    flagged unreliable (reliable mask is all-True for capacity curves).
    """

    x: np.ndarray
    value: np.ndarray
    stderr: np.ndarray
    trials: int
    reliable: np.ndarray = None

    def __post_init__(self):
        if self.reliable is None:
            object.__setattr__(self, "reliable", np.ones_like(np.asarray(self.value), dtype=bool))


def _chunks(trials: int, chunk: int):
    return [(idx, min(chunk, trials - idx * chunk)) for idx in range((trials + chunk - 1) // chunk)]


def estimate_top_mc(cfg: SystemConfig, betas, mode: str = "lb_sinr",
                    trials: int | None = None, threads: int | None = None,
                    stream_key: int = 0) -> McCurve:
    """Empirical transmitter outage probability P(max_l CQI_l < beta) for
    single-stream transmission, on a grid of target SNRs.

    mode selects the reported CQI: the true post-SINR or its
    minimum-eigenvalue lower bound (the quantity the closed forms bound).
    """
    if cfg.N_t != 1:
        raise ConfigError("estimate_top_mc is single-stream; use estimate_stream_outage_mc")
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    trials = cfg.trials if trials is None else int(trials)
    plan = build_streams(cfg)
    chunk = _chunk_trials(cfg, plan.t)

    def run(spec):
        idx, count = spec
        rng = substream(cfg.seed, DOMAIN_TOP, stream_key, idx)
        H, G = _draw_unit_channels(cfg, rng, count)
        cqi = _cqi_for(cfg, H, G, cfg.N_0, mode, plan)
        max_stat = cqi[..., 0].max(axis=1)
        return (max_stat[:, None] < betas[None, :]).sum(axis=0)

    counts = sum(_pool_map(run, _chunks(trials, chunk), threads))
    p = counts / trials
    return McCurve(x=betas, value=p, stderr=np.sqrt(p * (1.0 - p) / trials),
                   trials=trials, reliable=counts >= 10)


def estimate_stream_outage_mc(cfg: SystemConfig, betas, mode: str = "true_sinr",
                              trials: int | None = None, threads: int | None = None,
                              stream_key: int = 0) -> list[McCurve]:
    """Per-stream outage of the sequential max-SINR scheduler: for each
    stream index i, P(gamma_{i, l*(i)} < beta). Returns one curve per
    stream."""
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    trials = cfg.trials if trials is None else int(trials)
    plan = build_streams(cfg)
    if cfg.L < plan.t:
        raise ConfigError(f"need L >= t ({plan.t}) to schedule distinct users")
    chunk = _chunk_trials(cfg, plan.t)

    def run(spec):
        idx, count = spec
        rng = substream(cfg.seed, DOMAIN_STREAM_OUTAGE, stream_key, idx)
        H, G = _draw_unit_channels(cfg, rng, count)
        cqi = _cqi_for(cfg, H, G, cfg.N_0, mode, plan)
        _, gammas = _schedule_batch(cqi)  # (count, t)
        return (gammas[:, :, None] < betas[None, None, :]).sum(axis=0)

    counts = sum(_pool_map(run, _chunks(trials, chunk), threads))
    curves = []
    for i in range(plan.t):
        p = counts[i] / trials
        curves.append(McCurve(x=betas, value=p, stderr=np.sqrt(p * (1 - p) / trials),
                              trials=trials, reliable=counts[i] >= 10))
    return curves


def capacity_samples(cfg: SystemConfig, snr_db_grid, trials: int | None = None,
                     threads: int | None = None, stream_key: int = 0,
                     mode: str = "true_sinr") -> np.ndarray:
    """Per-realization sum capacities (trials, n_snr) under common random
    numbers: identical channel draws across the SNR grid, with
    N_0 = S 10^(-SNR/10) at each point.

    Capacity per realization is K sum_s prelog_s log2(1 + gamma_s) at the
    scheduled users' true post-SINRs.
    """
    snr_db_grid = np.atleast_1d(np.asarray(snr_db_grid, dtype=float))
    trials = cfg.trials if trials is None else int(trials)
    plan = build_streams(cfg)
    prelog = np.array([s.rate_prelog for s in plan.streams])
    chunk = _chunk_trials(cfg, plan.t)

    def run(spec):
        idx, count = spec
        rng = substream(cfg.seed, DOMAIN_CAPACITY, stream_key, idx)
        H, G = _draw_unit_channels(cfg, rng, count)
        out = np.empty((count, len(snr_db_grid)))
        for j, snr in enumerate(snr_db_grid):
            N_0 = cfg.S * 10.0 ** (-snr / 10.0)
            cqi = _cqi_for(cfg, H, G, N_0, mode, plan)
            _, gammas = _schedule_batch(cqi)
            out[:, j] = cfg.K * (prelog * np.log2(1.0 + gammas)).sum(axis=-1)
        return out

    return np.concatenate(_pool_map(run, _chunks(trials, chunk), threads), axis=0)


def estimate_mean_sum_capacity(cfg: SystemConfig, snr_db_grid,
                               trials: int | None = None,
                               threads: int | None = None,
                               stream_key: int = 0) -> McCurve:
    """Mean sum capacity over channel realizations at each SNR point."""
    samples = capacity_samples(cfg, snr_db_grid, trials=trials, threads=threads,
                               stream_key=stream_key)
    n = samples.shape[0]
    return McCurve(
        x=np.atleast_1d(np.asarray(snr_db_grid, dtype=float)),
        value=samples.mean(axis=0),
        stderr=samples.std(axis=0, ddof=1) / math.sqrt(n),
        trials=n,
    )


def outage_capacity_vs_L(cfg: SystemConfig, L_grid, target_top: float):
    """Sum outage capacity achievable at a fixed TOP target as the user
    pool grows: beta*(L) from the closed form, then K R log2(1+beta*)."""
    if not 0.0 < target_top < 1.0:
        raise ValueError("target_top must be in (0, 1)")
    L_grid = [int(L) for L in np.atleast_1d(L_grid)]
    betas, caps = [], []
    for L in L_grid:
        beta_star = solve_target_beta(target_top, L, cfg)
        betas.append(beta_star)
        caps.append(sum_outage_capacity(beta_star, cfg))
    return np.array(L_grid), np.array(betas), np.array(caps)


def fit_scaling_exponent(snr_db_grid, L_values):
    """Least-squares slope of ln L against ln SNR (linear SNR), with a
    95% confidence half-width from the residuals."""
    snr_db_grid = np.asarray(snr_db_grid, dtype=float)
    L_values = np.asarray(L_values, dtype=float)
    if snr_db_grid.size < 4:
        raise ValueError("need at least 4 grid points")
    if np.any(L_values <= 0):
        raise ValueError("all L values must be positive")
    x = np.log(10.0 ** (snr_db_grid / 10.0))
    y = np.log(L_values)
    n = x.size
    xm = x - x.mean()
    slope = float(xm @ (y - y.mean()) / (xm @ xm))
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    se = math.sqrt(max(float(resid @ resid), 0.0) / max(n - 2, 1) / float(xm @ xm))
    return slope, 1.96 * se


# ---------------------------------------------------------------------------
# sweep records and CSV emission
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("metric", "encoding", "K", "Nt", "Nr", "L", "snr_db", "beta_db",
               "trials", "mc_value", "mc_stderr", "analytic_value",
               "analytic_kind", "seed")


@dataclass(frozen=True)
class ResultRecord:
    """One sweep point in the documented CSV schema. Missing values are
    None and serialize to empty fields; wall_time is bookkeeping only and
    never written to the CSV."""

    metric: str
    encoding: str
    K: int
    Nt: int
    Nr: int
    L: int
    snr_db: float | None = None
    beta_db: float | None = None
    trials: int | None = None
    mc_value: float | None = None
    mc_stderr: float | None = None
    analytic_value: float | None = None
    analytic_kind: str | None = None
    seed: int | None = None
    wall_time: float = 0.0


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # builtin float: shortest round-trip repr
    return str(value)


def emit_records(records, path) -> None:
    """Write records as CSV in the given (deterministic) order."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for rec in records:
                writer.writerow([_fmt(getattr(rec, col)) for col in CSV_COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write records to {path}: {exc}") from exc


def parse_records(path) -> list[ResultRecord]:
    """Read back a CSV produced by emit_records."""
    casts = {f.name: f.type for f in fields(ResultRecord)}
    out = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns in {path}: {reader.fieldnames}")
        for row in reader:
            kwargs = {}
            for col in CSV_COLUMNS:
                raw = row[col]
                if raw == "":
                    kwargs[col] = None
                elif "int" in str(casts[col]):
                    kwargs[col] = int(raw)
                elif "float" in str(casts[col]):
                    kwargs[col] = float(raw)
                else:
                    kwargs[col] = raw
            out.append(ResultRecord(**kwargs))
    return out


@dataclass(frozen=True)
class SweepSpec:
    """A one-axis sweep: the base scenario, the metric to evaluate, the
    swept axis ("beta_db" | "snr_db" | "L" | "K") and its strictly
    increasing grid, plus the TOP target and CQI mode where applicable.
    Encoding comparisons are curve families rather than a numeric axis;
    the figure catalog provides them directly."""

    base: SystemConfig
    metric: str  # top | mean_sum_capacity | outage_capacity_vs_L | scaling_exponent
    axis: str
    grid: tuple
    target_top: float | None = None
    mode: str = "lb_sinr"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.size == 0 or np.any(np.diff(grid) <= 0):
            raise ConfigError("sweep grid must be nonempty and strictly increasing")


def _db(x: float) -> float:
    return 10.0 * math.log10(x)


def run_sweep(spec: SweepSpec, threads: int | None = None) -> list[ResultRecord]:
    """Execute a sweep and return records in deterministic grid order."""
    cfg = spec.base
    t0 = time.perf_counter()
    records: list[ResultRecord] = []
    common = dict(encoding=cfg.encoding, K=cfg.K, Nt=cfg.N_t, Nr=cfg.N_r, L=cfg.L,
                  seed=cfg.seed)

    if spec.metric == "top":
        if spec.axis != "beta_db":
            raise ConfigError("metric 'top' sweeps axis 'beta_db'")
        betas = 10.0 ** (np.asarray(spec.grid, dtype=float) / 10.0)
        curve = estimate_top_mc(cfg, betas, mode=spec.mode, threads=threads)
        for bdb, beta, p, se in zip(spec.grid, betas, curve.value, curve.stderr):
            try:
                analytic = top_closed_form(beta, cfg)
                aval, akind = analytic.top_ub, analytic.analytic_kind
            except UnsupportedAnalyticsError:
                aval, akind = None, None
            records.append(ResultRecord(
                metric=f"top_{'lb' if spec.mode == 'lb_sinr' else 'true'}",
                snr_db=cfg.snr_db, beta_db=float(bdb), trials=curve.trials,
                mc_value=float(p), mc_stderr=float(se), analytic_value=aval,
                analytic_kind=akind, wall_time=time.perf_counter() - t0, **common))
    elif spec.metric == "mean_sum_capacity":
        if spec.axis == "snr_db":
            curve = estimate_mean_sum_capacity(cfg, spec.grid, threads=threads)
            for snr, v, se in zip(spec.grid, curve.value, curve.stderr):
                records.append(ResultRecord(
                    metric="mean_sum_capacity", snr_db=float(snr), trials=curve.trials,
                    mc_value=float(v), mc_stderr=float(se),
                    wall_time=time.perf_counter() - t0, **common))
        elif spec.axis == "K":
            for idx, K in enumerate(spec.grid):
                point = cfg.replace(K=int(K))
                curve = estimate_mean_sum_capacity(point, [cfg.snr_db],
                                                   threads=threads, stream_key=idx)
                records.append(ResultRecord(
                    metric="mean_sum_capacity", encoding=cfg.encoding, K=int(K),
                    Nt=cfg.N_t, Nr=cfg.N_r, L=cfg.L, seed=cfg.seed,
                    snr_db=cfg.snr_db, trials=curve.trials,
                    mc_value=float(curve.value[0]), mc_stderr=float(curve.stderr[0]),
                    wall_time=time.perf_counter() - t0))
        else:
            raise ConfigError("metric 'mean_sum_capacity' sweeps axis 'snr_db' or 'K'")
    elif spec.metric == "outage_capacity_vs_L":
        if spec.axis != "L":
            raise ConfigError("metric 'outage_capacity_vs_L' sweeps axis 'L'")
        if spec.target_top is None:
            raise ConfigError("outage_capacity_vs_L needs target_top")
        Ls, betas, caps = outage_capacity_vs_L(cfg, spec.grid, spec.target_top)
        for L, beta, cap in zip(Ls, betas, caps):
            records.append(ResultRecord(
                metric="outage_capacity_vs_L", encoding=cfg.encoding, K=cfg.K,
                Nt=cfg.N_t, Nr=cfg.N_r, L=int(L), snr_db=cfg.snr_db,
                beta_db=_db(beta), analytic_value=float(cap),
                analytic_kind="solved_beta", seed=cfg.seed,
                wall_time=time.perf_counter() - t0))
    elif spec.metric == "scaling_exponent":
        if spec.axis != "snr_db":
            raise ConfigError("metric 'scaling_exponent' sweeps axis 'snr_db'")
        if spec.target_top is None:
            raise ConfigError("scaling_exponent needs target_top")
        from .outage import users_required

        L_vals = []
        for snr in spec.grid:
            snr_lin = 10.0 ** (snr / 10.0)
            point = cfg.replace(N_0=cfg.S / snr_lin)
            req = users_required(spec.target_top, snr_lin, point)
            L_vals.append(req.exact)
            records.append(ResultRecord(
                metric="users_required", snr_db=float(snr),
                analytic_value=float(req.exact), analytic_kind="exact",
                wall_time=time.perf_counter() - t0, **common))
        slope, ci = fit_scaling_exponent(spec.grid, L_vals)
        records.append(ResultRecord(
            metric="scaling_exponent", analytic_value=float(slope),
            analytic_kind=f"ci95={ci:.3g}", wall_time=time.perf_counter() - t0,
            **common))
    else:
        raise ConfigError(f"unknown metric {spec.metric!r}")
    return records
