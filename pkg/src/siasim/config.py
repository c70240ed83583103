"""Scenario configuration for the symmetric interference channel.

All powers are linear. The network has K transmitters; each serves its own
pool of L active users and every user sees the K-1 other transmitters as
equal-power interferers (power I_0 each), with thermal noise N_0. dB values
exist only at the CLI boundary.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import ConfigError

ENCODINGS = ("complex", "real", "mixed")


@dataclass(frozen=True)
class SystemConfig:
    """Full parameterization of one simulation / analysis scenario.

    K         transmitter count (>= 1)
    N_t       transmit antennas per transmitter; for real encoding this is
              also the stream count t (one real stream per antenna)
    N_r       receive antennas per user
    L         active users per transmitter (>= N_t)
    S         desired signal power (> 0)
    I_0       per-interferer power (>= 0; 0 degenerates to noise-limited)
    N_0       noise power (> 0)
    encoding  "complex" | "real" | "mixed"
    mixed_m   number of complex-encoded antennas for mixed encoding,
              0 <= mixed_m <= N_t (ignored otherwise)
    trials    Monte Carlo realization count
    seed      RNG seed; the full simulation output is a pure function of
              this config, seed included
    """

    K: int
    N_t: int
    N_r: int
    L: int
    S: float = 1.0
    I_0: float = 1.0
    N_0: float = 1e-2
    encoding: str = "complex"
    mixed_m: int = 0
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.K < 1 or self.N_t < 1 or self.N_r < 1:
            raise ConfigError("K, N_t, N_r must all be >= 1")
        if self.L < self.N_t:
            raise ConfigError(f"L={self.L} < N_t={self.N_t}; need L >= N_t")
        if not self.S > 0:
            raise ConfigError("S must be > 0")
        if self.I_0 < 0:
            raise ConfigError("I_0 must be >= 0")
        if not self.N_0 > 0:
            raise ConfigError("N_0 must be > 0")
        if self.encoding not in ENCODINGS:
            raise ConfigError(f"encoding must be one of {ENCODINGS}")
        if self.encoding == "mixed" and not 0 <= self.mixed_m <= self.N_t:
            raise ConfigError(f"mixed_m={self.mixed_m} outside [0, N_t]")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")

    @property
    def snr_db(self) -> float:
        """Operating SNR = S / N_0 in dB."""
        import math

        return 10.0 * math.log10(self.S / self.N_0)

    @classmethod
    def at_snr_db(cls, snr_db: float, **kwargs) -> "SystemConfig":
        """Construct with the sweep convention S = I_0 = 1, N_0 = 10^(-SNR/10)."""
        kwargs.setdefault("S", 1.0)
        kwargs.setdefault("I_0", 1.0)
        return cls(N_0=10.0 ** (-snr_db / 10.0), **kwargs)

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


def parse_kv_file(path) -> dict:
    """Parse a plain ``key = value`` config file.

    Lines starting with '#' (or blank) are ignored. Values are typed as
    int, then float, then left as strings.
    """
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        for cast in (int, float):
            try:
                out[key] = cast(val)
                break
            except ValueError:
                continue
        else:
            out[key] = val
    return out
