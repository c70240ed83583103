"""Exception types raised across the package."""


class SiasimError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SiasimError):
    """Invalid scenario configuration or config file."""


class CoefficientsUnavailableError(SiasimError):
    """Requested MEV coefficient pair is outside the tabulated set.

    Closed-form outage expressions are unavailable for this geometry; use
    ``wishart.sample_mev`` / the Monte Carlo estimators instead.
    """


class SingularMatrixError(SiasimError):
    """Covariance matrix numerically singular (typically N_0 ~ 0)."""


class UnsupportedAnalyticsError(SiasimError):
    """No validated closed form exists for the requested configuration."""


class BracketingError(SiasimError):
    """Root bracketing failed; carries the evaluated endpoint values."""

    def __init__(self, msg, lo, f_lo, hi, f_hi):
        super().__init__(f"{msg} (f({lo:g})={f_lo:g}, f({hi:g})={f_hi:g})")
        self.lo, self.f_lo, self.hi, self.f_hi = lo, f_lo, hi, f_hi
