"""Shared statistics: log-space power-law fits, z-scores, nMAE and ASD."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal


class FitError(ValueError):
    """Raised when a regression is ill-posed (bad data, degenerate design)."""


@dataclass(frozen=True)
class PowerLawFit:
    """``y = coefficient * prod(x_i ** exponents[i])`` fitted by OLS in log space."""

    coefficient: float
    exponents: tuple[float, ...]
    r_squared: float
    n: int
    raw_rmse: float
    units: dict = field(default_factory=dict)

    @property
    def exponent(self) -> float:
        return self.exponents[0]

    def predict(self, *x):
        y = self.coefficient
        for xi, p in zip(x, self.exponents):
            y = y * np.asarray(xi, dtype=float) ** p
        return y

    def to_dict(self) -> dict:
        return {
            "coefficient": self.coefficient,
            "exponents": list(self.exponents),
            "r_squared": self.r_squared,
            "n": self.n,
            "raw_rmse": self.raw_rmse,
            "units": dict(self.units),
        }


def multivar_loglog_fit(X, y, units: dict | None = None) -> PowerLawFit:
    """Fit ``y = c * prod_j X[:, j] ** p_j`` by least squares on logarithms.

    Parameters
    ----------
    X : array_like, shape (n,) or (n, m)
        Strictly positive regressors.
    y : array_like, shape (n,)
        Strictly positive response.

    Returns
    -------
    PowerLawFit
        Coefficient, exponents, and the coefficient of determination in log space.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, m = X.shape
    if y.shape != (n,):
        raise FitError(f"shape mismatch: X has {n} rows, y has shape {y.shape}")
    if n < m + 2:
        raise FitError(f"need more than {m + 1} points, got {n}")
    if np.any(~np.isfinite(X)) or np.any(~np.isfinite(y)) or np.any(X <= 0) or np.any(y <= 0):
        raise FitError("power-law regression needs finite, strictly positive data")
    lx = np.log(X)
    ly = np.log(y)
    A = np.column_stack([np.ones(n), lx])
    if np.linalg.matrix_rank(A) < m + 1:
        raise FitError("regressors are rank deficient in log space")
    beta, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ beta
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    if ss_tot == 0.0:
        # constant response: a perfect fit with zero exponents
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    coef = float(np.exp(beta[0]))
    raw = coef * np.prod(X ** beta[1:], axis=1)
    return PowerLawFit(
        coefficient=coef,
        exponents=tuple(float(b) for b in beta[1:]),
        r_squared=r2,
        n=n,
        raw_rmse=float(np.sqrt(np.mean((raw - y) ** 2))),
        units=dict(units or {}),
    )


def loglog_fit(x, y, units: dict | None = None) -> PowerLawFit:
    """Single-regressor power law ``y = c x^b``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise FitError("loglog_fit expects a 1-D regressor")
    if x.size >= 2 and np.ptp(np.log(np.where(x > 0, x, 1.0))) == 0.0:
        raise FitError("degenerate regressor variance")
    return multivar_loglog_fit(x, y, units)


def zscore(sim_peak: float, samples) -> float:
    """z of a simulated peak against experimental samples (unbiased sigma)."""
    s = np.asarray(samples, dtype=float)
    if s.size < 2:
        raise ValueError("z-score needs at least two samples")
    return zscore_from_stats(sim_peak, float(s.mean()), float(s.std(ddof=1)))


def zscore_from_stats(sim_peak: float, mean: float, sigma: float) -> float:
    if not sigma > 0:
        raise ValueError("standard deviation must be positive")
    return (sim_peak - mean) / sigma


def nmae(a, b, normalizer: float) -> float:
    """Mean absolute difference of two curves on a shared grid, over ``normalizer``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"grid mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a - b)) / normalizer)


@dataclass(frozen=True)
class Spectrum:
    freq: np.ndarray
    asd: np.ndarray  # amplitude / sqrt(Hz)

    def peak(self, fmin: float = 0.0, fmax: float = np.inf) -> tuple[float, float]:
        sel = (self.freq >= fmin) & (self.freq <= fmax)
        if not np.any(sel):
            raise ValueError("empty frequency band")
        i = np.argmax(np.where(sel, self.asd, -np.inf))
        return float(self.freq[i]), float(self.asd[i])

    def at(self, f: float) -> float:
        return float(np.interp(f, self.freq, self.asd))


def asd(x, dt: float, nperseg: int | None = None) -> Spectrum:
    """One-sided amplitude spectral density (units of x per sqrt(Hz)).

    Welch averaging with a Hann window and 50% overlap; the PSD is density
    scaled so that ``sum(asd**2) * df`` equals the signal variance.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 64:
        raise ValueError("ASD needs a 1-D signal with at least 64 samples")
    if nperseg is None:
        nperseg = min(x.size, max(64, x.size // 2))
    f, pxx = signal.welch(
        x, fs=1.0 / dt, window="hann", nperseg=nperseg, noverlap=nperseg // 2,
        detrend="constant", scaling="density",
    )
    return Spectrum(freq=f, asd=np.sqrt(pxx))
