"""Financial turbulence: Mahalanobis distance of daily returns from their
trailing history, plus the halt-threshold calibration."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputInvalid, InsufficientData, SingularCovariance
from .market_data import PricePanel

DEFAULT_LOOKBACK = 252
DEFAULT_QUANTILE = 0.99
DEFAULT_RIDGE_SCALE = 1e-8


@dataclass(frozen=True)
class TurbulenceContext:
    """Trailing-window return statistics the index is measured against."""

    mu: np.ndarray
    sigma: np.ndarray
    lookback: int
    ridge: float = 0.0

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise InputInvalid("sigma must be square")
        if not np.allclose(sigma, sigma.T, atol=1e-12):
            raise InputInvalid("sigma must be symmetric")
        if self.ridge < 0:
            raise InputInvalid("ridge must be non-negative")
        if self.lookback < sigma.shape[0] + 1:
            raise InputInvalid("lookback must exceed the asset count")


@dataclass
class TurbulenceSeries:
    values: np.ndarray
    threshold: float = np.inf

    def value_at(self, t: int) -> float:
        return float(self.values[t])


def default_ridge(sigma: np.ndarray) -> float:
    d = sigma.shape[0]
    return DEFAULT_RIDGE_SCALE * float(np.trace(sigma)) / d


def turbulence_index(y: np.ndarray, ctx: TurbulenceContext) -> float:
    """(y - mu) (Sigma + ridge I)^-1 (y - mu)', clamped at 0."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InputInvalid("non-finite return vector")
    dev = y - ctx.mu
    reg = np.asarray(ctx.sigma, dtype=float) + ctx.ridge * np.eye(len(ctx.mu))
    try:
        solved = np.linalg.solve(reg, dev)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(str(exc)) from exc
    return max(0.0, float(dev @ solved))


def panel_returns(panel: PricePanel) -> np.ndarray:
    """Simple daily returns of adj_close; shape (T-1, D), row t is the
    return from calendar date t to t+1."""
    p = panel.adj_close
    return p[1:] / p[:-1] - 1.0


def rolling_turbulence(panel: PricePanel, lookback: int = DEFAULT_LOOKBACK,
                       ridge: float | None = None) -> TurbulenceSeries:
    """Turbulence value per calendar date.

    Date t uses the trailing `lookback` return observations strictly before
    t's return; dates without enough history get 0. `ridge=None` picks the
    trace-scaled default per window.
    """
    if lookback < panel.D + 1:
        raise InputInvalid("lookback must be at least D + 1")
    rets = panel_returns(panel)
    values = np.zeros(panel.T)
    # return r[t-1] belongs to date t; history window is r[t-1-lookback : t-1]
    for t in range(lookback + 1, panel.T):
        window = rets[t - 1 - lookback:t - 1]
        mu = window.mean(axis=0)
        sigma = np.cov(window, rowvar=False, bias=False)
        sigma = np.atleast_2d(sigma)
        r = default_ridge(sigma) if ridge is None else ridge
        ctx = TurbulenceContext(mu=mu, sigma=sigma, lookback=lookback, ridge=r)
        values[t] = turbulence_index(rets[t - 1], ctx)
    return TurbulenceSeries(values=values)


def calibrate_threshold(values: np.ndarray, quantile: float) -> float:
    """Lower empirical quantile of the defined (positive-history) values."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InsufficientData(needed="at least one turbulence value",
                               available=0)
    if not 0.0 < quantile <= 1.0:
        raise InputInvalid("quantile must be in (0, 1]")
    ordered = np.sort(values)
    idx = int(np.ceil(quantile * ordered.size)) - 1
    return float(ordered[max(idx, 0)])
