"""MACD, RSI, CCI, and ADX feature blocks for the observation vector.

The smoothing recursions run in a compiled kernel when the extension is
available, otherwise in the pure-Python twin; `KERNEL_BACKEND` says which
one was picked at import time.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputEmpty
from .market_data import PricePanel

try:
    from . import _ind_kernels as _kernels
except ImportError:  # extension not built; use the slow twin
    from . import _kernels_py as _kernels

KERNEL_BACKEND: str = _kernels.BACKEND


@dataclass(frozen=True)
class IndicatorConfig:
    macd_fast: int = 12
    macd_slow: int = 26
    macd_signal: int = 9
    rsi_period: int = 14
    cci_period: int = 14
    adx_period: int = 14

    def __post_init__(self):
        if not 0 < self.macd_fast < self.macd_slow:
            raise ValueError("need 0 < macd_fast < macd_slow")
        for p in (self.rsi_period, self.cci_period, self.adx_period):
            if p < 1:
                raise ValueError("indicator periods must be >= 1")


@dataclass(frozen=True)
class FeaturePanel:
    """T x D indicator blocks aligned with a PricePanel."""

    macd: np.ndarray
    rsi: np.ndarray
    cci: np.ndarray
    adx: np.ndarray
    warmup_len: int

    def __post_init__(self):
        shapes = {self.macd.shape, self.rsi.shape, self.cci.shape,
                  self.adx.shape}
        if len(shapes) != 1:
            raise ValueError(f"mismatched block shapes: {shapes}")

    @property
    def T(self) -> int:
        return self.macd.shape[0]

    @property
    def D(self) -> int:
        return self.macd.shape[1]

    def at(self, t: int) -> dict[str, np.ndarray]:
        return {"macd": self.macd[t], "rsi": self.rsi[t],
                "cci": self.cci[t], "adx": self.adx[t]}


def _check_series(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise InputEmpty("empty price series")
    return x


def macd(close, fast: int = 12, slow: int = 26, signal: int = 9) -> np.ndarray:
    """MACD line: EMA(fast) - EMA(slow).

    `signal` is accepted for configuration compatibility; the feature block
    uses the MACD line itself.
    """
    close = _check_series(close)
    if not 0 < fast < slow:
        raise ValueError("need 0 < fast < slow")
    alpha_f = 2.0 / (fast + 1.0)
    alpha_s = 2.0 / (slow + 1.0)
    return _kernels.ema(close, alpha_f) - _kernels.ema(close, alpha_s)


def rsi(close, period: int = 14) -> np.ndarray:
    """Wilder-smoothed RSI in [0, 100]; first `period` entries are 50."""
    close = _check_series(close)
    return _kernels.rsi_kernel(close, int(period))


def cci(high, low, close, period: int = 14) -> np.ndarray:
    """Commodity channel index; zero mean deviation maps to 0."""
    high = _check_series(high)
    low = _check_series(low)
    close = _check_series(close)
    tp = (high + low + close) / 3.0
    return _kernels.cci_kernel(tp, int(period))


def adx(high, low, close, period: int = 14) -> np.ndarray:
    """Wilder ADX in [0, 100]; warmup (first 2*period-1 entries) is 0."""
    high = _check_series(high)
    low = _check_series(low)
    close = _check_series(close)
    return _kernels.adx_kernel(high, low, close, int(period))


def build_features(panel: PricePanel,
                   config: IndicatorConfig = IndicatorConfig()) -> FeaturePanel:
    """Compute all four indicator blocks per asset.

    MACD and RSI run on the adjusted close (the trading price); CCI and ADX
    additionally use high/low.
    """
    adj = panel.adj_close
    high = panel.field("high")
    low = panel.field("low")
    T, D = adj.shape
    blocks = {name: np.empty((T, D)) for name in ("macd", "rsi", "cci", "adx")}
    for d in range(D):
        blocks["macd"][:, d] = macd(adj[:, d], config.macd_fast,
                                    config.macd_slow, config.macd_signal)
        blocks["rsi"][:, d] = rsi(adj[:, d], config.rsi_period)
        blocks["cci"][:, d] = cci(high[:, d], low[:, d], adj[:, d],
                                  config.cci_period)
        blocks["adx"][:, d] = adx(high[:, d], low[:, d], adj[:, d],
                                  config.adx_period)
    warmup = max(config.macd_slow, config.rsi_period, config.cci_period,
                 2 * config.adx_period - 1)
    return FeaturePanel(warmup_len=warmup, **blocks)
