"""Multi-stock trading MDP.

Continuous per-asset actions in [-1, 1] are resolved into integer share
trades at the current adjusted close, transaction costs are charged at a
proportional rate on every trade, and the reward is the resulting change
of portfolio value. A turbulence override liquidates everything and blocks
buying while the index is above its threshold.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EpisodeFinished, InsufficientData
from .indicators import FeaturePanel
from .market_data import PricePanel
from .turbulence import TurbulenceSeries


@dataclass(frozen=True)
class ObsScaling:
    price: float = 100.0
    macd: float = 100.0
    rsi: float = 100.0
    cci: float = 250.0
    adx: float = 100.0


@dataclass(frozen=True)
class EnvConfig:
    initial_balance: float = 1_000_000.0
    h_max: int = 100
    fee_rate: float = 0.001
    reward_scale: float = 1e-4
    obs_scaling: ObsScaling = field(default_factory=ObsScaling)


@dataclass(frozen=True)
class EnvState:
    t: int
    balance: float
    holdings: np.ndarray  # int64, non-negative
    prices: np.ndarray  # positive, adj close at t
    done: bool = False

    @property
    def portfolio_value(self) -> float:
        return self.balance + float(self.prices @ self.holdings)


@dataclass(frozen=True)
class TradePlan:
    sell_shares: np.ndarray  # int64 >= 0 per asset
    buy_shares: np.ndarray  # int64 >= 0 per asset

    @property
    def sells(self) -> dict[int, int]:
        return {d: int(k) for d, k in enumerate(self.sell_shares) if k > 0}

    @property
    def buys(self) -> dict[int, int]:
        return {d: int(k) for d, k in enumerate(self.buy_shares) if k > 0}

    @property
    def holds(self) -> set[int]:
        return {d for d in range(len(self.sell_shares))
                if self.sell_shares[d] == 0 and self.buy_shares[d] == 0}


@dataclass(frozen=True)
class StepResult:
    next_state: EnvState
    reward: float  # scaled by config.reward_scale
    reward_unscaled: float
    cost: float
    plan: TradePlan
    reward_components: dict[str, float]
    turbulence_triggered: bool


def clip_action(raw) -> np.ndarray:
    return np.clip(np.asarray(raw, dtype=float), -1.0, 1.0)


def resolve_action(state: EnvState, action, h_max: int,
                   fee_rate: float) -> TradePlan:
    """Turn a [-1, 1] action vector into integer share trades.

    Desired shares are truncated toward zero from raw * h_max. Sells are
    capped at current holdings and credit the balance (net of fees) before
    buys, which are processed in ascending asset index, each capped at what
    the remaining cash affords including the fee. Unaffordable remainder is
    dropped, so the post-trade balance can never go negative.
    """
    raw = clip_action(action)
    desired = np.trunc(raw * h_max).astype(np.int64)
    sell = np.minimum(np.maximum(-desired, 0), state.holdings)
    buy_req = np.maximum(desired, 0)

    cash = state.balance + float((state.prices * sell).sum()) * (1.0 - fee_rate)
    buy = np.zeros_like(buy_req)
    for d in np.flatnonzero(buy_req):
        unit = state.prices[d] * (1.0 + fee_rate)
        affordable = int(np.floor(cash / unit))
        k = min(int(buy_req[d]), affordable)
        if k > 0:
            buy[d] = k
            cash -= k * unit
    return TradePlan(sell_shares=sell, buy_shares=buy)


def sell_all_action(state: EnvState, h_max: int) -> np.ndarray:
    """Action that liquidates every held position and buys nothing."""
    raw = np.where(state.holdings > 0, -1.0, 0.0)
    return raw


def apply_turbulence_override(state: EnvState, action,
                              turbulence_value: float,
                              threshold: float, h_max: int) -> tuple[np.ndarray, bool]:
    """Above the threshold: halt buying, sell everything. Returns the
    possibly-replaced action and whether the override fired."""
    if turbulence_value > threshold:
        return sell_all_action(state, h_max), True
    return clip_action(action), False


class TradingEnv:
    """Episode over a contiguous index window [start, end] of the panel.

    Steps run t = start .. end-1; each step trades at date t prices and is
    rewarded at date t+1 prices. A fresh portfolio starts with
    config.initial_balance and zero holdings; `reset` accepts carried-over
    balance/holdings for walk-forward continuation.
    """

    def __init__(self, panel: PricePanel, features: FeaturePanel,
                 window: tuple[int, int], config: EnvConfig = EnvConfig(),
                 turbulence: TurbulenceSeries | None = None,
                 turbulence_threshold: float = np.inf):
        if window[1] <= window[0]:
            raise InsufficientData(needed="window of at least 2 dates",
                                   available=window[1] - window[0] + 1)
        if window[0] < 0 or window[1] >= panel.T:
            raise InsufficientData(needed=f"window {window} inside panel",
                                   available=panel.T)
        self.panel = panel
        self.features = features
        self.start, self.end = window
        self.config = config
        self.turbulence = turbulence
        self.threshold = turbulence_threshold
        self.state: EnvState | None = None

    @property
    def D(self) -> int:
        return self.panel.D

    @property
    def obs_dim(self) -> int:
        return 1 + 6 * self.D

    @property
    def action_dim(self) -> int:
        return self.D

    def _prices(self, t: int) -> np.ndarray:
        return self.panel.frame_at(t).prices

    def reset(self, balance: float | None = None,
              holdings: np.ndarray | None = None) -> np.ndarray:
        bal = self.config.initial_balance if balance is None else float(balance)
        hold = (np.zeros(self.D, dtype=np.int64) if holdings is None
                else np.asarray(holdings, dtype=np.int64).copy())
        self.state = EnvState(t=self.start, balance=bal, holdings=hold,
                              prices=self._prices(self.start))
        return self.observe()

    def turbulence_at(self, t: int) -> float:
        return self.turbulence.value_at(t) if self.turbulence is not None else 0.0

    def step_state(self, state: EnvState, action) -> StepResult:
        """Pure transition: resolve trades at t, settle at t+1."""
        if state.done:
            raise EpisodeFinished(f"episode already done at t={state.t}")
        cfg = self.config
        turb = self.turbulence_at(state.t)
        action, triggered = apply_turbulence_override(
            state, action, turb, self.threshold, cfg.h_max)
        if triggered:
            # Full liquidation, not capped by h_max.
            plan = TradePlan(sell_shares=state.holdings.copy(),
                             buy_shares=np.zeros(self.D, dtype=np.int64))
        else:
            plan = resolve_action(state, action, cfg.h_max, cfg.fee_rate)

        p_t = state.prices
        sell_notional = float((p_t * plan.sell_shares).sum())
        buy_notional = float((p_t * plan.buy_shares).sum())
        cost = cfg.fee_rate * (sell_notional + buy_notional)
        balance = state.balance + sell_notional - buy_notional - cost
        holdings = state.holdings - plan.sell_shares + plan.buy_shares

        t_next = state.t + 1
        p_next = self._prices(t_next)
        next_state = EnvState(t=t_next, balance=balance, holdings=holdings,
                              prices=p_next, done=t_next >= self.end)

        reward_unscaled = next_state.portfolio_value - state.portfolio_value
        dp = p_next - p_t
        hold_mask = (plan.sell_shares == 0) & (plan.buy_shares == 0)
        # Component convention (the accounting identity is the contract):
        # r_H over untouched holdings, r_S over shares retained after selling
        # (negated), r_B over post-buy holdings in the buy set, so that
        # reward + cost == r_H - r_S + r_B.
        r_h = float((dp * state.holdings * hold_mask).sum())
        r_s = float((dp * (plan.sell_shares - state.holdings)
                     * (plan.sell_shares > 0)).sum())
        r_b = float((dp * (state.holdings + plan.buy_shares)
                     * (plan.buy_shares > 0)).sum())
        components = {"r_H": r_h, "r_S": r_s, "r_B": r_b}

        return StepResult(next_state=next_state,
                          reward=reward_unscaled * cfg.reward_scale,
                          reward_unscaled=reward_unscaled,
                          cost=cost, plan=plan,
                          reward_components=components,
                          turbulence_triggered=triggered)

    def step(self, action) -> tuple[np.ndarray, float, bool]:
        """Gym-style wrapper over `step_state`; mutates the held state."""
        result = self.step_state(self.state, action)
        self.state = result.next_state
        self.last_result = result
        return self.observe(), result.reward, result.next_state.done

    def observe(self, state: EnvState | None = None) -> np.ndarray:
        state = self.state if state is None else state
        cfg = self.config
        sc = cfg.obs_scaling
        t = state.t
        f = self.features
        return np.concatenate([
            [state.balance / cfg.initial_balance],
            state.prices / sc.price,
            state.holdings / cfg.h_max,
            f.macd[t] / sc.macd,
            f.rsi[t] / sc.rsi,
            f.cci[t] / sc.cci,
            f.adx[t] / sc.adx,
        ])
