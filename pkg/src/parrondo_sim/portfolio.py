"""Portfolio accounting at daily close prices.

Holdings are real-valued share counts. A trade sells fractions of some
positions and reinvests every unit of the proceeds the same day, so cash is
always zero overnight and a trade never changes the portfolio's value at that
day's prices. There are no fees.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numba
import numpy as np

from .market import PriceSeries

SELL_MIN = 0.2
SELL_MAX = 0.8


class TradeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Portfolio:
    holdings: np.ndarray
    cash: float = 0.0

    def __post_init__(self):
        holdings = np.array(self.holdings, dtype=float)
        if np.any(holdings < 0):
            raise TradeError("holdings must be non-negative")
        holdings.setflags(write=False)
        object.__setattr__(self, "holdings", holdings)

    def __eq__(self, other):
        if not isinstance(other, Portfolio):
            return NotImplemented
        return self.cash == other.cash and np.array_equal(self.holdings, other.holdings)


@dataclass(frozen=True)
class TradeDecision:
    """Sell ``fraction`` of each listed position, reinvest by ``buy_weights``.

    Tickers are column indices into the price matrix.
    """

    sells: tuple[tuple[int, float], ...] = ()
    buy_weights: Mapping[int, float] = field(default_factory=dict)

    @classmethod
    def hold(cls) -> "TradeDecision":
        return cls()

    @property
    def actionable(self) -> bool:
        return bool(self.sells) and bool(self.buy_weights)

    def validate(self, n_tickers: int) -> None:
        sold = set()
        for i, frac in self.sells:
            if not 0 <= i < n_tickers:
                raise TradeError(f"unknown ticker index {i}")
            if not SELL_MIN <= frac <= SELL_MAX:
                raise TradeError(f"sell fraction {frac} outside [{SELL_MIN}, {SELL_MAX}]")
            if i in sold:
                raise TradeError(f"ticker {i} sold twice")
            sold.add(i)
        for j, w in self.buy_weights.items():
            if not 0 <= j < n_tickers:
                raise TradeError(f"unknown ticker index {j}")
            if j in sold:
                raise TradeError(f"ticker {j} on both sides of the trade")
            if not w >= 0:
                raise TradeError(f"negative buy weight {w}")
        if self.buy_weights and abs(sum(self.buy_weights.values()) - 1.0) > 1e-9:
            raise TradeError("buy weights must sum to 1")


def init_portfolio(prices: PriceSeries, per_stock_value: float = 10000.0) -> Portfolio:
    return Portfolio(per_stock_value / prices.prices[0])


def value(portfolio: Portfolio, prices: PriceSeries, day: int) -> float:
    return float(np.dot(portfolio.holdings, prices.prices[day])) + portfolio.cash


def execute(portfolio: Portfolio, decision: TradeDecision, prices: PriceSeries,
            day: int) -> Portfolio:
    """Apply one day's trade at that day's close. Non-actionable decisions hold."""
    decision.validate(prices.n_tickers)
    if not decision.actionable:
        return portfolio
    px = prices.prices[day]
    holdings = portfolio.holdings.copy()
    proceeds = 0.0
    for i, frac in decision.sells:
        sold = frac * holdings[i]
        proceeds += sold * px[i]
        holdings[i] -= sold
    for j, w in decision.buy_weights.items():
        holdings[j] += w * proceeds / px[j]
    return Portfolio(holdings, 0.0)


def trajectory(holdings: Sequence[float], prices: PriceSeries) -> np.ndarray:
    """Daily mark-to-market of fixed holdings."""
    return prices.prices @ np.asarray(holdings, dtype=float)


@numba.njit(cache=True)
def _trade_path(holdings, prices, sell, fractions, buy_raw, by_holdings):
    T, N = prices.shape
    h = holdings.copy()
    out = np.empty(T)
    for d in range(T):
        px = prices[d]
        total = 0.0
        for j in range(N):
            if buy_raw[d, j] > 0.0:
                total += h[j] * px[j] if by_holdings else buy_raw[d, j]
        n_sell = 0
        for i in range(N):
            if sell[d, i]:
                n_sell += 1
        if n_sell > 0 and total > 0.0:
            weights = np.zeros(N)
            for j in range(N):
                if buy_raw[d, j] > 0.0:
                    weights[j] = (h[j] * px[j] if by_holdings else buy_raw[d, j]) / total
            proceeds = 0.0
            for i in range(N):
                if sell[d, i]:
                    sold = fractions[d, i] * h[i]
                    proceeds += sold * px[i]
                    h[i] -= sold
            for j in range(N):
                if weights[j] > 0.0:
                    h[j] += weights[j] * proceeds / px[j]
        v = 0.0
        for i in range(N):
            v += h[i] * px[i]
        out[d] = v
    return out


def trade_path(holdings, prices: PriceSeries, sell: np.ndarray, fractions: np.ndarray,
               buy_raw: np.ndarray, by_holdings: bool = False) -> np.ndarray:
    """Daily values from trading a precomputed sequence of decisions.

    Same arithmetic, in the same order, as calling ``execute`` day by day with
    the decisions ``build_decision`` makes from each row.
    """
    return _trade_path(np.asarray(holdings, dtype=float), prices.prices,
                       np.ascontiguousarray(sell, dtype=np.bool_),
                       np.ascontiguousarray(fractions, dtype=float),
                       np.ascontiguousarray(buy_raw, dtype=float), bool(by_holdings))
