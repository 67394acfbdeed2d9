"""The seven trading strategies, random stock selection and hint messages.

Each trading day every strategy except buy-and-hold consumes the same block of
draws: a sell-side selection, a buy-side selection, and one sell fraction per
ticker, used or not. Fixed consumption keeps streams aligned, so an insider
without hints trades exactly like Random on the same stream.

Decisions depend only on prices, hints and draws (plus current holdings in
``holdings`` reinvest mode), so ``decide_block`` computes a whole run's sell
masks and buy weights at once; ``decide`` is the single-day view of it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .market import PriceSeries
from .portfolio import SELL_MAX, SELL_MIN, Portfolio, TradeDecision

DRAW_BOUND = 1 << 32


class StrategyKind(str, enum.Enum):
    BAH = "bah"
    RANDOM = "random"
    INSIDER = "insider"
    BLSH = "blsh"
    BLSR = "blsr"
    BRSH = "brsh"
    BHSL = "bhsl"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, token: str) -> "StrategyKind":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise ValueError(f"unknown strategy {token!r}; choose from "
                             f"{', '.join(k.value for k in cls)}") from None


_LABELS = {
    StrategyKind.BAH: "BaH", StrategyKind.RANDOM: "Random", StrategyKind.INSIDER: "Insider",
    StrategyKind.BLSH: "BLSH", StrategyKind.BLSR: "BLSR", StrategyKind.BRSH: "BRSH",
    StrategyKind.BHSL: "BHSL",
}

ALL_STRATEGIES = tuple(StrategyKind)


class ReinvestMode(str, enum.Enum):
    MULTIPLICITY = "multiplicity"
    HOLDINGS = "holdings"


@dataclass(frozen=True)
class Hint:
    day: int
    ticker: int
    direction: int  # +1 up, -1 down, for the move from day to day + 1


@dataclass(frozen=True, eq=False)
class HintStream:
    """Per (day, ticker) hint directions; 0 means no hint."""

    hint_prob: float
    directions: np.ndarray

    def for_day(self, day: int) -> np.ndarray:
        return self.directions[day]

    @property
    def hints(self) -> list[Hint]:
        days, tickers = np.nonzero(self.directions)
        return [Hint(int(d), int(i), int(self.directions[d, i])) for d, i in zip(days, tickers)]

    def __len__(self) -> int:
        return int(np.count_nonzero(self.directions))


@dataclass(frozen=True)
class Draws:
    """Random inputs for one or more trading days; arrays are (days, N) or (N,)."""

    sell_counts: np.ndarray
    buy_counts: np.ndarray
    fractions: np.ndarray

    def day(self, d: int) -> "Draws":
        return Draws(self.sell_counts[d], self.buy_counts[d], self.fractions[d])


def selection_from_draws(draws, n: int) -> np.ndarray:
    """Multiplicity of each index among ``draws`` reduced mod ``n``, per row."""
    idx = (np.asarray(draws, dtype=np.uint64) % np.uint64(n)).astype(np.int64)
    flat = idx.reshape(-1, idx.shape[-1])
    offsets = (np.arange(flat.shape[0]) * n)[:, None]
    counts = np.bincount((flat + offsets).ravel(), minlength=flat.shape[0] * n)
    return counts.reshape(idx.shape[:-1] + (n,))


def random_selection(rng: np.random.Generator, n: int = 10) -> np.ndarray:
    """Draw ``n`` 32-bit integers, reduce mod ``n``; return per-ticker counts."""
    if n < 1:
        raise ValueError("universe must hold at least one ticker")
    return selection_from_draws(rng.integers(0, DRAW_BOUND, size=n, dtype=np.uint64), n)


def draw_block(rng: np.random.Generator, days: int, n: int) -> Draws:
    """All selection draws for ``days`` days, then all sell fractions."""
    raw = rng.integers(0, DRAW_BOUND, size=(days, 2, n), dtype=np.uint64)
    counts = selection_from_draws(raw, n)
    fractions = rng.uniform(SELL_MIN, SELL_MAX, size=(days, n))
    return Draws(counts[:, 0], counts[:, 1], fractions)


def generate_hints(prices: PriceSeries, hint_prob: float,
                   rng: np.random.Generator) -> HintStream:
    """Each (day, ticker) gets a hint with probability ``hint_prob``.

    A hint on day d tells the true direction of the d -> d+1 move; flat moves
    yield none. The last day has no next move and never carries hints.
    """
    if not 0.0 <= hint_prob <= 1.0:
        raise ValueError(f"hint_prob must lie in [0, 1], got {hint_prob}")
    T, N = prices.prices.shape
    fired = rng.random((T - 1, N)) < hint_prob
    directions = np.zeros((T, N), dtype=np.int8)
    directions[:-1] = np.where(fired, prices.moves[1:], 0)
    directions.setflags(write=False)
    return HintStream(hint_prob, directions)


def decide_block(kind: StrategyKind, moves: np.ndarray, hints: Optional[np.ndarray],
                 draws: Draws) -> tuple[np.ndarray, np.ndarray]:
    """Sell masks and unnormalized buy weights, one row per day.

    ``moves`` holds the sign of each day's move into that day (row 0 flat),
    ``hints`` the insider's hint directions for each day. Rows that are not
    actionable come back all-zero. Random sides lose any ticker already on the
    other side and are weighted by draw multiplicity; rule-derived buy sides
    get equal weights.
    """
    kind = StrategyKind(kind)
    moves = np.asarray(moves)
    if kind is StrategyKind.BAH:
        return np.zeros(moves.shape, dtype=bool), np.zeros(moves.shape)
    up, down = moves > 0, moves < 0
    rand_sell = draws.sell_counts > 0
    rand_buy = draws.buy_counts.astype(float)

    if kind is StrategyKind.BLSH:
        sell, buy = up, down.astype(float)
    elif kind is StrategyKind.BHSL:
        sell, buy = down, up.astype(float)
    elif kind is StrategyKind.BLSR:
        sell, buy = rand_sell & ~down, down.astype(float)
    elif kind is StrategyKind.BRSH:
        sell, buy = up, np.where(up, 0.0, rand_buy)
    else:
        # Random is an insider that never hears anything
        if kind is StrategyKind.INSIDER and hints is not None:
            hint_up, hint_down = np.asarray(hints) > 0, np.asarray(hints) < 0
        else:
            hint_up = hint_down = np.zeros(moves.shape, dtype=bool)
        has_up = hint_up.any(axis=-1, keepdims=True)
        has_down = hint_down.any(axis=-1, keepdims=True)
        sell = np.where(has_down, hint_down, rand_sell & ~hint_up)
        buy = np.where(has_up, hint_up.astype(float), np.where(sell, 0.0, rand_buy))

    actionable = sell.any(axis=-1, keepdims=True) & (buy > 0).any(axis=-1, keepdims=True)
    return sell & actionable, np.where(actionable, buy, 0.0)


def build_decision(sell: np.ndarray, buy_raw: np.ndarray, fractions: np.ndarray,
                   holdings_value: Optional[np.ndarray] = None) -> TradeDecision:
    """Turn one day's masks into a TradeDecision.

    With ``holdings_value`` given, buy weights follow the value currently held
    in each bought ticker instead of ``buy_raw``.
    """
    if holdings_value is not None:
        buy_raw = np.where(buy_raw > 0, holdings_value, 0.0)
    sells = np.flatnonzero(sell)
    total = float(np.sum(buy_raw))
    if sells.size == 0 or total <= 0.0:
        return TradeDecision.hold()
    return TradeDecision(
        sells=tuple((int(i), float(fractions[i])) for i in sells),
        buy_weights={int(j): float(buy_raw[j] / total) for j in np.flatnonzero(buy_raw)},
    )


def decide(kind: StrategyKind, day: int, prices: PriceSeries, hints: Optional[np.ndarray],
           portfolio: Portfolio, stream: Union[np.random.Generator, Draws],
           reinvest: ReinvestMode = ReinvestMode.MULTIPLICITY) -> TradeDecision:
    """One day's trade for ``kind``.

    Only the move into ``day`` is consulted; ``hints`` is the row of hint
    directions delivered on ``day``, ignored by everyone but the insider.
    ``stream`` is either a generator, from which one day's draws are taken, or
    that day's pre-drawn ``Draws``.
    """
    kind = StrategyKind(kind)
    if kind is StrategyKind.BAH:
        return TradeDecision.hold()
    draws = stream if isinstance(stream, Draws) else draw_block(stream, 1, prices.n_tickers).day(0)
    sell, buy = decide_block(kind, prices.moves[day], hints, draws)
    held = None
    if ReinvestMode(reinvest) is ReinvestMode.HOLDINGS:
        held = portfolio.holdings * prices.prices[day]
    return build_decision(sell, buy, draws.fractions, held)
