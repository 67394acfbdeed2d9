"""Repetition loop and aggregation for the trading experiment.

Within a repetition all strategies see the same prices and every insider
variant sees the hint stream for its level; each strategy trades on its own
private stream. Randomness is keyed by ``(master_seed, "rep", i, ...)`` so a
repetition gives the same result on any worker, and aggregation always runs in
repetition order.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .market import PriceSeries, SawtoothSpec, generate_sawtooth, load_fixture, load_prices
from .portfolio import init_portfolio, trade_path, trajectory
from .streams import split_stream
from .strategies import (ALL_STRATEGIES, HintStream, ReinvestMode, StrategyKind, decide_block,
                         draw_block, generate_hints)

FIXTURE_PREFIX = "fixture:"
DEFAULT_SOURCE = FIXTURE_PREFIX + "table2"
DEFAULT_HINT_PROBS = (0.01, 0.05, 0.10)


def prob_token(p: float) -> str:
    return repr(float(p))


@dataclass(frozen=True)
class Variant:
    kind: StrategyKind
    hint_prob: Optional[float] = None

    @property
    def label(self) -> str:
        if self.hint_prob is None:
            return self.kind.value
        return f"{self.kind.value}@{prob_token(self.hint_prob)}"


@dataclass(frozen=True)
class ExperimentConfig:
    price_source: Union[str, SawtoothSpec] = DEFAULT_SOURCE
    days: Optional[int] = 252
    reps: int = 1000
    per_stock_value: float = 10000.0
    strategies: tuple[StrategyKind, ...] = ALL_STRATEGIES
    hint_probs: tuple[float, ...] = DEFAULT_HINT_PROBS
    master_seed: int = 0
    reinvest_mode: ReinvestMode = ReinvestMode.MULTIPLICITY

    def __post_init__(self):
        object.__setattr__(self, "strategies",
                           tuple(StrategyKind(s) for s in self.strategies))
        object.__setattr__(self, "hint_probs", tuple(float(p) for p in self.hint_probs))
        object.__setattr__(self, "reinvest_mode", ReinvestMode(self.reinvest_mode))
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.days is not None and self.days < 2:
            raise ValueError("days must be at least 2")
        if any(not 0.0 <= p <= 1.0 for p in self.hint_probs):
            raise ValueError("hint probabilities must lie in [0, 1]")
        if not self.strategies:
            raise ValueError("no strategies selected")
        if StrategyKind.INSIDER in self.strategies and not self.hint_probs:
            raise ValueError("the insider strategy needs at least one hint probability")
        if not self.per_stock_value >= 0:
            raise ValueError("per_stock_value must be non-negative")

    def variants(self) -> list[Variant]:
        out = []
        for kind in dict.fromkeys(self.strategies):
            if kind is StrategyKind.INSIDER:
                out.extend(Variant(kind, p) for p in dict.fromkeys(self.hint_probs))
            else:
                out.append(Variant(kind))
        return out

    def to_dict(self) -> dict:
        source = self.price_source
        return {
            "price_source": source.to_dict() if isinstance(source, SawtoothSpec) else source,
            "days": self.days,
            "reps": self.reps,
            "per_stock_value": self.per_stock_value,
            "strategies": [k.value for k in self.strategies],
            "hint_probs": list(self.hint_probs),
            "master_seed": self.master_seed,
            "reinvest_mode": self.reinvest_mode.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if isinstance(d.get("price_source"), dict):
            d["price_source"] = SawtoothSpec.from_dict(d["price_source"])
        for key in ("strategies", "hint_probs"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


@dataclass(frozen=True, eq=False)
class StrategySummary:
    variant: Variant
    mean_final: float
    std_final: float
    standard_error: float
    mean_trajectory: np.ndarray
    finals: np.ndarray = field(repr=False)

    @property
    def strategy(self) -> StrategyKind:
        return self.variant.kind

    @property
    def hint_prob(self) -> Optional[float]:
        return self.variant.hint_prob

    @property
    def label(self) -> str:
        return self.variant.label


def load_config_prices(config: ExperimentConfig) -> PriceSeries:
    source = config.price_source
    if isinstance(source, SawtoothSpec):
        series = generate_sawtooth(source)
    elif source.startswith(FIXTURE_PREFIX):
        series = load_fixture(source[len(FIXTURE_PREFIX):])
    else:
        series = load_prices(Path(source))
    if config.days is None:
        return series
    if series.days < config.days:
        raise ValueError(f"price data has {series.days} days, config asks for {config.days}")
    return series.head(config.days)


def hint_stream(config: ExperimentConfig, prices: PriceSeries, rep: int, p: float) -> HintStream:
    rng = split_stream(config.master_seed, ["rep", rep, "hints", prob_token(p)])
    return generate_hints(prices, p, rng)


def strategy_stream(config: ExperimentConfig, rep: int, kind: StrategyKind) -> np.random.Generator:
    # insider variants share one stream so hint levels compare on common draws
    return split_stream(config.master_seed, ["rep", rep, "strategy", kind.value])


def run_variant(config: ExperimentConfig, prices: PriceSeries, rep: int, variant: Variant,
                hints: Optional[HintStream] = None) -> np.ndarray:
    """Mark-to-market value of one strategy over every day of one repetition."""
    portfolio = init_portfolio(prices, config.per_stock_value)
    if variant.kind is StrategyKind.BAH:
        return trajectory(portfolio.holdings, prices)
    draws = draw_block(strategy_stream(config, rep, variant.kind), prices.days, prices.n_tickers)
    directions = hints.directions if hints is not None else None
    sell, buy = decide_block(variant.kind, prices.moves, directions, draws)
    return trade_path(portfolio.holdings, prices, sell, draws.fractions, buy,
                      config.reinvest_mode is ReinvestMode.HOLDINGS)


def run_repetition(config: ExperimentConfig, rep: int,
                   prices: Optional[PriceSeries] = None) -> dict[str, np.ndarray]:
    """Trajectories of every configured variant for repetition ``rep``."""
    if prices is None:
        prices = load_config_prices(config)
    variants = config.variants()
    levels = dict.fromkeys(v.hint_prob for v in variants if v.hint_prob is not None)
    streams = {p: hint_stream(config, prices, rep, p) for p in levels}
    return {v.label: run_variant(config, prices, rep, v, streams.get(v.hint_prob))
            for v in variants}


def _run_chunk(args):
    config, prices, reps = args
    return [run_repetition(config, rep, prices) for rep in reps]


def run_trajectories(config: ExperimentConfig, prices: Optional[PriceSeries] = None,
                     threads: int = 1) -> dict[str, np.ndarray]:
    """reps x T value matrix per variant label, rows in repetition order."""
    if prices is None:
        prices = load_config_prices(config)
    reps = list(range(config.reps))
    if threads > 1 and config.reps > 1:
        n_chunks = min(config.reps, 4 * threads)
        chunks = [reps[k::n_chunks] for k in range(n_chunks)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_run_chunk, [(config, prices, c) for c in chunks]))
        by_rep = {}
        for chunk, part in zip(chunks, parts):
            by_rep.update(zip(chunk, part))
        results = [by_rep[r] for r in reps]
    else:
        results = _run_chunk((config, prices, reps))
    labels = [v.label for v in config.variants()]
    return {label: np.stack([res[label] for res in results]) for label in labels}


def summarize(variant: Variant, paths: np.ndarray) -> StrategySummary:
    finals = paths[:, -1].copy()
    reps = len(finals)
    std = float(np.std(finals, ddof=1)) if reps > 1 else 0.0
    return StrategySummary(
        variant=variant,
        mean_final=float(np.mean(finals)),
        std_final=std,
        standard_error=std / math.sqrt(reps),
        mean_trajectory=paths.mean(axis=0),
        finals=finals,
    )


def run_experiment(config: ExperimentConfig, prices: Optional[PriceSeries] = None,
                   threads: int = 1) -> list[StrategySummary]:
    """Summaries for every variant, best mean final value first."""
    paths = run_trajectories(config, prices, threads)
    summaries = [summarize(v, paths[v.label]) for v in config.variants()]
    # stable sort keeps config order among exact ties
    return sorted(summaries, key=lambda s: -s.mean_final)


def compare_hint_levels(config: ExperimentConfig, prices: Optional[PriceSeries] = None,
                        threads: int = 1) -> list[StrategySummary]:
    """Insider summaries at each hint level, lowest level first, paired by repetition."""
    if len(set(config.hint_probs)) < 2:
        raise ValueError("need at least two hint levels to compare")
    insider_only = replace(config, strategies=(StrategyKind.INSIDER,))
    summaries = run_experiment(insider_only, prices, threads)
    return sorted(summaries, key=lambda s: s.hint_prob)
