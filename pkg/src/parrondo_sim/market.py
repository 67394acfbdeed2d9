"""Daily price series: CSV ingestion, normalization, and a synthetic saw-tooth market.

The ten-stock fixture shipped in ``fixtures/`` is generated by
``generate_sawtooth`` from the terminal normalized values of the original
Swedish portfolio (start of period = 100).
"""
from __future__ import annotations

import csv
import datetime as dt
import enum
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import IO, Union

import numpy as np

from .streams import split_stream

CSV_HEADER = ("date", "ticker", "close")
FIXTURE_START = "2000-03-01"

TABLE2_TICKERS = ("ABB", "ALLGON", "BOLIDEN", "ENEA", "HM",
                  "ERICSSON", "OM", "SCANIA", "SECURITAS", "SKANDIA")
TABLE2_ENDPOINTS = (83.33, 24.55, 37.19, 20.09, 60.40,
                    36.36, 48.67, 77.80, 80.35, 53.22)


class PriceDataError(ValueError):
    """Invalid price data."""


class PriceParseError(PriceDataError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class Move(enum.IntEnum):
    DOWN = -1
    FLAT = 0
    UP = 1


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """T x N close prices; row 0 is day 0."""

    tickers: tuple[str, ...]
    prices: np.ndarray
    dates: tuple[str, ...] = ()

    def __post_init__(self):
        prices = np.array(self.prices, dtype=float)
        if prices.ndim != 2:
            raise PriceDataError("prices must be a T x N matrix")
        T, N = prices.shape
        if N < 1 or T < 2:
            raise PriceDataError(f"need at least 2 days and 1 ticker, got {T} x {N}")
        if len(self.tickers) != N or len(set(self.tickers)) != N:
            raise PriceDataError("tickers must be unique and match the price columns")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise PriceDataError("all prices must be finite and strictly positive")
        dates = tuple(self.dates) or business_days(FIXTURE_START, T)
        if len(dates) != T:
            raise PriceDataError(f"{len(dates)} dates for {T} days")
        prices.setflags(write=False)
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", dates)

    @property
    def days(self) -> int:
        return self.prices.shape[0]

    @property
    def n_tickers(self) -> int:
        return self.prices.shape[1]

    def index(self, ticker: Union[str, int]) -> int:
        if isinstance(ticker, (int, np.integer)):
            if not 0 <= ticker < self.n_tickers:
                raise PriceDataError(f"ticker index {ticker} out of range")
            return int(ticker)
        try:
            return self.tickers.index(ticker)
        except ValueError:
            raise PriceDataError(f"unknown ticker {ticker!r}") from None

    @cached_property
    def moves(self) -> np.ndarray:
        """Sign of the move into each day; row 0 is all FLAT."""
        out = np.zeros(self.prices.shape, dtype=np.int8)
        out[1:] = np.sign(np.diff(self.prices, axis=0))
        out.setflags(write=False)
        return out

    def head(self, days: int) -> "PriceSeries":
        return PriceSeries(self.tickers, self.prices[:days], self.dates[:days])

    def __eq__(self, other):
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (self.tickers == other.tickers and self.dates == other.dates
                and np.array_equal(self.prices, other.prices))


def business_days(start: str, count: int) -> tuple[str, ...]:
    days = np.busday_offset(np.datetime64(start), np.arange(count), roll="forward")
    return tuple(str(d) for d in days)


def load_prices(source: Union[str, Path, IO[str]]) -> PriceSeries:
    """Read a ``date,ticker,close`` CSV into a PriceSeries.

    Tickers keep their order of first appearance; dates are sorted ascending.
    Every date must carry a price for every ticker.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_prices(fh)

    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
        raise PriceParseError(1, f"expected header {','.join(CSV_HEADER)}, got {header}")

    cells: dict[tuple[str, str], float] = {}
    tickers: dict[str, None] = {}
    dates: set[str] = set()
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise PriceParseError(line, f"expected 3 fields, got {len(row)}")
        date, ticker, close = (c.strip() for c in row)
        try:
            date = dt.date.fromisoformat(date).isoformat()
        except ValueError:
            raise PriceParseError(line, f"bad ISO date {date!r}") from None
        if not ticker:
            raise PriceParseError(line, "empty ticker")
        try:
            value = float(close)
        except ValueError:
            raise PriceParseError(line, f"bad price {close!r}") from None
        if not math.isfinite(value) or value <= 0:
            raise PriceDataError(f"line {line}: price must be positive, got {close!r}")
        if (date, ticker) in cells:
            raise PriceDataError(f"line {line}: duplicate row for ({date}, {ticker})")
        cells[(date, ticker)] = value
        tickers.setdefault(ticker)
        dates.add(date)

    ordered_dates = sorted(dates)
    names = tuple(tickers)
    if len(ordered_dates) < 2 or not names:
        raise PriceDataError("need at least 2 days and 1 ticker")
    prices = np.empty((len(ordered_dates), len(names)))
    for d, date in enumerate(ordered_dates):
        for i, ticker in enumerate(names):
            try:
                prices[d, i] = cells[(date, ticker)]
            except KeyError:
                raise PriceDataError(f"missing price for ({date}, {ticker})") from None
    return PriceSeries(names, prices, tuple(ordered_dates))


def write_prices(series: PriceSeries, dest: Union[str, Path, IO[str]]) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            write_prices(series, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for date, row in zip(series.dates, series.prices):
        for ticker, price in zip(series.tickers, row):
            writer.writerow((date, ticker, repr(float(price))))


def prices_to_csv(series: PriceSeries) -> str:
    buf = io.StringIO()
    write_prices(series, buf)
    return buf.getvalue()


def normalize(series: PriceSeries, base: float = 100.0) -> PriceSeries:
    """Rescale every ticker so its day-0 price equals ``base``."""
    if not base > 0:
        raise ValueError(f"base must be positive, got {base}")
    # row 0 is pinned to base, so a second pass scales by exactly 1.0
    scale = base / series.prices[0]
    prices = series.prices * scale
    prices[0] = base
    return PriceSeries(series.tickers, prices, series.dates)


def daily_move(series: PriceSeries, ticker: Union[str, int], day: int) -> Move:
    if not 1 <= day < series.days:
        raise IndexError(f"day must lie in [1, {series.days}), got {day}")
    return Move(int(series.moves[day, series.index(ticker)]))


@dataclass(frozen=True)
class SawtoothSpec:
    endpoints: tuple[float, ...] = TABLE2_ENDPOINTS
    days: int = 252
    oscillation_amplitude: float = 0.03
    oscillation_period: float = 5
    seed: int = 0
    tickers: tuple[str, ...] = field(default=())
    start_date: str = FIXTURE_START

    def __post_init__(self):
        object.__setattr__(self, "endpoints", tuple(float(e) for e in self.endpoints))
        tickers = tuple(self.tickers) or (
            TABLE2_TICKERS if len(self.endpoints) == len(TABLE2_TICKERS)
            else tuple(f"S{i:02d}" for i in range(len(self.endpoints))))
        object.__setattr__(self, "tickers", tickers)
        if not self.endpoints:
            raise ValueError("need at least one endpoint")
        if len(tickers) != len(self.endpoints):
            raise ValueError("tickers and endpoints differ in length")
        if any(not 0 < e <= 100 for e in self.endpoints):
            raise ValueError("endpoints must lie in (0, 100]")
        if int(self.days) != self.days or self.days < 2:
            raise ValueError(f"days must be an integer >= 2, got {self.days}")
        if not 0 <= self.oscillation_amplitude < 0.2:
            raise ValueError("oscillation_amplitude must lie in [0, 0.2)")
        if not self.oscillation_period > 0:
            raise ValueError("oscillation_period must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["endpoints"] = list(self.endpoints)
        d["tickers"] = list(self.tickers)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SawtoothSpec":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        for key in ("endpoints", "tickers"):
            if key in known:
                known[key] = tuple(known[key])
        return cls(**known)


def triangle_wave(x: np.ndarray) -> np.ndarray:
    """Unit-period triangle wave in [-1, 1], -1 at integers, +1 at half-integers."""
    return 1.0 - 4.0 * np.abs(np.mod(x, 1.0) - 0.5)


def generate_sawtooth(spec: SawtoothSpec) -> PriceSeries:
    """Receding prices with a saw-tooth wobble, normalized to 100 on day 0.

    Log price = geometric trend from 100 to the endpoint
              + amplitude * triangle wave (ticker i shifted by i days)
              + N(0, (amplitude/3)^2) noise,
    with the wobble bridged to zero at both ends so day 0 is exactly 100 and
    the last day is exactly the endpoint.
    """
    T, N = spec.days, len(spec.endpoints)
    A = spec.oscillation_amplitude
    t = np.arange(T, dtype=float)[:, None]
    frac = t / (T - 1)
    trend = frac * np.log(np.asarray(spec.endpoints) / 100.0)[None, :]

    rng = split_stream(spec.seed, ["sawtooth"])
    noise = rng.standard_normal((T, N)) * (A / 3.0)
    phase = np.arange(N, dtype=float)[None, :]
    wobble = A * triangle_wave((t + phase) / spec.oscillation_period) + noise
    wobble -= (1.0 - frac) * wobble[0] + frac * wobble[-1]

    prices = 100.0 * np.exp(trend + wobble)
    prices[0] = 100.0
    prices[-1] = spec.endpoints
    return PriceSeries(spec.tickers, prices, business_days(spec.start_date, T))


def fixture_path(name: str = "table2") -> Path:
    return Path(str(resources.files("parrondo_sim") / "fixtures" / f"{name}_sawtooth.csv"))


def fixture_spec_path(name: str = "table2") -> Path:
    return Path(str(resources.files("parrondo_sim") / "fixtures" / f"{name}_spec.json"))


def load_fixture_spec(name: str = "table2") -> SawtoothSpec:
    with open(fixture_spec_path(name), encoding="utf-8") as fh:
        return SawtoothSpec.from_dict(json.load(fh)["spec"])


def load_fixture(name: str = "table2") -> PriceSeries:
    return load_prices(fixture_path(name))


def file_digest(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
