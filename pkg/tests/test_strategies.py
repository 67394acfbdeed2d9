from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from parrondo_sim.market import PriceSeries
from parrondo_sim.portfolio import SELL_MAX, SELL_MIN, Portfolio, init_portfolio
from parrondo_sim.strategies import (ALL_STRATEGIES, Draws, ReinvestMode, StrategyKind,
                                     decide, decide_block, draw_block, generate_hints,
                                     random_selection, selection_from_draws)


def occupancy_pmf(n: int, k: int) -> list[Fraction]:
    """P(exactly j distinct cells after k uniform throws into n cells), j = 0..n."""
    pmf = [Fraction(1)] + [Fraction(0)] * n
    for _ in range(k):
        nxt = [Fraction(0)] * (n + 1)
        for j, p in enumerate(pmf):
            if p:
                nxt[j] += p * Fraction(j, n)
                if j < n:
                    nxt[j + 1] += p * Fraction(n - j, n)
        pmf = nxt
    return pmf


def test_selection_examples():
    counts = selection_from_draws([3, 13, 7, 0, 0, 0, 0, 0, 0, 0], 10)
    assert counts[3] == 2 and counts[7] == 1 and counts[0] == 7
    all_four = selection_from_draws([4 + 10 * k for k in range(10)], 10)
    assert list(np.flatnonzero(all_four)) == [4] and all_four[4] == 10


def test_selection_draws_ten_integers():
    counts = random_selection(np.random.default_rng(0), 10)
    assert counts.sum() == 10 and counts.shape == (10,)


def test_expected_distinct_count():
    pmf = occupancy_pmf(10, 10)
    expected = float(sum(j * p for j, p in enumerate(pmf)))
    assert expected == pytest.approx(10 * (1 - 0.9 ** 10), rel=1e-12)
    draws = draw_block(np.random.default_rng(1), 50_000, 10)
    distinct = np.concatenate([(draws.sell_counts > 0).sum(1), (draws.buy_counts > 0).sum(1)])
    se = distinct.std() / np.sqrt(distinct.size)
    assert abs(distinct.mean() - expected) < 4 * se
    assert distinct.mean() == pytest.approx(6.51, abs=0.02)


def test_random_sides_follow_occupancy_law(table2):
    pmf = np.array([float(p) for p in occupancy_pmf(10, 10)])
    draws = draw_block(np.random.default_rng(2), 10_000, 10)
    for counts in (draws.sell_counts, draws.buy_counts):
        sizes = (counts > 0).sum(1)
        observed = np.bincount(sizes, minlength=11)
        expected = pmf * sizes.size
        keep = expected > 5
        obs = np.append(observed[keep], observed[~keep].sum())
        exp = np.append(expected[keep], expected[~keep].sum())
        assert stats.chisquare(obs, exp).pvalue > 0.001
    # Random sells exactly its selection whenever it trades at all
    moves = np.zeros((10_000, 10), dtype=np.int8)
    sell, buy = decide_block(StrategyKind.RANDOM, moves, None, draws)
    act = sell.any(1)
    assert act.mean() > 0.9
    np.testing.assert_array_equal(sell[act], draws.sell_counts[act] > 0)
    np.testing.assert_array_equal(buy[act], np.where(sell, 0, draws.buy_counts)[act])


def test_hints_rate_and_direction(table2):
    rng = np.random.default_rng(3)
    stream = generate_hints(table2, 0.01, rng)
    for h in stream.hints:
        assert h.direction == np.sign(table2.prices[h.day + 1, h.ticker] - table2.prices[h.day, h.ticker])
    assert not stream.directions[-1].any()
    assert generate_hints(table2, 0.0, rng).hints == []


def test_full_hints_on_falling_series():
    s = PriceSeries(("A", "B"), np.array([[10.0, 9.0], [8.0, 7.0], [6.0, 5.0]]))
    stream = generate_hints(s, 1.0, np.random.default_rng(0))
    assert len(stream) == 4
    assert all(h.direction == -1 for h in stream.hints)


def test_flat_moves_give_no_hints():
    s = PriceSeries(("A",), np.array([[10.0], [10.0], [11.0]]))
    stream = generate_hints(s, 1.0, np.random.default_rng(0))
    assert [(h.day, h.direction) for h in stream.hints] == [(1, 1)]


def test_mean_hints_per_day():
    s = PriceSeries(tuple("ABCDEFGHIJ"), np.cumprod(np.full((1001, 10), 0.99), axis=0))
    counts = generate_hints(s, 0.01, np.random.default_rng(5)).directions[:-1]
    assert np.count_nonzero(counts) / 1000 == pytest.approx(0.1, abs=0.03)


def test_bah_always_holds(table2):
    p = init_portfolio(table2)
    for d in (0, 5, 251):
        assert not decide(StrategyKind.BAH, d, table2, None, p, np.random.default_rng(d)).actionable


def test_blsh_holds_when_everything_fell():
    s = PriceSeries(("A", "B", "C"), np.array([[10.0, 10, 10], [9.0, 9, 9]]))
    d = decide(StrategyKind.BLSH, 1, s, None, init_portfolio(s), np.random.default_rng(0))
    assert not d.actionable


@pytest.mark.parametrize("kind", [StrategyKind.BLSH, StrategyKind.BLSR,
                                  StrategyKind.BRSH, StrategyKind.BHSL])
def test_move_strategies_hold_on_day_zero(kind, table2):
    assert not decide(kind, 0, table2, None, init_portfolio(table2), np.random.default_rng(0)).actionable


def test_blsh_bhsl_mirror(table2):
    p = init_portfolio(table2)
    for day in range(1, table2.days):
        a = decide(StrategyKind.BLSH, day, table2, None, p, np.random.default_rng(day))
        b = decide(StrategyKind.BHSL, day, table2, None, p, np.random.default_rng(10_000 + day))
        assert {i for i, _ in a.sells} == set(b.buy_weights)
        assert set(a.buy_weights) == {i for i, _ in b.sells}
        move = table2.moves[day]
        assert {i for i, _ in a.sells} == set(np.flatnonzero(move > 0).tolist()) or not a.actionable


def test_blsr_and_brsh_sides(table2):
    draws = draw_block(np.random.default_rng(8), table2.days, 10)
    down, up = table2.moves < 0, table2.moves > 0
    sell, buy = decide_block(StrategyKind.BLSR, table2.moves, None, draws)
    act = sell.any(1)
    np.testing.assert_array_equal(buy[act] > 0, down[act])
    assert not (sell & down).any()
    assert np.all(sell[act] == ((draws.sell_counts > 0) & ~down)[act])
    sell, buy = decide_block(StrategyKind.BRSH, table2.moves, None, draws)
    act = sell.any(1)
    np.testing.assert_array_equal(sell[act], up[act])
    np.testing.assert_array_equal(buy[act], np.where(up, 0, draws.buy_counts)[act])


def test_insider_single_up_hint():
    n = 10
    hints = np.zeros(n, dtype=np.int8)
    hints[6] = 1
    draws = Draws(np.bincount([6, 1, 1, 2], minlength=n), np.ones(n, int), np.full(n, 0.5))
    sell, buy = decide_block(StrategyKind.INSIDER, np.zeros(n), hints, draws)
    assert list(np.flatnonzero(buy)) == [6]
    assert list(np.flatnonzero(sell)) == [1, 2]


def test_insider_single_down_hint_buys_random_side():
    n = 10
    hints = np.zeros(n, dtype=np.int8)
    hints[3] = -1
    buy_counts = np.bincount([3, 3, 5, 5, 5, 8], minlength=n)
    draws = Draws(np.ones(n, int), buy_counts, np.full(n, 0.5))
    sell, buy = decide_block(StrategyKind.INSIDER, np.zeros(n), hints, draws)
    assert list(np.flatnonzero(sell)) == [3]
    np.testing.assert_array_equal(buy, np.where(np.arange(n) == 3, 0, buy_counts))


def test_insider_without_hints_is_random(table2):
    draws = draw_block(np.random.default_rng(9), table2.days, 10)
    no_hints = np.zeros(table2.prices.shape, dtype=np.int8)
    a = decide_block(StrategyKind.INSIDER, table2.moves, no_hints, draws)
    b = decide_block(StrategyKind.RANDOM, table2.moves, None, draws)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


def test_perfect_insider_buys_next_day_gainers(table2):
    hints = generate_hints(table2, 1.0, np.random.default_rng(0))
    draws = draw_block(np.random.default_rng(1), table2.days, 10)
    sell, buy = decide_block(StrategyKind.INSIDER, table2.moves, hints.directions, draws)
    for d in range(table2.days - 1):
        gainers = table2.moves[d + 1] > 0
        if sell[d].any() and gainers.any():
            np.testing.assert_array_equal(buy[d] > 0, gainers)


def test_holdings_reinvest_mode(tiny_series):
    p = Portfolio(np.array([1.0, 3.0, 2.0]))
    # day 3: A and C rose, B fell -> BHSL sells B, buys A and C by held value
    d = decide(StrategyKind.BHSL, 3, tiny_series, None, p, np.random.default_rng(0),
               ReinvestMode.HOLDINGS)
    held = p.holdings * tiny_series.prices[3]
    assert d.buy_weights[0] == pytest.approx(held[0] / (held[0] + held[2]))
    assert d.buy_weights[2] == pytest.approx(held[2] / (held[0] + held[2]))


@settings(max_examples=60)
@given(st.sampled_from(ALL_STRATEGIES), st.integers(0, 251), st.integers(0, 2**32),
       st.sampled_from([0.0, 0.05, 1.0]), st.sampled_from(list(ReinvestMode)))
def test_decisions_are_valid_and_pure(table2, kind, day, seed, hint_prob, mode):
    hints = generate_hints(table2, hint_prob, np.random.default_rng(seed)).for_day(day)
    p = init_portfolio(table2)
    a = decide(kind, day, table2, hints, p, np.random.default_rng(seed), mode)
    b = decide(kind, day, table2, hints, p, np.random.default_rng(seed), mode)
    assert a == b
    a.validate(table2.n_tickers)
    assert all(SELL_MIN <= f <= SELL_MAX for _, f in a.sells)
    assert not {i for i, _ in a.sells} & set(a.buy_weights)
    if a.buy_weights:
        assert sum(a.buy_weights.values()) == pytest.approx(1.0, abs=1e-12)


def test_parse_names():
    assert StrategyKind.parse("BLSR") is StrategyKind.BLSR
    assert StrategyKind.parse(" bah ") is StrategyKind.BAH
    assert [k.label for k in ALL_STRATEGIES] == ["BaH", "Random", "Insider", "BLSH", "BLSR",
                                                 "BRSH", "BHSL"]
    with pytest.raises(ValueError):
        StrategyKind.parse("momentum")
