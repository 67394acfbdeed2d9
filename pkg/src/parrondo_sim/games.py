"""Parrondo's coin games.

Game A flips one slightly unfair coin. Game B looks at the player's capital:
when it is divisible by the modulus (3 by default) a bad coin is flipped,
otherwise a good one. Both games lose on their own, yet choosing between them
at random wins.

Two routes to the drift are provided and kept independent of each other:
``markov_drift`` solves the residue chain exactly, ``simulate_games`` plays
the games with seeded random draws.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .streams import split_stream

EPSILON_MAX = 0.1
CHUNK_ROUNDS = 1 << 20


class Game(str, enum.Enum):
    A = "A"
    B = "B"
    COMBINED = "combined"

    @classmethod
    def parse(cls, name: str) -> "Game":
        for game in cls:
            if game.value.lower() == name.lower():
                return game
        raise ValueError(f"unknown game {name!r}")


@dataclass(frozen=True)
class GameParams:
    epsilon: float = 0.005
    modulus: int = 3
    mix_prob: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.epsilon < EPSILON_MAX:
            raise ValueError(f"epsilon must lie in [0, {EPSILON_MAX}), got {self.epsilon}")
        if int(self.modulus) != self.modulus or self.modulus < 1:
            raise ValueError(f"modulus must be a positive integer, got {self.modulus}")
        if not 0.0 <= self.mix_prob <= 1.0:
            raise ValueError(f"mix_prob must lie in [0, 1], got {self.mix_prob}")

    @property
    def coin_a_win(self) -> float:
        return 0.5 - self.epsilon

    @property
    def coin_b_bad_win(self) -> float:
        return 0.10 - self.epsilon

    @property
    def coin_b_good_win(self) -> float:
        return 0.75 - self.epsilon


@dataclass(frozen=True)
class GameState:
    capital: int = 0
    rounds_played: int = 0


@dataclass(frozen=True)
class DriftReport:
    game: Game
    stationary: tuple[float, ...]
    drift_per_round: float


@dataclass(frozen=True)
class DriftEstimate:
    """Monte Carlo drift with per-residue visit and win counts."""

    game: Game
    rounds: int
    reps: int
    drift: float
    stderr: float
    per_rep: np.ndarray
    visits: np.ndarray
    wins: np.ndarray


def _step(state: GameState, win_prob: float, rand: float) -> GameState:
    if not 0.0 <= rand < 1.0:
        raise ValueError(f"draw must lie in [0, 1), got {rand}")
    delta = 1 if rand < win_prob else -1
    return GameState(state.capital + delta, state.rounds_played + 1)


def play_game_a(state: GameState, rand: float, params: GameParams = GameParams()) -> GameState:
    return _step(state, params.coin_a_win, rand)


def game_b_win_prob(capital: int, params: GameParams = GameParams()) -> float:
    # Python's % gives the non-negative residue, so -3 counts as divisible
    if capital % params.modulus == 0:
        return params.coin_b_bad_win
    return params.coin_b_good_win


def play_game_b(state: GameState, rand: float, params: GameParams = GameParams()) -> GameState:
    return _step(state, game_b_win_prob(state.capital, params), rand)


def play_combined(state: GameState, rand_choice: float, rand_flip: float,
                  params: GameParams = GameParams()) -> GameState:
    """Play game A with probability ``mix_prob``, otherwise game B."""
    if not 0.0 <= rand_choice < 1.0:
        raise ValueError(f"draw must lie in [0, 1), got {rand_choice}")
    if rand_choice < params.mix_prob:
        return play_game_a(state, rand_flip, params)
    return play_game_b(state, rand_flip, params)


def win_probabilities(params: GameParams, game: Game) -> np.ndarray:
    """Effective win probability in each capital residue class."""
    m = params.modulus
    w_a = np.full(m, params.coin_a_win)
    w_b = np.full(m, params.coin_b_good_win)
    w_b[0] = params.coin_b_bad_win
    if game is Game.A:
        return w_a
    if game is Game.B:
        return w_b
    return params.mix_prob * w_a + (1.0 - params.mix_prob) * w_b


def transition_matrix(win_probs: np.ndarray) -> np.ndarray:
    m = len(win_probs)
    P = np.zeros((m, m))
    for s, w in enumerate(win_probs):
        P[s, (s + 1) % m] += w
        P[s, (s - 1) % m] += 1.0 - w
    return P


def markov_drift(params: GameParams, game: Game) -> DriftReport:
    """Exact stationary distribution and per-round drift of a game.

    Game A does not look at the capital, so it is a one-state chain with drift
    ``-2 * epsilon``. For B and the mixture the chain runs on capital residues
    mod ``modulus``.
    """
    game = Game(game)
    if game is Game.A:
        return DriftReport(game, (1.0,), -2.0 * params.epsilon)

    w = win_probabilities(params, game)
    if np.any((w <= 0.0) | (w >= 1.0)):
        raise ValueError(f"win probabilities {w.tolist()} give a non-ergodic chain")
    P = transition_matrix(w)
    m = len(w)
    lhs = P.T - np.eye(m)
    lhs[-1, :] = 1.0
    rhs = np.zeros(m)
    rhs[-1] = 1.0
    pi = np.linalg.solve(lhs, rhs)
    # one refinement step keeps pi P = pi at round-off level
    pi = pi + np.linalg.solve(lhs, rhs - lhs @ pi)
    pi = pi / pi.sum()
    drift = float(np.dot(pi, 2.0 * w - 1.0))
    return DriftReport(game, tuple(float(x) for x in pi), drift)


@numba.njit(nogil=True, cache=True)
def _play_block(flips, choices, capital, w_a, w_b, mix_prob, visits, wins):
    m = w_b.shape[0]
    use_choice = choices.shape[0] > 0
    for k in range(flips.shape[0]):
        r = capital % m
        if use_choice and choices[k] < mix_prob:
            p = w_a
        else:
            p = w_b[r]
        visits[r] += 1
        if flips[k] < p:
            capital += 1
            wins[r] += 1
        else:
            capital -= 1
    return capital


def play_rounds(params: GameParams, game: Game, rounds: int, rng: np.random.Generator):
    """Play ``rounds`` rounds from capital 0; return (capital, visits, wins).

    Draw consumption matches the scalar ``play_*`` functions: one draw per
    round for A and B, and a (choice, flip) pair per round for the mixture.
    """
    game = Game(game)
    m = params.modulus
    if game is Game.A:
        w_b = np.full(m, params.coin_a_win)
    else:
        w_b = win_probabilities(params, Game.B)
    visits = np.zeros(m, dtype=np.int64)
    wins = np.zeros(m, dtype=np.int64)
    empty = np.empty(0)
    capital = 0
    done = 0
    while done < rounds:
        n = min(CHUNK_ROUNDS, rounds - done)
        if game is Game.COMBINED:
            block = rng.random(2 * n).reshape(n, 2)
            choices, flips = np.ascontiguousarray(block[:, 0]), np.ascontiguousarray(block[:, 1])
        else:
            choices, flips = empty, rng.random(n)
        capital = _play_block(flips, choices, capital, params.coin_a_win, w_b,
                              params.mix_prob, visits, wins)
        done += n
    return int(capital), visits, wins


def simulate_games(params: GameParams, game: Game, rounds: int, reps: int, seed: int,
                   threads: int = 1) -> DriftEstimate:
    """Estimate drift as mean final capital / rounds over independent repetitions."""
    game = Game(game)
    if rounds < 1 or reps < 1:
        raise ValueError("rounds and reps must be at least 1")

    def one(rep: int):
        return play_rounds(params, game, rounds, split_stream(seed, ["games", game.value, rep]))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(reps)))
    else:
        results = [one(rep) for rep in range(reps)]

    per_rep = np.array([cap for cap, _, _ in results], dtype=float) / rounds
    visits = np.sum([v for _, v, _ in results], axis=0)
    wins = np.sum([w for _, _, w in results], axis=0)
    mean = float(np.mean(per_rep))
    stderr = float(np.std(per_rep, ddof=1) / math.sqrt(reps)) if reps > 1 else math.nan
    return DriftEstimate(game, rounds, reps, mean, stderr, per_rep, visits, wins)
