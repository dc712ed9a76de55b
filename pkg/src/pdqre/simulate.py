"""Seeded Monte Carlo play of the iterated prisoner's dilemma.

Serves as the stochastic oracle for the stationary-state closed forms and
validates the conditional-frequency estimator that the experimental data
table relies on.  Every run is reproducible from the config seed: one
PCG64 stream is spawned per player (plus one for pairings in group mode)
and all uniforms are pre-drawn, so logs are bit-stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .game import DEFAULT_MATRIX, MarkovStrategy, PayoffMatrix

__all__ = [
    "GameLog",
    "MarkovEstimate",
    "PooledLog",
    "SimulationConfig",
    "estimate_markov",
    "estimate_markov_pooled",
    "export_log",
    "simulate",
    "simulate_group",
]

GENERATOR_NAME = "PCG64"


@dataclass(frozen=True)
class SimulationConfig:
    """Run length, seed, and the (otherwise unspecified) round-1 behavior."""

    rounds: int
    seed: int
    initial_coop_prob: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        for p in self.initial_coop_prob:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"initial cooperation probability {p} outside [0, 1]")


@dataclass
class GameLog:
    """Per-round choices and payoffs of one fixed pair (True = cooperate)."""

    choices1: np.ndarray
    choices2: np.ndarray
    payoffs1: np.ndarray
    payoffs2: np.ndarray
    strategy1: MarkovStrategy
    strategy2: MarkovStrategy
    config: SimulationConfig
    generator: str = GENERATOR_NAME

    @property
    def rounds(self) -> int:
        return len(self.choices1)

    def cooperation_rate(self, player: int = 1, burn_in: int = 0) -> float:
        choices = self.choices1 if player == 1 else self.choices2
        if burn_in >= len(choices):
            raise ValueError("burn-in leaves no rounds")
        return float(np.mean(choices[burn_in:]))

    def mean_payoff(self, player: int = 1, burn_in: int = 0) -> float:
        payoffs = self.payoffs1 if player == 1 else self.payoffs2
        if burn_in >= len(payoffs):
            raise ValueError("burn-in leaves no rounds")
        return float(np.mean(payoffs[burn_in:]))


@dataclass
class PooledLog:
    """One player's pooled rounds under group play with re-pairing.

    ``conditioning[t]`` is the opponent action the player responded to at
    round t (the round-t partner's previous move); index 0 is a placeholder
    since round 1 has no conditioning event.
    """

    player: int
    choices: np.ndarray
    conditioning: np.ndarray
    partners: np.ndarray
    payoffs: np.ndarray
    strategy: MarkovStrategy
    config: SimulationConfig
    generator: str = GENERATOR_NAME

    @property
    def rounds(self) -> int:
        return len(self.choices)

    def cooperation_rate(self, burn_in: int = 0) -> float:
        if burn_in >= len(self.choices):
            raise ValueError("burn-in leaves no rounds")
        return float(np.mean(self.choices[burn_in:]))


@dataclass(frozen=True)
class MarkovEstimate:
    """Conditional-frequency estimate; None marks an absent conditioning event."""

    alpha: float | None
    gamma: float | None
    alpha_count: int
    gamma_count: int


def _round_payoffs(matrix: PayoffMatrix, c1: np.ndarray, c2: np.ndarray):
    p1 = c1.astype(float)
    p2 = c2.astype(float)
    u1 = (
        matrix.reward_cc * p1 * p2
        + matrix.sucker_cd * p1 * (1.0 - p2)
        + matrix.temptation_dc * (1.0 - p1) * p2
        + matrix.punishment_dd * (1.0 - p1) * (1.0 - p2)
    )
    u2 = (
        matrix.reward_cc * p1 * p2
        + matrix.sucker_cd * p2 * (1.0 - p1)
        + matrix.temptation_dc * (1.0 - p2) * p1
        + matrix.punishment_dd * (1.0 - p1) * (1.0 - p2)
    )
    return u1, u2


def simulate(
    s1: MarkovStrategy,
    s2: MarkovStrategy,
    config: SimulationConfig,
    matrix: PayoffMatrix = DEFAULT_MATRIX,
) -> GameLog:
    """Play one seeded match; round 1 uses the configured initial probabilities."""
    streams = np.random.SeedSequence(config.seed).spawn(2)
    u1 = np.random.default_rng(streams[0]).random(config.rounds).tolist()
    u2 = np.random.default_rng(streams[1]).random(config.rounds).tolist()

    a1, g1 = s1.alpha, s1.gamma
    a2, g2 = s2.alpha, s2.gamma
    c1 = u1[0] < config.initial_coop_prob[0]
    c2 = u2[0] < config.initial_coop_prob[1]
    choices1 = [c1]
    choices2 = [c2]
    for t in range(1, config.rounds):
        n1 = u1[t] < (g1 if c2 else a1)
        n2 = u2[t] < (g2 if c1 else a2)
        c1, c2 = n1, n2
        choices1.append(c1)
        choices2.append(c2)

    arr1 = np.asarray(choices1, dtype=bool)
    arr2 = np.asarray(choices2, dtype=bool)
    pay1, pay2 = _round_payoffs(matrix, arr1, arr2)
    return GameLog(arr1, arr2, pay1, pay2, s1, s2, config)


def simulate_group(
    strategies: Sequence[MarkovStrategy],
    config: SimulationConfig,
    matrix: PayoffMatrix = DEFAULT_MATRIX,
) -> list[PooledLog]:
    """Group play with uniform random re-pairing each round.

    Every player responds to their current partner's previous-round action.
    Round 1 uses the first configured initial probability for all players.
    """
    n = len(strategies)
    if n < 2 or n % 2 != 0:
        raise ValueError(f"group play needs an even number of players >= 2, got {n}")
    streams = np.random.SeedSequence(config.seed).spawn(n + 1)
    uniforms = [np.random.default_rng(streams[i]).random(config.rounds) for i in range(n)]
    pair_rng = np.random.default_rng(streams[n])

    alphas = [s.alpha for s in strategies]
    gammas = [s.gamma for s in strategies]
    init = config.initial_coop_prob[0]
    choices = np.zeros((config.rounds, n), dtype=bool)
    conditioning = np.zeros((config.rounds, n), dtype=bool)
    partners = np.zeros((config.rounds, n), dtype=int)
    payoffs = np.zeros((config.rounds, n))

    perm0 = pair_rng.permutation(n)
    choices[0] = [uniforms[i][0] < init for i in range(n)]
    _apply_pairing(0, perm0, choices, partners, payoffs, matrix)
    for t in range(1, config.rounds):
        perm = pair_rng.permutation(n)
        for k in range(0, n, 2):
            i, j = int(perm[k]), int(perm[k + 1])
            cond_i = choices[t - 1, j]
            cond_j = choices[t - 1, i]
            conditioning[t, i] = cond_i
            conditioning[t, j] = cond_j
            choices[t, i] = uniforms[i][t] < (gammas[i] if cond_i else alphas[i])
            choices[t, j] = uniforms[j][t] < (gammas[j] if cond_j else alphas[j])
        _apply_pairing(t, perm, choices, partners, payoffs, matrix)

    return [
        PooledLog(
            player=i,
            choices=choices[:, i].copy(),
            conditioning=conditioning[:, i].copy(),
            partners=partners[:, i].copy(),
            payoffs=payoffs[:, i].copy(),
            strategy=strategies[i],
            config=config,
        )
        for i in range(n)
    ]


def _apply_pairing(t, perm, choices, partners, payoffs, matrix):
    for k in range(0, len(perm), 2):
        i, j = int(perm[k]), int(perm[k + 1])
        partners[t, i], partners[t, j] = j, i
        u1, u2 = _round_payoffs(
            matrix,
            np.asarray([choices[t, i]]),
            np.asarray([choices[t, j]]),
        )
        payoffs[t, i], payoffs[t, j] = u1[0], u2[0]


def _conditional_frequency(own: np.ndarray, cond: np.ndarray) -> MarkovEstimate:
    gamma_count = int(np.sum(cond))
    alpha_count = int(np.sum(~cond))
    gamma = float(np.sum(own & cond) / gamma_count) if gamma_count else None
    alpha = float(np.sum(own & ~cond) / alpha_count) if alpha_count else None
    return MarkovEstimate(alpha, gamma, alpha_count, gamma_count)


def estimate_markov(log: GameLog) -> tuple[MarkovEstimate, MarkovEstimate]:
    """Conditional cooperation frequencies per player from a pair log.

    Round t >= 2 actions are conditioned on the opponent's round t-1 action;
    round 1 has no conditioning event and is excluded.
    """
    if log.rounds < 2:
        raise ValueError("estimation needs at least 2 rounds")
    est1 = _conditional_frequency(log.choices1[1:], log.choices2[:-1])
    est2 = _conditional_frequency(log.choices2[1:], log.choices1[:-1])
    return est1, est2


def estimate_markov_pooled(log: PooledLog) -> MarkovEstimate:
    """Conditional frequencies from a pooled group-play log."""
    if log.rounds < 2:
        raise ValueError("estimation needs at least 2 rounds")
    return _conditional_frequency(log.choices[1:], log.conditioning[1:])


def export_log(log: GameLog, path) -> None:
    """Write a pair log as CSV with key=value header metadata."""
    lines = [
        f"# generator={log.generator}",
        f"# seed={log.config.seed}",
        f"# rounds={log.config.rounds}",
        f"# initial_coop_prob={log.config.initial_coop_prob[0]:.12g},"
        f"{log.config.initial_coop_prob[1]:.12g}",
        f"# strategy1={log.strategy1.alpha:.12g},{log.strategy1.gamma:.12g}",
        f"# strategy2={log.strategy2.alpha:.12g},{log.strategy2.gamma:.12g}",
        "round,choice1,choice2,payoff1,payoff2",
    ]
    for t in range(log.rounds):
        c1 = "C" if log.choices1[t] else "D"
        c2 = "C" if log.choices2[t] else "D"
        lines.append(
            f"{t + 1},{c1},{c2},{log.payoffs1[t]:.12g},{log.payoffs2[t]:.12g}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
