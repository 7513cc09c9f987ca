"""Strategy update rules: synchronous imitate-best and Fermi imitation.

Both rules read a frozen (grid, score) pair and build the whole next
generation at once, so evaluation order cannot matter. The deterministic
rule is the K -> 0 limit of the Fermi rule; the Fermi rule draws its
randomness in a documented per-agent order so runs are seed-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import expit

from .game import ScoreField
from .grid import Grid, Strategy, neighbour_field


@dataclass(frozen=True)
class Deterministic:
    """Imitate the highest-scoring member of {self} + 4 neighbours."""


@dataclass(frozen=True)
class Fermi:
    """Pairwise-comparison rule with imitation noise K and mutation rate mu."""

    K: float
    mu: float = 0.0

    def __post_init__(self) -> None:
        if not self.K > 0.0:
            raise ValueError(f"noise amplitude K must be > 0, got {self.K}")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mutation probability mu must be in [0, 1], got {self.mu}")


UpdateRule = Union[Deterministic, Fermi]


def fermi_probability(f_a: float, f_b: float, k: float) -> float:
    """Probability that agent A (score f_a) copies neighbour B (score f_b).

    Evaluates (1 + exp((f_a - f_b) / K))^-1 through the numerically stable
    logistic, so extreme score gaps saturate to 0.0 or 1.0 without overflow.
    """
    if not k > 0.0:
        raise ValueError(f"noise amplitude K must be > 0, got {k}")
    if not (math.isfinite(f_a) and math.isfinite(f_b)):
        raise ValueError(f"scores must be finite, got f_a={f_a}, f_b={f_b}")
    return float(expit((f_b - f_a) / k))


def step_deterministic(g: Grid, scores: ScoreField) -> Grid:
    """Synchronous imitate-best update.

    Each agent adopts the strategy of the highest-scoring member of itself
    plus its four neighbours; ties prefer self, then the fixed N, E, S, W
    order. Pure function of (g, scores).
    """
    score_stack = np.concatenate((scores[None], neighbour_field(scores)))
    strat_stack = np.concatenate((g.cells[None], neighbour_field(g.cells)))
    best = score_stack.argmax(axis=0)  # first max: self before N, E, S, W
    return Grid(np.take_along_axis(strat_stack, best[None], axis=0)[0])


def step_fermi(g: Grid, scores: ScoreField, rule: Fermi, rng: np.random.Generator) -> Grid:
    """Synchronous Fermi update from a frozen copy of (g, scores).

    Randomness: one ``rng.random((Z, 3))`` call, i.e. three uniforms per agent
    in row-major agent order, used as (mutation, neighbour choice, acceptance).
    Per agent i:

    * mutation: if u_m < mu the agent's next strategy is drawn uniformly from
      {C, D} (C when u_m < mu / 2, D otherwise) and imitation is skipped;
    * neighbour: index floor(4 * u_n) into the N, E, S, W neighbour list
      (self is never selected);
    * acceptance: copy the chosen neighbour's strategy iff
      u_a < fermi_probability(own score, neighbour score, K).
    """
    length = g.side_length
    draws = rng.random((g.size, 3))
    u_mut = draws[:, 0].reshape(length, length)
    u_nbr = draws[:, 1].reshape(length, length)
    u_acc = draws[:, 2].reshape(length, length)

    pick = (u_nbr * 4.0).astype(np.int64)  # in 0..3 since u < 1
    nbr_strat = np.take_along_axis(neighbour_field(g.cells), pick[None], axis=0)[0]
    nbr_score = np.take_along_axis(neighbour_field(scores), pick[None], axis=0)[0]

    accept = u_acc < expit((nbr_score - scores) / rule.K)
    next_cells = np.where(accept, nbr_strat, g.cells)

    if rule.mu > 0.0:
        mutated = np.where(u_mut < rule.mu / 2.0, Strategy.C.value, Strategy.D.value)
        next_cells = np.where(u_mut < rule.mu, mutated, next_cells)
    return Grid(next_cells)


def step(g: Grid, scores: ScoreField, rule: UpdateRule, rng: np.random.Generator | None) -> Grid:
    """Advance one generation under the configured update rule."""
    if isinstance(rule, Deterministic):
        return step_deterministic(g, scores)
    if isinstance(rule, Fermi):
        if rng is None:
            raise ValueError("the Fermi rule requires a random generator")
        return step_fermi(g, scores, rule, rng)
    raise TypeError(f"unknown update rule: {rule!r}")
