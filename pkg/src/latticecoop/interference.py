"""External investment strategies: who gets paid how much, and what it costs.

An external decision-maker may add a surplus to cooperators' scores each
generation, at a cost to itself equal to the surplus paid (1:1). Defectors
are never paid. Four strategy families:

* POP:   invest ``theta`` in every cooperator while the global cooperator
         count x_C is at or below a population threshold.
* NEB:   invest ``theta`` in each cooperator whose count of cooperating
         neighbours is at or below ``n_c``.
* NEB-i: pay each cooperator whose best-scoring neighbour is a strictly
         fitter defector just enough to overtake it by ``eps``.
* NEB-ii: NEB-i plus a second phase that tops cooperators up so that
         defector neighbours whose own role model is a defector see the
         cooperator beat that role model by ``eps``.

All decisions and amounts are computed from the frozen (grid, base-score)
input, so the per-agent grants are order-independent and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .game import ScoreField
from .grid import Grid, Strategy, coop_count, neighbour_field

# Tolerance absorbing float rounding when a fractional population threshold
# is scaled to a count (e.g. 0.7 * 10000 evaluating just below 7000).
_POP_COUNT_EPS = 1e-9


@dataclass(frozen=True)
class NoInterference:
    """The closed system: no investment, zero cost."""


@dataclass(frozen=True)
class Pop:
    """Population-composition trigger: invest in all cooperators while rare.

    ``p_c`` is the threshold as a fraction of the population size Z; the
    investment fires whenever x_C <= p_c * Z.
    """

    p_c: float
    theta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_c <= 1.0:
            raise ValueError(f"p_c must be in [0, 1], got {self.p_c}")
        if self.theta <= 0.0:
            raise ValueError(f"theta must be > 0, got {self.theta}")


@dataclass(frozen=True)
class Neb:
    """Neighbourhood trigger: invest in cooperators with <= n_c cooperating neighbours."""

    n_c: int
    theta: float

    def __post_init__(self) -> None:
        if self.n_c not in (0, 1, 2, 3, 4):
            raise ValueError(f"n_c must be an integer in 0..4, got {self.n_c}")
        if self.theta <= 0.0:
            raise ValueError(f"theta must be > 0, got {self.theta}")


@dataclass(frozen=True)
class NebI:
    """Fitness-observation strategy: outbid the best defector neighbour by eps."""

    eps: float

    def __post_init__(self) -> None:
        if self.eps <= 0.0:
            raise ValueError(f"eps must be > 0, got {self.eps}")


@dataclass(frozen=True)
class NebII:
    """NEB-i plus luring defector neighbours away from their defector role models."""

    eps: float

    def __post_init__(self) -> None:
        if self.eps <= 0.0:
            raise ValueError(f"eps must be > 0, got {self.eps}")


InterferenceScheme = Union[NoInterference, Pop, Neb, NebI, NebII]


@dataclass(frozen=True)
class InvestmentOutcome:
    """Per-agent surplus plus the decision-maker's total cost this generation.

    ``generation_cost`` is exactly ``surplus.sum()``; the constructor computes
    it so the equality holds bit-for-bit.
    """

    surplus: np.ndarray
    generation_cost: float

    @classmethod
    def from_surplus(cls, surplus: np.ndarray) -> "InvestmentOutcome":
        surplus = np.ascontiguousarray(surplus, dtype=np.float64)
        surplus.setflags(write=False)
        return cls(surplus=surplus, generation_cost=float(surplus.sum()))


def _zero_outcome(g: Grid) -> InvestmentOutcome:
    return InvestmentOutcome.from_surplus(np.zeros_like(g.cells, dtype=np.float64))


def apply_pop(g: Grid, scheme: Pop) -> InvestmentOutcome:
    """All-or-nothing: every cooperator gets theta iff x_C <= p_c * Z."""
    threshold_count = int(np.floor(scheme.p_c * g.size + _POP_COUNT_EPS))
    if coop_count(g) > threshold_count:
        return _zero_outcome(g)
    surplus = np.where(g.cells == Strategy.C.value, scheme.theta, 0.0)
    return InvestmentOutcome.from_surplus(surplus)


def apply_neb(g: Grid, scheme: Neb) -> InvestmentOutcome:
    """Cooperator i gets theta iff its cooperating-neighbour count is <= n_c."""
    n_coop = neighbour_field(g.cells).sum(axis=0, dtype=np.int64)
    eligible = (g.cells == Strategy.C.value) & (n_coop <= scheme.n_c)
    return InvestmentOutcome.from_surplus(np.where(eligible, scheme.theta, 0.0))


def _best_neighbour(g: Grid, base: ScoreField) -> tuple[np.ndarray, np.ndarray]:
    """Per cell: (base score, strategy) of its maximal-base-score neighbour.

    Ties are broken in fixed N, E, S, W order (argmax picks the first max
    along the stacked neighbour axis).
    """
    nbr_scores = neighbour_field(base)
    best = nbr_scores.argmax(axis=0)
    best_score = np.take_along_axis(nbr_scores, best[None], axis=0)[0]
    nbr_strats = neighbour_field(g.cells)
    best_strat = np.take_along_axis(nbr_strats, best[None], axis=0)[0]
    return best_score, best_strat


def _neb_i_surplus(g: Grid, base: ScoreField, eps: float) -> np.ndarray:
    best_score, best_strat = _best_neighbour(g, base)
    eligible = (
        (g.cells == Strategy.C.value)
        & (best_strat == Strategy.D.value)
        & (best_score > base)
    )
    return np.where(eligible, best_score - base + eps, 0.0)


def apply_neb_i(g: Grid, base: ScoreField, scheme: NebI) -> InvestmentOutcome:
    """Maintaining-C: grant best_defector_score - own_score + eps.

    A cooperator is paid only when the maximal-base-score member of its
    neighbourhood is a defector with a strictly larger base score; conditions
    and amounts use pre-interference base scores only.
    """
    return InvestmentOutcome.from_surplus(_neb_i_surplus(g, base, scheme.eps))


def apply_neb_ii(g: Grid, base: ScoreField, scheme: NebII) -> InvestmentOutcome:
    """Maintaining-C plus influencing D neighbours.

    Phase one is NEB-i. Phase two: for each cooperator i with a defector
    neighbour d whose own maximal-base-score neighbour is a defector with
    base score M, top i up so its post-phase-one score reaches at least
    M + eps. Several such neighbours impose the largest requirement; defector
    scores are never modified.
    """
    phase_one = _neb_i_surplus(g, base, scheme.eps)
    post = base + phase_one

    best_score, best_strat = _best_neighbour(g, base)
    # Role-model score M for each defector whose best neighbour is a defector;
    # -inf marks cells that impose no requirement.
    luring_target = np.where(
        (g.cells == Strategy.D.value) & (best_strat == Strategy.D.value),
        best_score,
        -np.inf,
    )
    required = neighbour_field(luring_target).max(axis=0)
    top_up = np.where(
        g.cells == Strategy.C.value,
        np.maximum(0.0, required + scheme.eps - post),
        0.0,
    )
    return InvestmentOutcome.from_surplus(phase_one + top_up)


def apply(scheme: InterferenceScheme, g: Grid, base: ScoreField) -> InvestmentOutcome:
    """Dispatch to the scheme's rule; NoInterference pays nothing."""
    if isinstance(scheme, NoInterference):
        return _zero_outcome(g)
    if isinstance(scheme, Pop):
        return apply_pop(g, scheme)
    if isinstance(scheme, Neb):
        return apply_neb(g, scheme)
    if isinstance(scheme, NebI):
        return apply_neb_i(g, base, scheme)
    if isinstance(scheme, NebII):
        return apply_neb_ii(g, base, scheme)
    raise TypeError(f"unknown interference scheme: {scheme!r}")
