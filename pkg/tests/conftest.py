"""Shared fixtures and independent brute-force oracles.

The oracles re-derive every rule with plain per-agent loops over
``neighbours(i, L)``, deliberately avoiding the vectorised code paths they
are used to check.
"""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from latticecoop.game import PayoffParams, pair_payoff
from latticecoop.grid import Grid, Strategy, neighbours


def grids(min_side=3, max_side=8):
    """Hypothesis strategy for small random grids."""

    def build(side, bits):
        cells = np.array(bits[: side * side], dtype=np.uint8).reshape(side, side)
        return Grid(cells)

    return st.integers(min_side, max_side).flatmap(
        lambda side: st.builds(
            build,
            st.just(side),
            st.lists(
                st.integers(0, 1), min_size=side * side, max_size=side * side
            ),
        )
    )


def payoffs():
    return st.builds(
        PayoffParams,
        b=st.floats(min_value=1.01, max_value=2.0, allow_nan=False),
        punishment=st.floats(min_value=0.0, max_value=0.5, allow_nan=False),
    )


def scores_bruteforce(g: Grid, params: PayoffParams) -> np.ndarray:
    length = g.side_length
    flat = g.cells.reshape(-1)
    out = np.zeros(g.size)
    for i in range(g.size):
        me = Strategy(int(flat[i]))
        out[i] = sum(
            pair_payoff(me, Strategy(int(flat[j])), params) for j in neighbours(i, length)
        )
    return out.reshape(length, length)


def best_neighbour_bruteforce(i: int, base_flat, length: int) -> int:
    """Index of agent i's maximal-base-score neighbour, N/E/S/W tie order."""
    best = None
    for j in neighbours(i, length):
        if best is None or base_flat[j] > base_flat[best]:
            best = j
    return best


def neb_i_bruteforce(g: Grid, base: np.ndarray, eps: float) -> np.ndarray:
    length = g.side_length
    flat = g.cells.reshape(-1)
    base_flat = base.reshape(-1)
    surplus = np.zeros(g.size)
    for i in range(g.size):
        if flat[i] != Strategy.C.value:
            continue
        b_idx = best_neighbour_bruteforce(i, base_flat, length)
        if flat[b_idx] == Strategy.D.value and base_flat[b_idx] > base_flat[i]:
            surplus[i] = base_flat[b_idx] - base_flat[i] + eps
    return surplus.reshape(length, length)


def neb_ii_bruteforce(g: Grid, base: np.ndarray, eps: float) -> np.ndarray:
    length = g.side_length
    flat = g.cells.reshape(-1)
    base_flat = base.reshape(-1)
    surplus = neb_i_bruteforce(g, base, eps).reshape(-1)
    post = base_flat + surplus
    for i in range(g.size):
        if flat[i] != Strategy.C.value:
            continue
        required = None
        for d in neighbours(i, length):
            if flat[d] != Strategy.D.value:
                continue
            role_model = best_neighbour_bruteforce(d, base_flat, length)
            if flat[role_model] == Strategy.D.value:
                m = base_flat[role_model]
                required = m if required is None else max(required, m)
        if required is not None:
            surplus[i] += max(0.0, required + eps - post[i])
    return surplus.reshape(length, length)


def step_deterministic_bruteforce(g: Grid, scores: np.ndarray) -> Grid:
    length = g.side_length
    flat = g.cells.reshape(-1)
    score_flat = scores.reshape(-1)
    nxt = np.empty_like(flat)
    for i in range(g.size):
        best_idx, best_score = i, score_flat[i]  # self first
        for j in neighbours(i, length):
            if score_flat[j] > best_score:
                best_idx, best_score = j, score_flat[j]
        nxt[i] = flat[best_idx]
    return Grid(nxt.reshape(length, length))


def step_fermi_bruteforce(g: Grid, scores: np.ndarray, k: float, mu: float, seed: int) -> Grid:
    """Sequential replay of the documented draw layout: rng.random((Z, 3))."""
    import math

    length = g.side_length
    flat = g.cells.reshape(-1)
    score_flat = scores.reshape(-1)
    draws = np.random.default_rng(seed).random((g.size, 3))
    nxt = np.empty_like(flat)
    for i in range(g.size):
        u_mut, u_nbr, u_acc = draws[i]
        if u_mut < mu:
            nxt[i] = Strategy.C.value if u_mut < mu / 2 else Strategy.D.value
            continue
        j = neighbours(i, length)[int(u_nbr * 4)]
        p = 1.0 / (1.0 + math.exp(min(700.0, (score_flat[i] - score_flat[j]) / k)))
        nxt[i] = flat[j] if u_acc < p else flat[i]
    return Grid(nxt.reshape(length, length))

