"""Generation loop: scoring, interference gating, termination, replicates.

Each generation runs the fixed phase order

    base scores -> interference (suppressed on homogeneous grids) ->
    record metrics -> strategy update

for ``generations + measure_window`` generations, stopping early when the
population is absorbed (homogeneous, no mutation) or, under the
deterministic rule, when a grid state repeats (cycle). The stationary
cooperation level averages the measurement window, the absorbed value, or
the detected cycle. Identical (config, seed) always produces an identical
RunResult, byte for byte, regardless of worker count.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .dynamics import Deterministic, Fermi, UpdateRule, step
from .game import PayoffParams, compute_scores
from .grid import Grid, Strategy, coop_count, grid_hash, random_grid
from .interference import InterferenceScheme, apply

MAX_SEED = 2**64  # seeds are 64-bit unsigned


class Termination(str, Enum):
    COMPLETED = "completed"
    HOMOGENEOUS_C = "homogeneous_C"
    HOMOGENEOUS_D = "homogeneous_D"
    CYCLE_DETECTED = "cycle_detected"


@dataclass(frozen=True)
class RunConfig:
    """Full parameterisation of one simulation run."""

    side_length: int
    payoff: PayoffParams
    scheme: InterferenceScheme
    rule: UpdateRule
    generations: int = 200
    measure_window: int = 50
    seed: int = 0
    initial_coop_probability: float = 0.5
    initial_exact_fraction: bool = False
    early_stop_on_homogeneous: bool = True

    def __post_init__(self) -> None:
        if self.side_length < 3:
            raise ValueError(f"side_length must be >= 3, got {self.side_length}")
        if self.generations < 1:
            raise ValueError(f"generations must be >= 1, got {self.generations}")
        if self.measure_window < 1:
            raise ValueError(f"measure_window must be >= 1, got {self.measure_window}")
        if not 0.0 <= self.initial_coop_probability <= 1.0:
            raise ValueError(
                "initial_coop_probability must be in [0, 1], "
                f"got {self.initial_coop_probability}"
            )
        if not 0 <= self.seed < MAX_SEED:
            raise ValueError(f"seed must be in [0, 2^64), got {self.seed}")


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    coop_count: int
    generation_cost: float
    cumulative_cost: float


@dataclass(frozen=True)
class RunResult:
    records: tuple[GenerationRecord, ...]
    stationary_coop_fraction: float
    total_cost: float
    termination: Termination
    cycle_period: int | None
    final_grid: Grid


def is_homogeneous(g: Grid) -> Strategy | None:
    """The common strategy if every cell is equal, else None."""
    first = g.cells.flat[0]
    if np.all(g.cells == first):
        return Strategy(int(first))
    return None


def step_generation(
    g: Grid,
    payoff: PayoffParams,
    scheme: InterferenceScheme,
    rule: UpdateRule,
    rng: np.random.Generator | None = None,
) -> tuple[Grid, float]:
    """Advance one generation; returns (next grid, interference cost paid).

    Interference is suppressed entirely on homogeneous grids (absorbing
    without mutation, so investing there is pure waste).
    """
    base = compute_scores(g, payoff)
    if is_homogeneous(g) is not None:
        return step(g, base, rule, rng), 0.0
    outcome = apply(scheme, g, base)
    return step(g, base + outcome.surplus, rule, rng), outcome.generation_cost


def _early_stop_applies(config: RunConfig) -> bool:
    # Homogeneity is absorbing only without mutation.
    if not config.early_stop_on_homogeneous:
        return False
    if isinstance(config.rule, Fermi):
        return config.rule.mu == 0.0
    return True


def run(config: RunConfig) -> RunResult:
    """Execute one seeded run; see the module docstring for the protocol."""
    rng = np.random.default_rng(config.seed)
    g = random_grid(
        config.side_length,
        config.initial_coop_probability,
        rng,
        exact_fraction=config.initial_exact_fraction,
    )

    deterministic = isinstance(config.rule, Deterministic)
    stop_when_homogeneous = _early_stop_applies(config)
    total_generations = config.generations + config.measure_window

    records: list[GenerationRecord] = []
    cumulative = 0.0
    termination = Termination.COMPLETED
    cycle_period: int | None = None
    cycle_start: int | None = None
    # digest -> [(generation, cell bytes)]; bytes verified on digest match so
    # a 64-bit collision can never fake a cycle.
    seen: dict[int, list[tuple[int, bytes]]] = {}

    for generation in range(total_generations):
        if deterministic:
            digest = grid_hash(g)
            state = g.cells.tobytes()
            match = next(
                (gen for gen, cells in seen.get(digest, ()) if cells == state), None
            )
            if match is not None:
                termination = Termination.CYCLE_DETECTED
                cycle_start = match
                cycle_period = generation - match
                break
            seen.setdefault(digest, []).append((generation, state))

        homogeneous = is_homogeneous(g)
        if homogeneous is not None and stop_when_homogeneous:
            records.append(GenerationRecord(generation, coop_count(g), 0.0, cumulative))
            termination = (
                Termination.HOMOGENEOUS_C
                if homogeneous == Strategy.C
                else Termination.HOMOGENEOUS_D
            )
            break

        next_grid, cost = step_generation(g, config.payoff, config.scheme, config.rule, rng)
        cumulative += cost
        records.append(GenerationRecord(generation, coop_count(g), cost, cumulative))
        g = next_grid

    stationary = _stationary_fraction(
        records, termination, cycle_start, cycle_period, config.measure_window, g.size
    )
    return RunResult(
        records=tuple(records),
        stationary_coop_fraction=stationary,
        total_cost=records[-1].cumulative_cost if records else 0.0,
        termination=termination,
        cycle_period=cycle_period,
        final_grid=g,
    )


def _stationary_fraction(
    records: Sequence[GenerationRecord],
    termination: Termination,
    cycle_start: int | None,
    cycle_period: int | None,
    measure_window: int,
    z: int,
) -> float:
    if termination == Termination.HOMOGENEOUS_C:
        return 1.0
    if termination == Termination.HOMOGENEOUS_D:
        return 0.0
    if termination == Termination.CYCLE_DETECTED:
        # Average one full cycle, or the measure window if that is longer,
        # of the trajectory that repeats forever.
        assert cycle_start is not None and cycle_period is not None
        window = max(cycle_period, measure_window)
        counts = [
            records[cycle_start + (j % cycle_period)].coop_count for j in range(window)
        ]
        return float(np.mean(counts) / z)
    window = records[-measure_window:]
    return float(np.mean([rec.coop_count for rec in window]) / z)


def derive_seed(base_seed: int, *indices: int) -> int:
    """Deterministic 64-bit child seed from a base seed and index path.

    Feeds (base_seed, *indices) into numpy's SeedSequence entropy mixer, so
    replicates and sweep cells get independent streams in any execution
    order.
    """
    ss = np.random.SeedSequence([base_seed, *indices])
    return int(ss.generate_state(1, np.uint64)[0])


def replicate_configs(config: RunConfig, n: int, base_seed: int) -> list[RunConfig]:
    """The n per-replicate configs, seeded from (base_seed, replicate index)."""
    if n < 1:
        raise ValueError(f"replicate count must be >= 1, got {n}")
    return [replace(config, seed=derive_seed(base_seed, i)) for i in range(n)]


def run_replicates(
    config: RunConfig, n: int, base_seed: int, workers: int = 1
) -> list[RunResult]:
    """n independent runs, ordered by replicate index regardless of scheduling."""
    configs = replicate_configs(config, n, base_seed)
    if workers <= 1 or n == 1:
        return [run(c) for c in configs]
    with ProcessPoolExecutor(max_workers=min(workers, n)) as pool:
        return list(pool.map(run, configs, chunksize=max(1, n // (4 * workers))))


METRICS_HEADER = ("run_id", "generation", "coop_count", "coop_fraction", "gen_cost", "cum_cost")


def write_metrics_csv(path, runs: Iterable[tuple[str, RunResult]]) -> None:
    """Per-generation metrics CSV, one row per (run, generation).

    Floats are written with repr (shortest round-trip representation).
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)
        for run_id, result in runs:
            z = result.final_grid.size
            for rec in result.records:
                writer.writerow(
                    (
                        run_id,
                        rec.generation,
                        rec.coop_count,
                        repr(rec.coop_count / z),
                        repr(rec.generation_cost),
                        repr(rec.cumulative_cost),
                    )
                )
