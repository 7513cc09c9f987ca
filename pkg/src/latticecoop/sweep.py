"""Cartesian (theta x threshold) parameter sweeps with per-cell seeding.

Every cell's replicate seeds derive from (base_seed, theta value bits,
threshold value bits, replicate index), so cells are independent: adding or
removing cells never changes another cell's numbers, and any execution
schedule produces the same table.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .analysis import AggregateCell, aggregate
from .engine import RunConfig, derive_seed, run
from .interference import InterferenceScheme, Neb, NebI, NebII, Pop

SCHEME_KINDS = ("pop", "neb", "neb_i", "neb_ii")
ARTIFACT_VERSION = "0.1.0"


@dataclass(frozen=True)
class SweepSpec:
    """A scheme family swept over theta and threshold value lists.

    ``threshold_values`` are p_c fractions for pop, integer n_c levels for
    neb, and eps margins for neb_i / neb_ii. The fitness-observation schemes
    take no theta; their theta_values list must hold a single placeholder
    that is carried into the output table unchanged.
    """

    base: RunConfig
    scheme_kind: str
    theta_values: tuple[float, ...]
    threshold_values: tuple[float, ...]
    replicates: int
    base_seed: int

    def __post_init__(self) -> None:
        if self.scheme_kind not in SCHEME_KINDS:
            raise ValueError(f"scheme_kind must be one of {SCHEME_KINDS}, got {self.scheme_kind!r}")
        object.__setattr__(self, "theta_values", tuple(float(t) for t in self.theta_values))
        object.__setattr__(
            self, "threshold_values", tuple(float(t) for t in self.threshold_values)
        )
        _check_values("theta_values", self.theta_values)
        _check_values("threshold_values", self.threshold_values)
        if any(t <= 0 for t in self.theta_values):
            raise ValueError("theta_values must all be > 0")
        if self.scheme_kind in ("neb_i", "neb_ii"):
            if len(self.theta_values) != 1:
                raise ValueError(f"{self.scheme_kind} takes no theta; pass one placeholder value")
            if any(e <= 0 for e in self.threshold_values):
                raise ValueError("eps threshold_values must all be > 0")
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        # Building each scheme validates the threshold ranges up front.
        for threshold in self.threshold_values:
            _build_scheme(self.scheme_kind, self.theta_values[0], threshold)

    def cell_scheme(self, theta: float, threshold: float) -> InterferenceScheme:
        return _build_scheme(self.scheme_kind, theta, threshold)


def _check_values(name: str, values: tuple[float, ...]) -> None:
    if not values:
        raise ValueError(f"{name} must be non-empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly increasing (sorted, no duplicates)")


def _build_scheme(kind: str, theta: float, threshold: float) -> InterferenceScheme:
    if kind == "pop":
        return Pop(p_c=threshold, theta=theta)
    if kind == "neb":
        n_c = int(threshold)
        if n_c != threshold:
            raise ValueError(f"neb threshold must be an integer in 0..4, got {threshold}")
        return Neb(n_c=n_c, theta=theta)
    if kind == "neb_i":
        return NebI(eps=threshold)
    if kind == "neb_ii":
        return NebII(eps=threshold)
    raise ValueError(f"unknown scheme kind {kind!r}")


def _value_key(value: float) -> int:
    # Stable per-value seed component: the IEEE-754 bit pattern, so a cell's
    # seeds depend on its (theta, threshold) values, never on list positions.
    return int(np.float64(value).view(np.uint64))


def _cell_configs(spec: SweepSpec, ti: int, hi: int) -> list[RunConfig]:
    theta = spec.theta_values[ti]
    threshold = spec.threshold_values[hi]
    scheme = spec.cell_scheme(theta, threshold)
    return [
        replace(
            spec.base,
            scheme=scheme,
            seed=derive_seed(spec.base_seed, _value_key(theta), _value_key(threshold), rep),
        )
        for rep in range(spec.replicates)
    ]


def run_sweep(spec: SweepSpec, workers: int = 1, progress=None) -> list[AggregateCell]:
    """One AggregateCell per (theta, threshold) pair, lexicographic order.

    ``progress`` is called as progress(done, total, cell) after each cell.
    """
    cell_indices = [
        (ti, hi)
        for ti in range(len(spec.theta_values))
        for hi in range(len(spec.threshold_values))
    ]
    cells: list[AggregateCell] = []
    if workers > 1:
        pool = ProcessPoolExecutor(max_workers=workers)
    else:
        pool = None
    try:
        for done, (ti, hi) in enumerate(cell_indices, start=1):
            configs = _cell_configs(spec, ti, hi)
            if pool is None:
                results = [run(c) for c in configs]
            else:
                results = list(pool.map(run, configs))
            cell = aggregate(results, spec.theta_values[ti], spec.threshold_values[hi])
            cells.append(cell)
            if progress is not None:
                progress(done, len(cell_indices), cell)
    finally:
        if pool is not None:
            pool.shutdown()
    return cells


def sweep_metadata(spec: SweepSpec) -> dict:
    """Sidecar describing the sweep: parameters, seed, timestamp, version."""
    base = spec.base
    return {
        "artifact_version": ARTIFACT_VERSION,
        "created_unix": time.time(),
        "scheme_kind": spec.scheme_kind,
        "theta_values": list(spec.theta_values),
        "threshold_values": list(spec.threshold_values),
        "replicates": spec.replicates,
        "base_seed": spec.base_seed,
        "cost_normalisation": "raw totals (no 1e7 division applied)",
        "run_config": {
            "side_length": base.side_length,
            "b": base.payoff.b,
            "punishment": base.payoff.punishment,
            "rule": type(base.rule).__name__,
            "K": getattr(base.rule, "K", None),
            "mu": getattr(base.rule, "mu", None),
            "generations": base.generations,
            "measure_window": base.measure_window,
            "initial_coop_probability": base.initial_coop_probability,
            "initial_exact_fraction": base.initial_exact_fraction,
            "early_stop_on_homogeneous": base.early_stop_on_homogeneous,
        },
    }


def write_metadata_json(path, spec: SweepSpec) -> None:
    with open(path, "w") as fh:
        json.dump(sweep_metadata(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")
