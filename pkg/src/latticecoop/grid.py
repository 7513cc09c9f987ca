"""Lattice topology: strategy storage, toroidal neighbour indexing, snapshots.

Agents live on an L x L square lattice with periodic boundary conditions and
interact with their four von Neumann neighbours. Cells are stored row-major
as uint8 (1 = cooperator, 0 = defector); neighbour order is fixed as
north, east, south, west everywhere, which is what all tie-breaking in the
update rules relies on.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

# Fixed neighbour order used for iteration and tie-breaking.
NEIGHBOUR_ORDER = ("north", "east", "south", "west")
NUM_NEIGHBOURS = 4

MIN_SIDE_LENGTH = 3  # below this the four neighbours are not distinct


class Strategy(IntEnum):
    """The two pure strategies of the one-shot Prisoner's Dilemma."""

    D = 0
    C = 1


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable L x L strategy lattice.

    ``cells`` is a row-major (L, L) uint8 array with values in {0, 1}
    (``Strategy.D`` / ``Strategy.C``). The array is copied and frozen on
    construction, so grids can be shared freely across workers.
    """

    cells: np.ndarray

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
            raise ValueError(f"grid cells must be a square 2-D array, got shape {cells.shape}")
        if cells.shape[0] < MIN_SIDE_LENGTH:
            raise ValueError(f"side length must be >= {MIN_SIDE_LENGTH}, got {cells.shape[0]}")
        if not np.isin(cells, (Strategy.D.value, Strategy.C.value)).all():
            raise ValueError("grid cells must contain only 0 (D) and 1 (C)")
        frozen = np.ascontiguousarray(cells, dtype=np.uint8).copy()
        frozen.setflags(write=False)
        object.__setattr__(self, "cells", frozen)

    @property
    def side_length(self) -> int:
        return self.cells.shape[0]

    @property
    def size(self) -> int:
        """Number of agents Z = L * L."""
        return self.cells.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return self.cells.shape == other.cells.shape and bool(
            np.array_equal(self.cells, other.cells)
        )


def neighbours(i: int, side_length: int) -> tuple[int, int, int, int]:
    """Von Neumann neighbours of agent ``i`` in fixed (N, E, S, W) order.

    Indices are row-major on the torus: agent i sits at row i // L,
    column i % L, and the lattice wraps modulo L in both directions.
    """
    length = side_length
    if length < MIN_SIDE_LENGTH:
        raise ValueError(f"side length must be >= {MIN_SIDE_LENGTH}, got {length}")
    if not 0 <= i < length * length:
        raise ValueError(f"agent index {i} out of range for L={length}")
    r, c = divmod(i, length)
    north = ((r - 1) % length) * length + c
    east = r * length + (c + 1) % length
    south = ((r + 1) % length) * length + c
    west = r * length + (c - 1) % length
    return north, east, south, west


def neighbour_field(values: np.ndarray) -> np.ndarray:
    """Stack each cell's four neighbour values, shape (4, L, L), N/E/S/W order.

    ``out[k, r, c]`` is ``values`` at the k-th neighbour of cell (r, c) under
    toroidal wrap-around. ``np.argmax`` over axis 0 of such a stack therefore
    breaks ties in the documented N, E, S, W order.
    """
    return np.stack(
        (
            np.roll(values, 1, axis=0),   # north: value at (r-1, c)
            np.roll(values, -1, axis=1),  # east:  value at (r, c+1)
            np.roll(values, -1, axis=0),  # south: value at (r+1, c)
            np.roll(values, 1, axis=1),   # west:  value at (r, c-1)
        )
    )


def coop_count(g: Grid) -> int:
    """Number of cooperators x_C currently on the grid."""
    return int(np.count_nonzero(g.cells))


def grid_hash(g: Grid) -> int:
    """Deterministic 64-bit digest of (L, cells).

    blake2b (digest_size=8) over the side length as an 8-byte little-endian
    unsigned integer followed by the row-major uint8 cell bytes. Stable
    across runs and platforms; used for cycle detection and output naming.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(g.side_length.to_bytes(8, "little"))
    h.update(g.cells.tobytes())
    return int.from_bytes(h.digest(), "little")


def random_grid(
    side_length: int,
    coop_probability: float = 0.5,
    rng: np.random.Generator | None = None,
    exact_fraction: bool = False,
) -> Grid:
    """Random initial grid, each cell independently C with ``coop_probability``.

    Consumes the generator row-major: one uniform draw per cell, cell i
    compared against the probability. With ``exact_fraction`` the grid
    instead holds exactly round(p * Z) cooperators at positions given by a
    single rng.permutation call (sensitivity-check variant of the default
    independent Bernoulli initialisation).
    """
    if side_length < MIN_SIDE_LENGTH:
        raise ValueError(f"side length must be >= {MIN_SIDE_LENGTH}, got {side_length}")
    if not 0.0 <= coop_probability <= 1.0:
        raise ValueError(f"coop_probability must be in [0, 1], got {coop_probability}")
    if rng is None:
        rng = np.random.default_rng()
    z = side_length * side_length
    if exact_fraction:
        n_coop = round(coop_probability * z)
        flat = np.zeros(z, dtype=np.uint8)
        flat[rng.permutation(z)[:n_coop]] = Strategy.C.value
        cells = flat.reshape(side_length, side_length)
    else:
        draws = rng.random((side_length, side_length))
        cells = (draws < coop_probability).astype(np.uint8)
    return Grid(cells)


def format_snapshot(g: Grid) -> str:
    """Text snapshot: first line ``L=<int>``, then L lines of L chars from {C, D}."""
    symbols = np.where(g.cells == Strategy.C.value, "C", "D")
    rows = ["".join(row) for row in symbols]
    return f"L={g.side_length}\n" + "\n".join(rows) + "\n"


def parse_snapshot(text: str) -> Grid:
    """Parse the snapshot format emitted by :func:`format_snapshot`.

    Bit-exact round-trip: ``parse_snapshot(format_snapshot(g)) == g``.
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith("L="):
        raise ValueError("snapshot must start with an 'L=<int>' line")
    try:
        length = int(lines[0][2:])
    except ValueError:
        raise ValueError(f"invalid side length in snapshot header: {lines[0]!r}") from None
    rows = lines[1:]
    if len(rows) != length:
        raise ValueError(f"snapshot declares L={length} but has {len(rows)} rows")
    cells = np.empty((length, length), dtype=np.uint8)
    for r, row in enumerate(rows):
        if len(row) != length:
            raise ValueError(f"snapshot row {r} has length {len(row)}, expected {length}")
        for c, ch in enumerate(row):
            if ch == "C":
                cells[r, c] = Strategy.C.value
            elif ch == "D":
                cells[r, c] = Strategy.D.value
            else:
                raise ValueError(f"invalid cell character {ch!r} at row {r}, column {c}")
    return Grid(cells)
