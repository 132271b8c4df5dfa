"""Survey grid geometry: rectangular areas discretized into square cells.

The area of interest is an axis-aligned rectangle whose sides are integer
multiples of the cell size. Surveillance happens at the cell centers, all at
a fixed patrol altitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Tolerance for "is an integer multiple" checks on grid dimensions.
DIM_EPS = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """A discretized rectangular survey area.

    width, height: side lengths of the rectangle (same unit as cell_size).
    cell_size: side length of one square cell.
    altitude: patrol altitude of the cell-center waypoints.
    cols, rows: number of cells along x and y.
    """

    width: float
    height: float
    cell_size: float
    altitude: float
    cols: int
    rows: int

    @property
    def node_count(self) -> int:
        return self.cols * self.rows

    def node_id(self, col: int, row: int) -> int:
        if not (0 <= col < self.cols and 0 <= row < self.rows):
            raise ValueError(f"cell ({col}, {row}) outside {self.cols}x{self.rows} grid")
        return row * self.cols + col

    def node_position(self, col: int, row: int) -> tuple[float, float, float]:
        """Patrol waypoint above the center of cell (col, row)."""
        return (
            (col + 0.5) * self.cell_size,
            (row + 0.5) * self.cell_size,
            self.altitude,
        )


@dataclass(frozen=True)
class Node:
    """One surveillance waypoint: a cell center at patrol altitude."""

    id: int
    col: int
    row: int
    position: tuple[float, float, float]


@dataclass(frozen=True)
class FleetParams:
    """Vehicle fleet description and per-vehicle physical limits.

    uav_count must be an integer multiple of ugv_count; each ground vehicle
    carries and recharges uav_count / ugv_count aerial vehicles.

    energy_capacity: usable battery energy of one UAV.
    drain_rate: energy drawn per unit time while airborne.
    charge_rate: energy restored per unit time while docked.
    uav_speed, ugv_speed: maximum speeds.
    """

    uav_count: int
    ugv_count: int
    energy_capacity: float
    drain_rate: float
    charge_rate: float
    uav_speed: float
    ugv_speed: float

    def __post_init__(self) -> None:
        if self.uav_count < 1 or self.ugv_count < 1:
            raise ValueError("need at least one UAV and one UGV")
        if self.uav_count % self.ugv_count != 0:
            raise ValueError(
                f"uav_count ({self.uav_count}) must be a multiple of "
                f"ugv_count ({self.ugv_count})"
            )
        for name in ("energy_capacity", "drain_rate", "charge_rate", "uav_speed", "ugv_speed"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def team_size(self) -> int:
        """UAVs per ground vehicle."""
        return self.uav_count // self.ugv_count


def build_grid(width: float, height: float, cell_size: float, altitude: float) -> GridSpec:
    """Validate dimensions and construct a GridSpec.

    width and height must be positive integer multiples of cell_size
    (within DIM_EPS); altitude must be non-negative.
    """
    if width <= 0 or height <= 0 or cell_size <= 0:
        raise ValueError("width, height and cell_size must be positive")
    if altitude < 0:
        raise ValueError("altitude must be non-negative")
    cols = _exact_multiple(width, cell_size, "width")
    rows = _exact_multiple(height, cell_size, "height")
    return GridSpec(
        width=float(width),
        height=float(height),
        cell_size=float(cell_size),
        altitude=float(altitude),
        cols=cols,
        rows=rows,
    )


def _exact_multiple(length: float, cell_size: float, name: str) -> int:
    n = round(length / cell_size)
    if n < 1 or not math.isclose(n * cell_size, length, rel_tol=0.0, abs_tol=DIM_EPS * max(1.0, length)):
        raise ValueError(f"{name} ({length}) is not an integer multiple of cell_size ({cell_size})")
    return n


def enumerate_nodes(grid: GridSpec) -> list[Node]:
    """All surveillance waypoints in row-major order (row 0 first)."""
    nodes = []
    for row in range(grid.rows):
        for col in range(grid.cols):
            nodes.append(
                Node(
                    id=grid.node_id(col, row),
                    col=col,
                    row=row,
                    position=grid.node_position(col, row),
                )
            )
    return nodes
