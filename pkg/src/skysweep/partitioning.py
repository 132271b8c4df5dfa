"""Covering the survey grid with equal-size rectangular patrol regions.

The grid is covered by axis-aligned blocks of span_cols x span_rows cells.
Blocks are laid out on a regular lattice from the lower-left corner; when the
grid dimensions are not integer multiples of the block span, extra blocks
flush with the right and top edges complete the cover (these may overlap
their lattice neighbours). Every block holds exactly span_cols * span_rows
nodes, so each one presents the same workload to the team patrolling it.

Emission order is fixed and deterministic: lattice-interior blocks first
(column-major: left-to-right, bottom-to-top within a column strip), then the
right-edge band bottom-to-top, then the top-edge band left-to-right, then
the top-right corner block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import GridSpec, Node


@dataclass(frozen=True)
class PartitionRect:
    """One rectangular block of cells.

    anchor_col, anchor_row: lowest cell indices covered by the block.
    nodes: the block's waypoints in row-major order.
    centroid: mean of the node ground positions (z = 0); the team's
    release/recovery point for this block.
    """

    id: int
    anchor_col: int
    anchor_row: int
    span_cols: int
    span_rows: int
    nodes: tuple[Node, ...]
    centroid: tuple[float, float, float]


@dataclass(frozen=True)
class PartitionSet:
    """The full cover of a grid by equal-size blocks."""

    grid: GridSpec
    span_cols: int
    span_rows: int
    partitions: tuple[PartitionRect, ...]

    @property
    def count(self) -> int:
        return len(self.partitions)

    def membership_counts(self) -> list[int]:
        """How many blocks contain each node, indexed by node id."""
        counts = [0] * self.grid.node_count
        for part in self.partitions:
            for node in part.nodes:
                counts[node.id] += 1
        return counts


def partition(grid: GridSpec, span_cols: int, span_rows: int) -> PartitionSet:
    """Cover the grid with blocks of span_cols x span_rows cells.

    The number of blocks is ceil(cols/span_cols) * ceil(rows/span_rows).
    Raises ValueError if a span is < 1 or exceeds the grid dimension.
    """
    if not (1 <= span_cols <= grid.cols):
        raise ValueError(f"span_cols must be in [1, {grid.cols}], got {span_cols}")
    if not (1 <= span_rows <= grid.rows):
        raise ValueError(f"span_rows must be in [1, {grid.rows}], got {span_rows}")

    k1 = math.ceil(grid.cols / span_cols)
    k2 = math.ceil(grid.rows / span_rows)
    right_col = grid.cols - span_cols
    top_row = grid.rows - span_rows

    anchors: list[tuple[int, int]] = []
    # lattice interior
    for i in range(k1 - 1):
        for j in range(k2 - 1):
            anchors.append((i * span_cols, j * span_rows))
    # right-edge band
    for j in range(k2 - 1):
        anchors.append((right_col, j * span_rows))
    # top-edge band
    for i in range(k1 - 1):
        anchors.append((i * span_cols, top_row))
    # corner
    anchors.append((right_col, top_row))

    parts = tuple(
        _build_rect(grid, pid, a_col, a_row, span_cols, span_rows)
        for pid, (a_col, a_row) in enumerate(anchors)
    )
    return PartitionSet(grid=grid, span_cols=span_cols, span_rows=span_rows, partitions=parts)


def _build_rect(
    grid: GridSpec, pid: int, a_col: int, a_row: int, span_cols: int, span_rows: int
) -> PartitionRect:
    nodes = []
    for row in range(a_row, a_row + span_rows):
        for col in range(a_col, a_col + span_cols):
            nodes.append(
                Node(
                    id=grid.node_id(col, row),
                    col=col,
                    row=row,
                    position=grid.node_position(col, row),
                )
            )
    centroid = (
        (a_col + span_cols / 2.0) * grid.cell_size,
        (a_row + span_rows / 2.0) * grid.cell_size,
        0.0,
    )
    return PartitionRect(
        id=pid,
        anchor_col=a_col,
        anchor_row=a_row,
        span_cols=span_cols,
        span_rows=span_rows,
        nodes=tuple(nodes),
        centroid=centroid,
    )


def unique_coverage_witness(pset: PartitionSet) -> int:
    """Id of a node contained in exactly one block.

    At least one such node always exists for a valid cover; the lowest id
    is returned so the choice is deterministic.
    """
    counts = pset.membership_counts()
    for node_id, count in enumerate(counts):
        if count == 1:
            return node_id
    raise RuntimeError("no node with unique coverage; cover is malformed")
