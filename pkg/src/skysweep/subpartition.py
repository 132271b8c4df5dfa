"""Splitting one patrol block among the UAVs of a team.

Nodes are ordered by sweep angle around the block centroid, then cut into
contiguous angular slices of balanced size, one per UAV. Every slice also
contains the release point (the centroid), where its UAV starts and ends
each patrol lap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Node
from .partitioning import PartitionRect
from .tour import Tour

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SubpartitionAssignment:
    """The patrol duty of one UAV slot within one block.

    slot: 1-based index of the UAV within its team.
    nodes: the slice's waypoints, in sweep order.
    tour / tour_length / energy_cost are filled in by the scheduler once a
    lap has been routed; waypoints then holds the closed lap (release point
    first and last, at patrol altitude in between).
    """

    partition_id: int
    slot: int
    nodes: tuple[Node, ...]
    tour: Tour | None = None
    tour_length: float = math.inf
    energy_cost: float = math.inf
    waypoints: tuple[tuple[float, float, float], ...] = ()


def sweep_angle(node: Node, centroid: tuple[float, float, float]) -> float:
    """Angle of the node around the centroid, counter-clockwise from the
    +x axis, normalized to [0, 2*pi)."""
    dx = node.position[0] - centroid[0]
    dy = node.position[1] - centroid[1]
    return math.atan2(dy, dx) % TWO_PI


def quadrant_sort(part: PartitionRect) -> list[Node]:
    """Block nodes ordered by sweep angle around the centroid.

    Ties broken by distance from the centroid, then node id, so the order
    is total and deterministic.
    """

    def key(node: Node) -> tuple[float, float, int]:
        dx = node.position[0] - part.centroid[0]
        dy = node.position[1] - part.centroid[1]
        return (math.atan2(dy, dx) % TWO_PI, math.hypot(dx, dy), node.id)

    return sorted(part.nodes, key=key)


def slice_sizes(total: int, slots: int) -> list[int]:
    """Sizes of the angular slices: remaining nodes split as evenly as the
    ceiling allows, largest first. Sums to total; sizes differ by at most 1."""
    if slots < 1:
        raise ValueError("slots must be >= 1")
    if slots > total:
        raise ValueError(f"cannot split {total} nodes among {slots} UAVs without empty slices")
    sizes = []
    assigned = 0
    for k in range(slots):
        size = -((assigned - total) // (slots - k))  # ceil((total - assigned) / remaining)
        sizes.append(size)
        assigned += size
    return sizes


def allocate(part: PartitionRect, slots: int) -> list[SubpartitionAssignment]:
    """Cut the block into `slots` contiguous angular slices, one per UAV.

    Returns assignments in slot order (slot 1 first); tours are not yet
    routed. Raises ValueError if the block has fewer nodes than slots.
    """
    ordered = quadrant_sort(part)
    sizes = slice_sizes(len(ordered), slots)
    out = []
    lo = 0
    for k, size in enumerate(sizes, start=1):
        out.append(
            SubpartitionAssignment(
                partition_id=part.id,
                slot=k,
                nodes=tuple(ordered[lo : lo + size]),
            )
        )
        lo += size
    return out
