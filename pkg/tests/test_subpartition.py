import random

import pytest

from skysweep.geometry import build_grid
from skysweep.partitioning import partition
from skysweep.subpartition import allocate, quadrant_sort, slice_sizes


def _block(cols, rows, span_cols, span_rows):
    grid = build_grid(float(cols), float(rows), 1.0, 1.0)
    return partition(grid, span_cols, span_rows).partitions[0]


def test_sweep_order_2x2_frozen():
    # angles from the +x axis: node 3 at 45 deg, 2 at 135, 0 at 225, 1 at 315
    part = _block(2, 2, 2, 2)
    assert [n.id for n in quadrant_sort(part)] == [3, 2, 0, 1]


def test_sweep_order_3x3_frozen():
    # centre node (angle 0, distance 0) first, then counter-clockwise from +x
    part = _block(3, 3, 3, 3)
    assert [n.id for n in quadrant_sort(part)] == [4, 5, 8, 7, 6, 3, 0, 1, 2]


def test_sweep_order_is_permutation():
    rng = random.Random(3)
    for _ in range(25):
        span = rng.randint(1, 6)
        part = _block(span, span, span, span)
        ordered = quadrant_sort(part)
        assert sorted(n.id for n in ordered) == sorted(n.id for n in part.nodes)


def test_slice_sizes_frozen_cases():
    assert slice_sizes(256, 5) == [52, 51, 51, 51, 51]
    assert slice_sizes(10, 3) == [4, 3, 3]
    assert slice_sizes(5, 5) == [1, 1, 1, 1, 1]
    assert slice_sizes(7, 1) == [7]


def test_slice_sizes_properties():
    rng = random.Random(17)
    for _ in range(200):
        total = rng.randint(1, 400)
        slots = rng.randint(1, min(total, 12))
        sizes = slice_sizes(total, slots)
        assert len(sizes) == slots
        assert sum(sizes) == total
        assert max(sizes) - min(sizes) <= 1
        assert sizes == sorted(sizes, reverse=True)


def test_slice_sizes_rejects_bad_split():
    with pytest.raises(ValueError):
        slice_sizes(3, 4)
    with pytest.raises(ValueError):
        slice_sizes(3, 0)


def test_allocate_contiguous_slices():
    part = _block(4, 4, 4, 4)
    assignments = allocate(part, 3)
    assert [a.slot for a in assignments] == [1, 2, 3]
    ordered = [n.id for n in quadrant_sort(part)]
    joined = [n.id for a in assignments for n in a.nodes]
    assert joined == ordered
    assert [len(a.nodes) for a in assignments] == [6, 5, 5]
    assert all(a.partition_id == part.id for a in assignments)


def test_allocate_rejects_too_many_slots():
    part = _block(2, 2, 2, 2)
    with pytest.raises(ValueError):
        allocate(part, 5)
