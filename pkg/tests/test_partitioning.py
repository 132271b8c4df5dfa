import math
import random

import pytest

from skysweep.geometry import build_grid
from skysweep.partitioning import partition, unique_coverage_witness


def _covers(part, col, row):
    """Geometric containment straight from the anchor, independent of the
    node lists the implementation attaches."""
    return (
        part.anchor_col <= col < part.anchor_col + part.span_cols
        and part.anchor_row <= row < part.anchor_row + part.span_rows
    )


def _membership_counts(grid, pset):
    counts = [0] * grid.node_count
    for part in pset.partitions:
        for row in range(grid.rows):
            for col in range(grid.cols):
                if _covers(part, col, row):
                    counts[grid.node_id(col, row)] += 1
    return counts


def test_published_scale_cover():
    grid = build_grid(1584.0, 1056.0, 33.0, 30.0)
    pset = partition(grid, 16, 16)
    assert pset.count == 6
    anchors = [(p.anchor_col, p.anchor_row) for p in pset.partitions]
    assert anchors == [(0, 0), (16, 0), (32, 0), (0, 16), (16, 16), (32, 16)]
    centroids = [p.centroid for p in pset.partitions]
    assert centroids == [
        (264.0, 264.0, 0.0),
        (792.0, 264.0, 0.0),
        (1320.0, 264.0, 0.0),
        (264.0, 792.0, 0.0),
        (792.0, 792.0, 0.0),
        (1320.0, 792.0, 0.0),
    ]
    assert all(len(p.nodes) == 256 for p in pset.partitions)


def test_non_dividing_span_families():
    # 10x11 cells covered by 3x3 blocks: 3x3 lattice + 3 right + 3 top + corner
    grid = build_grid(30.0, 33.0, 3.0, 1.0)
    assert (grid.cols, grid.rows) == (10, 11)
    pset = partition(grid, 3, 3)
    assert pset.count == 16
    anchors = [(p.anchor_col, p.anchor_row) for p in pset.partitions]
    interior = [a for a in anchors if a[0] < 7 and a[1] < 8]
    right = [a for a in anchors if a[0] == 7 and a[1] < 8]
    top = [a for a in anchors if a[1] == 8 and a[0] < 7]
    corner = [a for a in anchors if a == (7, 8)]
    assert len(interior) == 9
    assert len(right) == 3
    assert len(top) == 3
    assert len(corner) == 1
    # fixed emission order: lattice, right band, top band, corner
    assert anchors[:9] == interior
    assert anchors[9:12] == right
    assert anchors[12:15] == top
    assert anchors[15:] == corner
    assert all(len(p.nodes) == 9 for p in pset.partitions)


def test_block_count_identity():
    grid = build_grid(30.0, 33.0, 3.0, 1.0)
    for span_cols in range(1, grid.cols + 1):
        for span_rows in range(1, grid.rows + 1):
            pset = partition(grid, span_cols, span_rows)
            expected = math.ceil(grid.cols / span_cols) * math.ceil(grid.rows / span_rows)
            assert pset.count == expected


def test_every_node_covered_and_witness_unique():
    rng = random.Random(7)
    for _ in range(50):
        cols = rng.randint(1, 30)
        rows = rng.randint(1, 30)
        grid = build_grid(float(cols), float(rows), 1.0, 1.0)
        span_cols = rng.randint(1, cols)
        span_rows = rng.randint(1, rows)
        pset = partition(grid, span_cols, span_rows)
        counts = _membership_counts(grid, pset)
        assert min(counts) >= 1
        witness = unique_coverage_witness(pset)
        assert counts[witness] == 1


def test_membership_counts_match_node_lists():
    grid = build_grid(10.0, 7.0, 1.0, 1.0)
    pset = partition(grid, 4, 3)
    assert pset.membership_counts() == _membership_counts(grid, pset)


def test_rejects_bad_spans():
    grid = build_grid(8.0, 8.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        partition(grid, 0, 4)
    with pytest.raises(ValueError):
        partition(grid, 4, 9)


def test_single_block_cover():
    grid = build_grid(5.0, 4.0, 1.0, 1.0)
    pset = partition(grid, 5, 4)
    assert pset.count == 1
    assert len(pset.partitions[0].nodes) == 20
    assert unique_coverage_witness(pset) == 0
