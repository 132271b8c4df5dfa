import pytest

from skysweep.geometry import FleetParams, build_grid, enumerate_nodes


def test_grid_dimensions_published_scale():
    grid = build_grid(1584.0, 1056.0, 33.0, 30.0)
    assert grid.cols == 48
    assert grid.rows == 32
    assert grid.node_count == 1536


def test_grid_dimensions_rectangular():
    grid = build_grid(330.0, 165.0, 33.0, 10.0)
    assert (grid.cols, grid.rows) == (10, 5)


def test_grid_rejects_non_multiple():
    with pytest.raises(ValueError):
        build_grid(10.0, 8.0, 3.0, 1.0)
    with pytest.raises(ValueError):
        build_grid(8.0, 10.5, 3.0, 1.0)


def test_grid_rejects_non_positive():
    with pytest.raises(ValueError):
        build_grid(0.0, 8.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        build_grid(8.0, 8.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        build_grid(8.0, 8.0, 1.0, -0.5)


def test_node_positions_are_cell_centers():
    grid = build_grid(4.0, 4.0, 2.0, 5.0)
    nodes = enumerate_nodes(grid)
    assert [n.position for n in nodes] == [
        (1.0, 1.0, 5.0),
        (3.0, 1.0, 5.0),
        (1.0, 3.0, 5.0),
        (3.0, 3.0, 5.0),
    ]
    assert [n.id for n in nodes] == [0, 1, 2, 3]
    assert [(n.col, n.row) for n in nodes] == [(0, 0), (1, 0), (0, 1), (1, 1)]


def test_node_id_row_major():
    grid = build_grid(6.0, 4.0, 1.0, 1.0)
    assert grid.node_id(0, 0) == 0
    assert grid.node_id(5, 0) == 5
    assert grid.node_id(0, 1) == 6
    assert grid.node_id(5, 3) == 23
    with pytest.raises(ValueError):
        grid.node_id(6, 0)
    with pytest.raises(ValueError):
        grid.node_id(0, 4)


def test_fleet_team_size():
    fleet = FleetParams(15, 3, 100.0, 0.5, 0.5, 15.0, 5.0)
    assert fleet.team_size == 5


def test_fleet_rejects_uneven_teams():
    with pytest.raises(ValueError):
        FleetParams(7, 3, 100.0, 0.5, 0.5, 15.0, 5.0)


def test_fleet_rejects_non_positive_rates():
    with pytest.raises(ValueError):
        FleetParams(2, 1, 0.0, 0.5, 0.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        FleetParams(2, 1, 10.0, -0.5, 0.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        FleetParams(0, 1, 10.0, 0.5, 0.5, 1.0, 1.0)
