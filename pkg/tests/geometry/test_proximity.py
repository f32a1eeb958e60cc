import numpy as np
import pytest

from nlos_ssl.geometry.proximity import closest_approach, closest_approach_grid


def test_skew_lines_closest_pair():
    result = closest_approach([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, -1.0, 1.0], [2.0, 1.0, 1.0])

    np.testing.assert_allclose(result.ray_point, [2.0, 0.0, 0.0])
    np.testing.assert_allclose(result.edge_point, [2.0, 0.0, 1.0])
    assert result.gap == pytest.approx(1.0)
    assert result.ray_param == pytest.approx(2.0)
    assert result.edge_param == pytest.approx(0.5)
    assert not result.parallel


def test_edge_parameter_is_clamped_to_segment():
    result = closest_approach([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 1.0, 1.0], [2.0, 3.0, 1.0])

    assert result.edge_param == 0.0
    np.testing.assert_allclose(result.edge_point, [2.0, 1.0, 1.0])
    np.testing.assert_allclose(result.ray_point, [2.0, 0.0, 0.0])


def test_ray_parameter_is_clamped_behind_origin():
    result = closest_approach([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [-2.0, -1.0, 1.0], [-2.0, 1.0, 1.0])

    assert result.ray_param == 0.0
    np.testing.assert_allclose(result.ray_point, [0.0, 0.0, 0.0])
    np.testing.assert_allclose(result.edge_point, [-2.0, 0.0, 1.0])


def test_parallel_ray_uses_origin():
    result = closest_approach([0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.5], [1.0, 0.0, 2.0])

    assert result.parallel
    assert result.ray_param == 0.0
    np.testing.assert_allclose(result.edge_point, [1.0, 0.0, 0.5])


def test_grid_matches_single_queries(rng):
    origins = rng.standard_normal((6, 3))
    directions = rng.standard_normal((6, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    starts = rng.standard_normal((4, 3))
    ends = rng.standard_normal((4, 3))

    grid = closest_approach_grid(origins, directions, starts, ends)

    assert grid.gaps.shape == (6, 4)
    assert grid.edge_points.shape == (6, 4, 3)
    for p in range(6):
        for w in range(4):
            single = closest_approach(origins[p], directions[p], starts[w], ends[w])
            assert grid.gaps[p, w] == pytest.approx(single.gap)
            np.testing.assert_allclose(grid.edge_points[p, w], single.edge_point)


def test_grid_gap_is_a_minimum(rng):
    origin = np.array([0.3, -0.2, 0.1])
    direction = np.array([0.6, 0.8, 0.0])
    start, end = np.array([1.0, 0.0, -1.0]), np.array([1.5, 2.0, 1.0])

    result = closest_approach(origin, direction, start, end)
    s = rng.random(500) * 5.0
    t = rng.random(500)
    sampled = np.linalg.norm((origin + s[:, None] * direction) - (start + t[:, None] * (end - start)), axis=1)

    assert result.gap <= sampled.min() + 1e-12
