import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hgfp import (BoundingBox, ConfigError, GridConfig, HashGrid,
                  OutOfBoundsError, PointSet, corner_vertices,
                  corner_weights, hash_vertex, hash_vertex_batch,
                  interpolate, interpolate_all, scale_position)


def make_grid(dims=2, levels=2, resolutions=(4, 8), table_size=16,
              feature_dim=1, seed=0):
    cfg = GridConfig(dims, levels, resolutions, table_size, feature_dim)
    rng = np.random.default_rng(seed)
    tables = rng.uniform(-1, 1, (levels, table_size, feature_dim))
    return HashGrid(cfg, tables)


class TestConfig:
    def test_defaults_primes(self):
        cfg = GridConfig(3, 1, (4,), 16, 1)
        assert cfg.primes == (1, 2654435761, 805459861)

    def test_rejects_non_power_of_two_table(self):
        with pytest.raises(ConfigError):
            GridConfig(2, 1, (4,), 12, 1)

    def test_rejects_decreasing_resolutions(self):
        with pytest.raises(ConfigError):
            GridConfig(2, 2, (8, 4), 16, 1)

    def test_rejects_even_prime(self):
        with pytest.raises(ConfigError):
            GridConfig(2, 1, (4,), 16, 1, primes=(1, 12345678))

    def test_rejects_first_prime_not_one(self):
        with pytest.raises(ConfigError):
            GridConfig(2, 1, (4,), 16, 1, primes=(3, 2654435761))

    def test_degenerate_bbox_axis(self):
        with pytest.raises(ConfigError):
            BoundingBox([0.0, 1.0], [1.0, 1.0])


class TestScalePosition:
    def test_midpoint_1d(self):
        bbox = BoundingBox([0.0], [1.0])
        assert scale_position((0.5,), bbox, 4) == pytest.approx([2.0])

    def test_lower_boundary_is_zero(self):
        bbox = BoundingBox([1.0, -1.0], [5.0, 3.0])
        np.testing.assert_array_equal(
            scale_position(bbox.min, bbox, 7), [0.0, 0.0])

    def test_hand_evaluated_two_axes(self):
        bbox = BoundingBox([1.0, -1.0], [5.0, 3.0])
        got = scale_position((3.0, -1.0), bbox, 8)
        np.testing.assert_allclose(got, [4.0, 0.0])

    def test_outside_names_axis(self):
        bbox = BoundingBox([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(OutOfBoundsError) as e:
            scale_position((0.5, 1.5), bbox, 4)
        assert e.value.axis == 1

    @given(
        a=st.floats(0.0, 1.0), b=st.floats(0.0, 1.0),
        alpha=st.floats(0.0, 1.0),
    )
    def test_affine_per_axis(self, a, b, alpha):
        bbox = BoundingBox([-2.0], [3.0])
        pa = -2.0 + 5.0 * a
        pb = -2.0 + 5.0 * b
        mid = alpha * pa + (1 - alpha) * pb
        lhs = scale_position([mid], bbox, 16)[0]
        rhs = (alpha * scale_position([pa], bbox, 16)[0]
               + (1 - alpha) * scale_position([pb], bbox, 16)[0])
        assert abs(lhs - rhs) < 1e-9


class TestCornerVertices:
    def test_listed_corners(self):
        got = corner_vertices((1.5, 2.25), 4)
        assert got == [(1, 2), (2, 2), (1, 3), (2, 3)]

    def test_origin(self):
        assert corner_vertices((0.0, 0.0), 4) == [
            (0, 0), (1, 0), (0, 1), (1, 1)]

    def test_upper_boundary_clamped(self):
        got = corner_vertices((4.0, 4.0), 4)
        assert got == [(3, 3), (4, 3), (3, 4), (4, 4)]
        assert all(0 <= c <= 4 for v in got for c in v)

    def test_out_of_range_rejected(self):
        with pytest.raises(OutOfBoundsError):
            corner_vertices((4.5, 1.0), 4)

    @given(
        d=st.integers(1, 3), res=st.integers(1, 64),
        u=st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3),
    )
    def test_count_distinct_and_in_range(self, d, res, u):
        scaled = [u[k] * res for k in range(d)]
        got = corner_vertices(scaled, res)
        assert len(got) == 1 << d
        assert len(set(got)) == 1 << d
        assert all(0 <= c <= res for v in got for c in v)


class TestHashVertex:
    def test_zero_vertex(self):
        assert hash_vertex((0, 0), (1, 2654435761), 16) == 0

    def test_unit_x(self):
        assert hash_vertex((1, 0), (1, 2654435761), 16) == 1

    def test_xor_case(self):
        # 1*1 XOR 1*2654435761 = 2654435760; 2654435760 mod 16 = 0
        assert (1 ^ 2654435761) % 16 == 0
        assert hash_vertex((1, 1), (1, 2654435761), 16) == 0

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(3)
        primes = (1, 2654435761, 805459861)
        verts = rng.integers(0, 1 << 20, (500, 3))
        batch = hash_vertex_batch(verts, primes, 1 << 13)
        for i in range(0, 500, 37):
            assert batch[i] == hash_vertex(verts[i], primes, 1 << 13)

    @given(
        st.integers(1, 11).map(lambda e: 1 << (2 * e)),
        st.lists(st.integers(0, 1 << 20), min_size=3, max_size=3),
    )
    def test_image_in_table(self, table_size, coords):
        h = hash_vertex(coords, (1, 2654435761, 805459861), table_size)
        assert 0 <= h < table_size


class TestInterpolation:
    def test_lattice_point_returns_hashed_row(self):
        grid = make_grid()
        bbox = BoundingBox([0.0, 0.0], [1.0, 1.0])
        # scaled coords (2, 3) at level 0 (R=4)
        point = (0.5, 0.75)
        idx = hash_vertex((2, 3), grid.config.primes, grid.config.table_size)
        got = interpolate(grid, 0, point, bbox)
        np.testing.assert_array_equal(got, grid.tables[0][idx])

    def test_constant_grid(self):
        cfg = GridConfig(3, 2, (4, 8), 32, 2)
        grid = HashGrid(cfg, np.full((2, 32, 2), 7.25))
        bbox = BoundingBox([0, 0, 0], [1, 1, 1])
        rng = np.random.default_rng(0)
        for p in rng.uniform(0, 1, (20, 3)):
            for l in range(2):
                np.testing.assert_allclose(
                    interpolate(grid, l, p, bbox), [7.25, 7.25],
                    rtol=0, atol=1e-12)

    def test_1d_midpoint_blend(self):
        cfg = GridConfig(1, 1, (2,), 8, 1)
        rng = np.random.default_rng(5)
        grid = HashGrid(cfg, rng.uniform(-1, 1, (1, 8, 1)))
        bbox = BoundingBox([0.0], [2.0])
        h0 = hash_vertex((0,), cfg.primes, 8)
        h1 = hash_vertex((1,), cfg.primes, 8)
        want = 0.5 * grid.tables[0][h0] + 0.5 * grid.tables[0][h1]
        np.testing.assert_array_equal(interpolate(grid, 0, (0.5,), bbox), want)

    def test_upper_boundary_point_is_valid(self):
        grid = make_grid()
        bbox = BoundingBox([0.0, 0.0], [1.0, 1.0])
        idx = hash_vertex((4, 4), grid.config.primes, grid.config.table_size)
        got = interpolate(grid, 0, (1.0, 1.0), bbox)
        np.testing.assert_array_equal(got, grid.tables[0][idx])

    @settings(max_examples=60)
    @given(
        d=st.integers(1, 3), res=st.integers(1, 32),
        u=st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3),
    )
    def test_partition_of_unity(self, d, res, u):
        scaled = [u[k] * res for k in range(d)]
        _, weights = corner_weights(scaled, res)
        assert np.all(weights >= 0)
        assert abs(weights.sum() - 1.0) < 1e-12

    def test_corner_exactness_on_integer_lattice(self):
        cfg = GridConfig(2, 1, (4,), 64, 3)
        rng = np.random.default_rng(9)
        grid = HashGrid(cfg, rng.uniform(-1, 1, (1, 64, 3)))
        bbox = BoundingBox([0.0, 0.0], [4.0, 4.0])
        for x in range(5):
            for y in range(5):
                idx = hash_vertex((x, y), cfg.primes, 64)
                got = interpolate(grid, 0, (float(x), float(y)), bbox)
                np.testing.assert_array_equal(got, grid.tables[0][idx])


class TestInterpolateAll:
    def test_single_point_matches_interpolate(self):
        grid = make_grid(dims=3, resolutions=(3, 7), seed=2)
        bbox = BoundingBox([0, 0, 0], [1, 1, 1])
        pts = PointSet(3, [[0.2, 0.7, 0.4]])
        out = interpolate_all(grid, pts, bbox)
        for l in range(2):
            np.testing.assert_array_equal(
                out[0, l], interpolate(grid, l, pts.points[0], bbox))

    def test_duplicated_rows(self):
        grid = make_grid(seed=4)
        bbox = BoundingBox([0, 0], [1, 1])
        pts = PointSet(2, [[0.1, 0.9], [0.1, 0.9]])
        out = interpolate_all(grid, pts, bbox)
        np.testing.assert_array_equal(out[0], out[1])

    def test_permutation_equivariance(self):
        grid = make_grid(seed=6)
        bbox = BoundingBox([0, 0], [1, 1])
        rng = np.random.default_rng(11)
        pts = rng.uniform(0, 1, (50, 2))
        perm = rng.permutation(50)
        a = interpolate_all(grid, PointSet(2, pts), bbox)
        b = interpolate_all(grid, PointSet(2, pts[perm]), bbox)
        np.testing.assert_array_equal(a[perm], b)

    def test_out_of_bounds_names_point(self):
        grid = make_grid()
        bbox = BoundingBox([0, 0], [1, 1])
        pts = PointSet(2, [[0.5, 0.5], [0.5, 2.0]])
        with pytest.raises(OutOfBoundsError) as e:
            interpolate_all(grid, pts, bbox)
        assert e.value.point_index == 1
        assert e.value.axis == 1
