"""Dictionary construction tests: grids, column bijections, lazy joint atoms."""

import numpy as np
import pytest

from xldma.dictionaries import (
    CapacityError,
    JointDictionary,
    JointGrid,
    PolarGrid,
    build_az_dictionary,
    build_el_grid,
    build_joint_dictionary,
)
from xldma.geometry import ArrayGeometry, manifold_from_cosines, steering_az

LAM = 0.0107
D = LAM / 2


class TestGrids:
    def test_el_grid_small_cases(self):
        np.testing.assert_allclose(build_el_grid(1), [-1.0, 1.0])
        np.testing.assert_allclose(build_el_grid(2), [-1.0, -1 / 3, 1 / 3, 1.0])

    def test_el_grid_sorted_in_bounds(self):
        g = build_el_grid(7)
        assert np.all(np.diff(g) > 0)
        assert g[0] == -1.0 and g[-1] == 1.0

    def test_polar_default_counts(self):
        geom = ArrayGeometry(4, 16, D, LAM)
        grid = PolarGrid.default(geom)
        assert grid.num_angles == 32
        assert grid.num_ranges == 20
        assert grid.num_columns == 640

    def test_inverse_range_endpoints(self):
        geom = ArrayGeometry(2, 8, D, LAM)
        grid = PolarGrid.default(geom, range_bounds=(5.0, 100.0))
        assert grid.inv_range[0] == pytest.approx(0.01)
        assert grid.inv_range[-1] == pytest.approx(0.2)
        assert np.all(np.diff(grid.inv_range) > 0)

    def test_column_bijection_roundtrip(self):
        geom = ArrayGeometry(2, 8, D, LAM)
        grid = PolarGrid.default(geom, angle_count=6, range_count=4)
        for col in range(grid.num_columns):
            a = col // 4
            r = col % 4
            assert grid.column_of(a, r) == col
            phi, inv_r = grid.params_of(col)
            assert phi == grid.az_cos[a]
            assert inv_r == grid.inv_range[r]

    def test_joint_bijection_roundtrip(self):
        geom = ArrayGeometry(2, 4, D, LAM)
        grid = JointGrid.default(geom, PolarGrid.default(geom, 4, 3))
        for col in range(grid.num_columns):
            el, phi, inv_r = grid.params_of(col)
            e = list(grid.el_cos).index(el)
            a = list(grid.polar.az_cos).index(phi)
            r = list(grid.polar.inv_range).index(inv_r)
            assert grid.column_of(e, a, r) == col


class TestAzDictionary:
    def test_two_far_field_columns(self):
        geom = ArrayGeometry(1, 8, D, LAM)
        grid = PolarGrid.angle_only(geom, angle_count=2)
        d = build_az_dictionary(geom, grid)
        assert d.matrix.shape == (8, 2)
        for k in range(2):
            phi, inv_r = grid.params_of(k)
            assert inv_r == 0.0
            np.testing.assert_allclose(
                d.matrix[:, k], steering_az(phi, np.inf, 8, D, LAM))

    def test_columns_unit_norm(self):
        geom = ArrayGeometry(2, 16, D, LAM)
        d = build_az_dictionary(geom, PolarGrid.default(geom, 8, 5))
        np.testing.assert_allclose(np.linalg.norm(d.matrix, axis=0), 1.0,
                                   atol=1e-12)

    def test_column_matches_direct_steering(self):
        geom = ArrayGeometry(1, 16, D, LAM)
        grid = PolarGrid.default(geom, angle_count=32, range_count=4,
                                 range_bounds=(5.0, 100.0))
        d = build_az_dictionary(geom, grid)
        # pick the column whose parameters are closest to (0.25, r=10)
        a = int(np.argmin(np.abs(grid.az_cos - 0.25)))
        r = int(np.argmin(np.abs(grid.inv_range - 0.1)))
        col = d.matrix[:, grid.column_of(a, r)]
        np.testing.assert_allclose(
            col, steering_az(float(grid.az_cos[a]), 1 / float(grid.inv_range[r]),
                             16, D, LAM))

    def test_angle_only_rows_orthogonal(self):
        # With half-wave spacing and a 2N-point half-open cosine grid, the
        # pure-angle dictionary satisfies B B^H = (columns/N) I.
        geom = ArrayGeometry(1, 16, D, LAM)
        d = build_az_dictionary(geom, PolarGrid.angle_only(geom))
        gram = d.matrix @ d.matrix.conj().T
        np.testing.assert_allclose(gram, 2.0 * np.eye(16), atol=1e-9)


class TestJointDictionary:
    def test_single_strip_reduces_to_az_dictionary(self):
        geom = ArrayGeometry(1, 8, D, LAM)
        polar = PolarGrid.default(geom, 4, 3)
        joint = build_joint_dictionary(geom, JointGrid.default(geom, polar))
        az = build_az_dictionary(geom, polar).matrix
        # elevation grid has 2 points but a scalar steering entry of 1
        np.testing.assert_allclose(joint[:, :polar.num_columns], az, atol=1e-12)
        np.testing.assert_allclose(joint[:, polar.num_columns:], az, atol=1e-12)

    def test_columns_unit_norm(self):
        geom = ArrayGeometry(2, 4, D, LAM)
        joint = build_joint_dictionary(geom, JointGrid.default(
            geom, PolarGrid.default(geom, 4, 2)))
        np.testing.assert_allclose(np.linalg.norm(joint, axis=0), 1.0, atol=1e-12)

    def test_oblong_columns_match_manifold_oracle(self):
        geom = ArrayGeometry(2, 4, D, LAM)
        grid = JointGrid.default(geom, PolarGrid.default(geom, 4, 2,
                                                         range_bounds=(2.0, 20.0)))
        lazy = JointDictionary(geom, grid)
        for k in range(grid.num_columns):
            el, phi, inv_r = grid.params_of(k)
            r = np.inf if inv_r == 0 else 1 / inv_r
            np.testing.assert_allclose(
                lazy.column(k), manifold_from_cosines(geom, el, phi, r, "oblong"),
                atol=1e-12)

    def test_spherical_atoms_differ_from_oblong(self):
        geom = ArrayGeometry(3, 8, D, LAM)
        grid = JointGrid.default(geom, PolarGrid.default(geom, 4, 2,
                                                         range_bounds=(2.0, 5.0)))
        ob = JointDictionary(geom, grid, atom_model="oblong")
        sp = JointDictionary(geom, grid, atom_model="spherical")
        k = grid.column_of(1, 1, 1)
        assert not np.allclose(ob.column(k), sp.column(k))

    def test_capacity_error_reports_bytes(self):
        geom = ArrayGeometry(2, 8, D, LAM)
        grid = JointGrid.default(geom, PolarGrid.default(geom, 8, 4))
        with pytest.raises(CapacityError) as err:
            build_joint_dictionary(geom, grid, memory_budget=1024)
        assert err.value.required_bytes == geom.size * grid.num_columns * 16
        assert err.value.budget_bytes == 1024

    def test_sensing_matrix_matches_dense_product(self):
        geom = ArrayGeometry(3, 8, D, LAM)
        grid = JointGrid.default(geom, PolarGrid.default(geom, 6, 3))
        rng = np.random.default_rng(8)
        w = (rng.standard_normal((3, 8, 5)) + 1j * rng.standard_normal((3, 8, 5)))
        for model in ("oblong", "spherical"):
            lazy = JointDictionary(geom, grid, atom_model=model)
            dense = lazy.materialize()
            expect = np.vstack([
                w[m].conj().T @ dense.reshape(3, 8, -1)[m] for m in range(3)])
            np.testing.assert_allclose(lazy.sensing_matrix(w), expect, atol=1e-11)
