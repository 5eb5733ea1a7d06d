"""Geometry tests: wavefront models, steering vectors, manifolds, derivatives."""

import numpy as np
import pytest

from xldma.geometry import (
    ArrayGeometry,
    SourceParams,
    beamforming_gain,
    element_distance,
    element_distances,
    manifold,
    steering_az,
    steering_az_derivatives,
    steering_az_inv,
    steering_el,
)

LAM = 0.0107
D = LAM / 2


def cartesian_distance_oracle(geom, src):
    """Element-to-source distances from raw coordinates, shape (M, N).

    Places the source on the unit sphere scaled by range (x component chosen
    nonnegative) and element (m, n) at (0, (n-1)d, (m-1)d); no Taylor algebra
    involved.
    """
    x_cos = np.sqrt(max(0.0, 1.0 - src.el_cos ** 2 - src.az_cos ** 2))
    s = src.range_m * np.array([x_cos, src.az_cos, src.el_cos])
    out = np.zeros((geom.num_strips, geom.elems_per_strip))
    for m in range(geom.num_strips):
        for n in range(geom.elems_per_strip):
            e = np.array([0.0, n * geom.spacing, m * geom.spacing])
            out[m, n] = np.linalg.norm(s - e)
    return out


def random_source(rng, r_lo=1.0, r_hi=100.0):
    while True:
        el, az = rng.uniform(-1, 1, size=2)
        if el * el + az * az <= 1.0:
            break
    return SourceParams(el, az, rng.uniform(r_lo, r_hi))


class TestElementDistance:
    def test_reference_element_is_exact_for_all_models(self):
        geom = ArrayGeometry(4, 16, D, LAM)
        src = SourceParams(0.3, -0.4, 3.0)
        for model in ("spherical", "taylor2", "oblong", "planar"):
            assert element_distance(geom, src, model, 1, 1) == 3.0

    def test_broadside_spherical(self):
        geom = ArrayGeometry(3, 5, D, LAM)
        src = SourceParams(0.0, 0.0, 3.0)
        for m in (1, 2, 3):
            for n in (1, 3, 5):
                expect = np.sqrt(3.0 ** 2 + ((n - 1) * D) ** 2 + ((m - 1) * D) ** 2)
                got = element_distance(geom, src, "spherical", m, n)
                assert got == pytest.approx(expect, rel=1e-14)

    def test_spherical_matches_cartesian_oracle(self):
        geom = ArrayGeometry(4, 8, D, LAM)
        rng = np.random.default_rng(7)
        for _ in range(20):
            src = random_source(rng)
            got = element_distances(geom, src, "spherical")
            want = cartesian_distance_oracle(geom, src)
            np.testing.assert_allclose(got, want, rtol=1e-12)

    def test_far_corner_model_gap(self):
        # 128x8 array, r=3, both cosines 0.25: at the far corner the planar
        # model is ~75 mm off the exact distance, the oblong model ~3 mm.
        geom = ArrayGeometry(8, 128, D, LAM)
        src = SourceParams(0.25, 0.25, 3.0)
        exact = element_distance(geom, src, "spherical", 8, 128)
        oblong = element_distance(geom, src, "oblong", 8, 128)
        planar = element_distance(geom, src, "planar", 8, 128)
        assert abs(planar - exact) > 10 * abs(oblong - exact)
        assert abs(planar - exact) == pytest.approx(0.075378, abs=1e-5)
        assert abs(oblong - exact) == pytest.approx(0.003245, abs=1e-5)

    def test_index_bounds(self):
        geom = ArrayGeometry(2, 4, D, LAM)
        src = SourceParams(0.0, 0.0, 5.0)
        with pytest.raises(IndexError):
            element_distance(geom, src, "spherical", 0, 1)
        with pytest.raises(IndexError):
            element_distance(geom, src, "spherical", 1, 5)

    def test_invalid_model_and_range(self):
        geom = ArrayGeometry(2, 4, D, LAM)
        with pytest.raises(ValueError):
            element_distances(geom, SourceParams(0.0, 0.0, 5.0), "cubic")
        with pytest.raises(ValueError):
            SourceParams(0.0, 0.0, -2.0)

    def test_taylor_error_vanishes_with_range(self):
        geom = ArrayGeometry(4, 32, D, LAM)
        errs = []
        for r in (2.0, 20.0, 200.0):
            src = SourceParams(0.2, 0.3, r)
            gap = np.max(np.abs(element_distances(geom, src, "spherical")
                                - element_distances(geom, src, "taylor2")))
            errs.append(gap)
        assert errs[0] > errs[1] > errs[2]

    def test_oblong_drops_more_than_taylor(self):
        geom = ArrayGeometry(6, 32, D, LAM)
        rng = np.random.default_rng(11)
        worse = 0
        total_tay = total_obl = 0.0
        for _ in range(200):
            src = random_source(rng, 2.0, 50.0)
            sph = element_distances(geom, src, "spherical")
            tay = np.mean(np.abs(sph - element_distances(geom, src, "taylor2")))
            obl = np.mean(np.abs(sph - element_distances(geom, src, "oblong")))
            total_tay += tay
            total_obl += obl
            if obl >= tay:
                worse += 1
        assert total_obl >= total_tay
        assert worse >= 180

    def test_planar_matches_spherical_in_deep_far_field(self):
        geom = ArrayGeometry(8, 128, D, LAM)
        src = SourceParams(0.25, 0.25, 1e6)
        gap = np.max(np.abs(element_distances(geom, src, "spherical")
                            - element_distances(geom, src, "planar")))
        assert gap < 1e-6


class TestSteeringVectors:
    def test_el_broadside_uniform(self):
        a = steering_el(0.0, 8, D, LAM)
        np.testing.assert_allclose(a, np.full(8, 1 / np.sqrt(8)), atol=1e-15)

    def test_el_single_strip(self):
        np.testing.assert_allclose(steering_el(0.0, 1, D, LAM), [1.0])

    def test_el_phase_progression(self):
        a = steering_el(0.5, 4, D, LAM)
        # half-wave spacing: entry m carries phase pi*(m-1)/2
        want = np.exp(1j * np.array([0, 1, 2, 3]) * np.pi / 2) / 2
        np.testing.assert_allclose(a, want, atol=1e-12)
        assert np.linalg.norm(a) == pytest.approx(1.0)

    def test_el_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            steering_el(1.2, 4, D, LAM)

    def test_az_far_field_limit(self):
        b = steering_az(0.3, np.inf, 16, D, LAM)
        u = np.arange(16) * D
        np.testing.assert_allclose(np.unwrap(np.angle(b)),
                                   2 * np.pi / LAM * u * 0.3, atol=1e-9)

    def test_az_edge_cosine_kills_curvature(self):
        for phi in (1.0, -1.0):
            near = steering_az(phi, 2.0, 16, D, LAM)
            far = steering_az(phi, np.inf, 16, D, LAM)
            np.testing.assert_allclose(near, far, atol=1e-12)

    def test_az_rejects_nonpositive_finite_range(self):
        with pytest.raises(ValueError):
            steering_az(0.2, 0.0, 8, D, LAM)
        with pytest.raises(ValueError):
            steering_az(0.2, -3.0, 8, D, LAM)

    def test_az_phase_matches_element_distance_oracle(self):
        # For the oblong model the strip-1 entry phase is -k*(r_(1,n) - r).
        geom = ArrayGeometry(1, 128, D, LAM)
        src = SourceParams(0.0, 0.25, 3.0)
        b = steering_az(0.25, 3.0, 128, D, LAM)
        deltas = element_distances(geom, src, "oblong")[0] - 3.0
        expect = np.exp(-1j * geom.wavenumber * deltas) / np.sqrt(128)
        np.testing.assert_allclose(b, expect, atol=1e-10)

    def test_inverse_range_form_identical(self):
        b1 = steering_az(0.4, 7.5, 32, D, LAM)
        b2 = steering_az_inv(0.4, 1 / 7.5, 32, D, LAM)
        np.testing.assert_allclose(b1, b2, rtol=0, atol=0)


class TestSteeringDerivatives:
    def test_first_entry_zero(self):
        d_az, d_r = steering_az_derivatives(0.3, 0.1, 8, D, LAM)
        assert d_az[0] == 0
        assert d_r[0] == 0

    def test_edge_cosine_zeroes_range_derivative(self):
        for phi in (1.0, -1.0):
            _, d_r = steering_az_derivatives(phi, 0.2, 8, D, LAM)
            np.testing.assert_allclose(d_r, 0, atol=1e-15)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        h = 1e-6
        for _ in range(25):
            phi = rng.uniform(-0.95, 0.95)
            inv_r = rng.uniform(0.01, 0.4)
            d_az, d_r = steering_az_derivatives(phi, inv_r, 8, D, LAM)
            fd_az = (steering_az_inv(phi + h, inv_r, 8, D, LAM)
                     - steering_az_inv(phi - h, inv_r, 8, D, LAM)) / (2 * h)
            fd_r = (steering_az_inv(phi, inv_r + h, 8, D, LAM)
                    - steering_az_inv(phi, inv_r - h, 8, D, LAM)) / (2 * h)
            assert np.linalg.norm(d_az - fd_az) < 1e-5 * np.linalg.norm(fd_az)
            assert np.linalg.norm(d_r - fd_r) < 1e-5 * np.linalg.norm(fd_r)


class TestManifold:
    def test_unit_norm(self):
        geom = ArrayGeometry(4, 16, D, LAM)
        rng = np.random.default_rng(5)
        for model in ("spherical", "taylor2", "oblong", "planar"):
            g = manifold(geom, random_source(rng), model)
            assert np.linalg.norm(g) == pytest.approx(1.0, abs=1e-12)

    def test_oblong_equals_kronecker_factorization(self):
        geom = ArrayGeometry(4, 16, D, LAM)
        rng = np.random.default_rng(9)
        for _ in range(50):
            src = random_source(rng)
            g = manifold(geom, src, "oblong")
            a = steering_el(src.el_cos, 4, D, LAM)
            b = steering_az(src.az_cos, src.range_m, 16, D, LAM)
            np.testing.assert_allclose(g, np.kron(a, b), atol=1e-12)

    def test_entrywise_loop_oracle(self):
        geom = ArrayGeometry(2, 3, D, LAM)
        src = SourceParams(0.35, -0.2, 4.0)
        k = geom.wavenumber
        for model in ("spherical", "taylor2", "oblong", "planar"):
            g = manifold(geom, src, model)
            for m in range(2):
                for n in range(3):
                    r_mn = element_distance(geom, src, model, m + 1, n + 1)
                    want = np.exp(-1j * k * (r_mn - src.range_m)) / np.sqrt(6)
                    assert g[m * 3 + n] == pytest.approx(want, abs=1e-12)


class TestBeamformingGain:
    def test_self_gain_is_one(self):
        geom = ArrayGeometry(4, 32, D, LAM)
        g = manifold(geom, SourceParams(0.25, 0.25, 8.0), "spherical")
        assert beamforming_gain(g, g) == pytest.approx(1.0)

    def test_orthogonal_vectors(self):
        e0 = np.zeros(4, dtype=complex)
        e1 = np.zeros(4, dtype=complex)
        e0[0] = 1.0
        e1[1] = 1.0
        assert beamforming_gain(e0, e1) == 0.0

    def test_symmetry(self):
        rng = np.random.default_rng(13)
        g1 = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        g2 = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        g1 /= np.linalg.norm(g1)
        g2 /= np.linalg.norm(g2)
        assert beamforming_gain(g1, g2) == pytest.approx(beamforming_gain(g2, g1))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            beamforming_gain(np.ones(3, dtype=complex), np.ones(4, dtype=complex))

    def test_oblong_recovers_with_distance_planar_does_not(self):
        # 128x8 array, both cosines 0.25: oblong-vs-spherical gain climbs
        # toward 1 past a few meters while planar stays poor below 50 m.
        geom = ArrayGeometry(8, 128, D, LAM)
        gains = {}
        for r in (5.0, 20.0, 49.0):
            src = SourceParams(0.25, 0.25, r)
            ref = manifold(geom, src, "spherical")
            gains[r] = (beamforming_gain(ref, manifold(geom, src, "oblong")),
                        beamforming_gain(ref, manifold(geom, src, "planar")))
        for r, (oblong, planar) in gains.items():
            assert oblong > 0.95
            assert planar < 0.8
