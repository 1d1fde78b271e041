"""
Tests for points of the symmetrized polydisc: symmetrization, fiber roots,
membership, rotations, Costara coefficients and scalar pencils
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.errors import InvalidArgumentError, InvalidDimensionError
from src.generators import _sample_roots, sample_gamma_point
from src.scalar_geometry import (
    AlphaGrid,
    GammaPoint,
    costara_coefficients,
    costara_membership,
    fiber_roots,
    gamma_membership_of_coordinates,
    membership,
    membership_report,
    rotate_point,
    scalar_pencil_factored,
    scalar_pencil_scan,
    scalar_pencil_value,
    symmetrize,
)


def point(*coords):
    return GammaPoint.from_coordinates(coords)


class TestSymmetrize:
    """Test cases for the symmetrization map"""

    @pytest.mark.unit
    def test_zero_roots_give_origin(self):
        """All-zero roots map to s = 0, p = 0"""
        assert_allclose(symmetrize(np.zeros(4)).coordinates, np.zeros(4))

    @pytest.mark.unit
    def test_binomial_coefficients(self):
        """(1, 1, 1) maps to (3, 3, 1)"""
        assert_allclose(symmetrize([1, 1, 1]).coordinates, [3, 3, 1])

    @pytest.mark.unit
    def test_conjugate_pair(self):
        """(i, -i) maps to (0, 1)"""
        assert_allclose(symmetrize([1j, -1j]).coordinates, [0, 1], atol=1e-15)

    @pytest.mark.unit
    def test_single_variable_rejected(self):
        """n < 2 is an invalid dimension"""
        with pytest.raises(InvalidDimensionError):
            symmetrize([0.5])

    @pytest.mark.unit
    def test_point_validation(self):
        """GammaPoint rejects wrong lengths and non-finite coordinates"""
        with pytest.raises(InvalidDimensionError):
            GammaPoint(n=3, s=[1.0], p=0.0)
        with pytest.raises(InvalidArgumentError):
            GammaPoint(n=2, s=[np.nan], p=0.0)

    @pytest.mark.unit
    def test_fiber_coefficients(self):
        """Fiber polynomial of (3, 3, 1) is z^3 - 3z^2 + 3z - 1"""
        assert_allclose(point(3, 3, 1).fiber_coefficients(), [1, -3, 3, -1])


class TestFiberRoots:
    """Test cases for fiber roots and the Vieta round trip"""

    @pytest.mark.unit
    def test_origin_has_zero_roots(self):
        """The origin has 0 as an n-fold root"""
        assert_allclose(fiber_roots(point(0, 0, 0)), np.zeros(3), atol=1e-12)

    @pytest.mark.unit
    def test_double_root_is_recovered(self):
        """(2, 1) has the double root 1"""
        assert_allclose(fiber_roots(point(2, 1)), [1, 1], atol=1e-12)

    @pytest.mark.unit
    def test_quadratic_moduli(self):
        """(1, 1/2) has two roots of modulus sqrt(1/2)"""
        assert_allclose(np.abs(fiber_roots(point(1, 0.5))), [np.sqrt(0.5)] * 2, atol=1e-12)

    @pytest.mark.unit
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_vieta_round_trip(self, n, rng):
        """symmetrize -> fiber_roots -> symmetrize reproduces the point"""
        for _ in range(50):
            p = sample_gamma_point(n, rng, "interior")
            again = symmetrize(fiber_roots(p))
            assert_allclose(again.coordinates, p.coordinates, rtol=1e-8, atol=1e-8)

    @pytest.mark.unit
    @pytest.mark.parametrize("delta", [2e-4, 5e-4, 1e-3])
    def test_close_simple_root_beside_double_root(self, delta):
        """Roots {1, 1, 1 + delta} are kept apart and the point is outside by delta"""
        verdict = membership(point(3 + delta, 3 + 2 * delta, 1 + delta))
        assert not verdict.inside
        assert verdict.max_root_modulus == pytest.approx(1 + delta, abs=1e-6)
        assert verdict.margin == pytest.approx(-delta, abs=1e-6)

    @pytest.mark.unit
    @pytest.mark.parametrize("delta", [2e-4, 5e-4, 1e-3])
    def test_close_simple_root_inside_double_root(self, delta):
        """Roots {1, 1, 1 - delta} come back without a round-trip failure"""
        p = point(3 - delta, 3 - 2 * delta, 1 - delta)
        assert_allclose(np.sort(np.abs(fiber_roots(p))), [1 - delta, 1, 1], atol=1e-6)
        assert membership(p, "closed", tol=1e-6).inside
        assert not membership(p, "boundary", tol=1e-6).inside


class TestMembership:
    """Test cases for membership in the closed set, open set and distinguished boundary"""

    @pytest.mark.unit
    def test_double_root_on_circle(self):
        """(2, 1) is in the closed set and the boundary, not the open set"""
        report = membership_report(point(2, 1))
        assert report["closed"].inside
        assert not report["open"].inside
        assert report["boundary"].inside

    @pytest.mark.unit
    def test_triple_root_on_circle(self):
        """(3, 3, 1) lies in the distinguished boundary"""
        assert membership(point(3, 3, 1), "boundary").inside

    @pytest.mark.unit
    def test_outside_point(self):
        """(3, 1) has a root (3 + sqrt 5)/2 outside the disc"""
        verdict = membership(point(3, 1), "closed")
        assert not verdict.inside
        assert verdict.max_root_modulus == pytest.approx((3 + np.sqrt(5)) / 2)
        assert verdict.margin < 0

    @pytest.mark.unit
    def test_margin_convention_for_boundary(self):
        """Boundary margin is tol minus the deviation of root moduli from 1"""
        verdict = membership(point(0, 0.25), "boundary", tol=1e-9)
        assert verdict.margin == pytest.approx(1e-9 - 0.5)

    @pytest.mark.unit
    def test_unknown_region(self):
        """Unknown region names are rejected"""
        with pytest.raises(InvalidArgumentError):
            membership(point(0, 0), "interior")

    @pytest.mark.unit
    def test_disc_membership_for_length_one(self):
        """A single coordinate is tested against the closed unit disc"""
        assert gamma_membership_of_coordinates([0.5j]).inside
        assert not gamma_membership_of_coordinates([1.1]).inside

    @pytest.mark.unit
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_generated_points(self, n, rng):
        """Interior samples are inside, boundary samples on bGamma, outside samples fail by delta/2"""
        for _ in range(50):
            assert membership(sample_gamma_point(n, rng, "interior")).inside
            boundary = sample_gamma_point(n, rng, "boundary")
            assert abs(abs(boundary.p) - 1.0) <= 1e-12
            assert membership(boundary, "boundary").inside
            roots, delta = _sample_roots(n, rng, "outside")
            verdict = membership(symmetrize(roots))
            assert not verdict.inside
            assert -verdict.margin >= delta / 2


class TestRotation:
    """Test cases for rotations by unimodular numbers"""

    @pytest.mark.unit
    def test_identity_rotation(self):
        """omega = 1 leaves the point unchanged"""
        assert_allclose(rotate_point(point(1, 0.5), 1.0).coordinates, [1, 0.5])

    @pytest.mark.unit
    def test_sign_flip(self):
        """(2, 1) rotated by -1 is (-2, 1)"""
        assert_allclose(rotate_point(point(2, 1), -1.0).coordinates, [-2, 1])

    @pytest.mark.unit
    def test_quarter_turn_stays_on_boundary(self):
        """(3, 3, 1) rotated by i is (3i, -3, -i), still in bGamma_3"""
        rotated = rotate_point(point(3, 3, 1), 1j)
        assert_allclose(rotated.coordinates, [3j, -3, -1j], atol=1e-14)
        assert membership(rotated, "boundary").inside

    @pytest.mark.unit
    def test_non_unimodular_rejected(self):
        """|omega| != 1 is an invalid argument"""
        with pytest.raises(InvalidArgumentError):
            rotate_point(point(0, 0), 0.5)

    @pytest.mark.unit
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_membership_is_rotation_invariant(self, n, rng):
        """Rotating a point never changes its closed-membership verdict"""
        for _ in range(20):
            mode = "interior" if rng.uniform() < 0.5 else "outside"
            p = sample_gamma_point(n, rng, mode)
            expected = membership(p).inside
            for omega in np.exp(2j * np.pi * rng.uniform(size=16)):
                assert membership(rotate_point(p, omega)).inside == expected


class TestCostara:
    """Test cases for Costara coefficients and the recursive membership test"""

    @pytest.mark.unit
    def test_example_coefficient(self):
        """(1, 1/2) gives c_1 = 2/3"""
        assert_allclose(costara_coefficients(point(1, 0.5)), [2 / 3])

    @pytest.mark.unit
    def test_origin(self):
        """The origin gives c = 0"""
        assert_allclose(costara_coefficients(point(0, 0)), [0])

    @pytest.mark.unit
    def test_three_variables(self):
        """s = (0, 0), p = 1/2 gives c = (0, 0)"""
        assert_allclose(costara_coefficients(point(0, 0, 0.5)), [0, 0])

    @pytest.mark.unit
    def test_unimodular_p_not_applicable(self):
        """|p| >= 1 returns None rather than failing"""
        assert costara_coefficients(point(2, 1)) is None
        assert costara_membership(point(2, 1))

    @pytest.mark.unit
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_agrees_with_root_test(self, n, rng):
        """Costara recursion and root location agree away from the boundary"""
        checked = 0
        while checked < 200:
            mode = "interior" if checked % 2 == 0 else "outside"
            p = sample_gamma_point(n, rng, mode)
            if abs(p.p) >= 1.0:
                continue
            verdict = membership(p)
            if abs(verdict.margin) > 1e-6:
                assert costara_membership(p) == verdict.inside
            checked += 1


class TestScalarPencil:
    """Test cases for scalar pencils and their scans"""

    @pytest.mark.unit
    def test_origin_value(self):
        """At the origin the pencil equals n^2"""
        assert scalar_pencil_value(point(0, 0, 0), 1) == pytest.approx(9.0)

    @pytest.mark.unit
    def test_boundary_point_vanishes(self):
        """(3, 3, 1) with i = 1 gives 0"""
        assert scalar_pencil_value(point(3, 3, 1), 1) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.unit
    def test_direct_substitution(self):
        """(0, 1/2) with i = 1 gives 4 (1 - 1/4) = 3"""
        assert scalar_pencil_value(point(0, 0.5), 1) == pytest.approx(3.0)

    @pytest.mark.unit
    def test_index_out_of_range(self):
        """i must lie in 1..n-1"""
        with pytest.raises(InvalidArgumentError):
            scalar_pencil_value(point(0, 0), 2)

    @pytest.mark.unit
    def test_factored_matches_expanded(self, rng):
        """|n - s_i|^2 - |n p - s_{n-i}|^2 equals the expanded pencil"""
        for n in (2, 3, 4):
            for _ in range(30):
                coords = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                p = GammaPoint.from_coordinates(coords)
                for i in range(1, n):
                    expected = scalar_pencil_value(p, i)
                    assert scalar_pencil_factored(p, i) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    @pytest.mark.unit
    def test_scan_of_origin(self, small_grid):
        """The scan minimum at the origin is n^2"""
        report = scalar_pencil_scan(point(0, 0, 0), small_grid)
        assert report.minimum == pytest.approx(9.0)
        assert report.disagreements == 0

    @pytest.mark.unit
    def test_outside_point_has_negative_value(self):
        """(3, 1) produces a negative pencil value on the default grid"""
        assert scalar_pencil_scan(point(3, 1)).minimum < 0

    @pytest.mark.unit
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_forward_direction(self, n, rng, small_grid):
        """Interior points never push the certified pencils below -1e-10"""
        for _ in range(40):
            report = scalar_pencil_scan(sample_gamma_point(n, rng, "interior"), small_grid)
            assert report.certified_minimum >= -1e-10

    @pytest.mark.unit
    def test_middle_pencil_can_be_negative_inside(self):
        """For n = 4 the i = 2 pencil is negative at (4, 6, 4, 1), alpha = 1/sqrt 2"""
        p = point(4, 6, 4, 1)
        scaled = GammaPoint.from_coordinates(p.coordinates * (1 / np.sqrt(2)) ** np.arange(1, 5))
        assert scalar_pencil_value(scaled, 2) == pytest.approx(-3.0)
        assert membership(p).inside

    @pytest.mark.unit
    def test_rows_cover_every_index_and_alpha(self, small_grid):
        """rows() yields one row per (i, alpha)"""
        report = scalar_pencil_scan(point(0.5, 0.1, 0.2), small_grid)
        rows = list(report.rows())
        assert len(rows) == 2 * small_grid.samples().shape[0]
        assert {r[0] for r in rows} == {1, 2}


class TestAlphaGrid:
    """Test cases for the alpha grid"""

    @pytest.mark.unit
    def test_default_size(self):
        """Seven interior rings of 256 plus 1024 points on the circle"""
        assert AlphaGrid().samples().shape == (7 * 256 + 1024,)

    @pytest.mark.unit
    def test_samples_lie_in_closed_disc(self, small_grid):
        """Every sample satisfies |alpha| <= 1"""
        assert np.all(np.abs(small_grid.samples()) <= 1.0 + 1e-15)

    @pytest.mark.unit
    def test_invalid_radius(self):
        """Radii outside [0, 1] are rejected"""
        with pytest.raises(InvalidArgumentError):
            AlphaGrid(radii=(0.5, 1.5))

    @pytest.mark.unit
    def test_densified(self, small_grid):
        """densified(4) multiplies rings and angles by four"""
        dense = small_grid.densified(4)
        assert len(dense.radii) == 16
        assert dense.angles_per_ring == 128
        assert dense.boundary_angles == 512
