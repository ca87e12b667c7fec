"""Tests for disk automorphisms, affine maps, parameterizations and reflection."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from src.errors import GridSpecError, ParameterRangeError, ReflectionError
from src.grid import PlaneGeometry, QuasidiskGeometry, disk_lattice, sample, strip_lattice, zero_field
from src.moebius import (
    AffineEllipseMap,
    AffineParameterization,
    DiskAutomorphism,
    IdentityParameterization,
    ReflectionMode,
    ReflectionRule,
    SampledParameterization,
    affine_forward,
    affine_inverse,
    apply_moebius,
    automorphism_gap_bound,
    automorphism_identity_gap,
    measure_sandwich,
    newton_inverse,
    reflect,
)


@pytest.fixture
def disk_points():
    rng = np.random.default_rng(3)
    r = 0.98 * np.sqrt(rng.random(200))
    return r * np.exp(2j * np.pi * rng.random(200))


class TestDiskAutomorphism:
    """Tests for the Moebius normalizer."""

    def test_sends_center_to_zero(self):
        """Should map w to 0."""
        aut = DiskAutomorphism(w=0.3 + 0.2j)
        assert abs(apply_moebius(aut, 0.3 + 0.2j)) < 1e-15

    def test_is_an_involution(self, disk_points):
        """Should be its own inverse."""
        aut = DiskAutomorphism(w=-0.4 + 0.5j)
        assert_allclose(apply_moebius(aut, apply_moebius(aut, disk_points)), disk_points, atol=1e-13)

    def test_preserves_the_disk(self, disk_points):
        """Should map D into D."""
        aut = DiskAutomorphism(w=0.7j)
        assert np.all(np.abs(apply_moebius(aut, disk_points)) < 1.0)

    def test_rejects_center_on_circle(self):
        """Should reject |w| >= 1."""
        with pytest.raises(ValidationError):
            DiskAutomorphism(w=1.0)

    def test_rejects_points_outside_closed_disk(self):
        """Should raise ParameterRangeError for |z| > 1."""
        with pytest.raises(ParameterRangeError):
            apply_moebius(DiskAutomorphism(w=0.1), np.array([1.5 + 0j]))

    def test_identity_gap_vanishes(self, disk_points):
        """Should satisfy the automorphism identity up to rounding."""
        w = disk_points[::-1]
        assert np.max(np.abs(automorphism_identity_gap(w, disk_points))) < 1e-13

    def test_gap_bound_holds(self, disk_points):
        """Should bound ||1 - conj(w)z| - |w - z|| from below."""
        left, right = automorphism_gap_bound(disk_points[::-1], disk_points)
        assert np.all(left >= right - 1e-14)

    def test_gap_bound_where_halving_fails(self):
        """Should hold for nearly antipodal points where half the product is too large."""
        w, z = np.array([0.9 + 0j]), np.array([-0.9 + 0j])
        left, right = automorphism_gap_bound(w, z)
        half_product = 0.5 * (1.0 - 0.81) ** 2
        assert left[0] < half_product
        assert left[0] >= right[0]


class TestAffineMaps:
    """Tests for affine ellipse maps and Newton inversion."""

    def test_inverse_undoes_forward(self, disk_points):
        """Should invert z + mu0 conj(z)."""
        amap = AffineEllipseMap(mu0=0.4 - 0.3j)
        assert_allclose(affine_inverse(amap, affine_forward(amap, disk_points)), disk_points, atol=1e-14)

    def test_dilatation(self):
        """Should report K = (1 + |mu0|)/(1 - |mu0|)."""
        assert AffineEllipseMap(mu0=0.5).dilatation == pytest.approx(3.0)

    def test_rejects_non_contracting(self):
        """Should reject |mu0| >= 1."""
        with pytest.raises(ValidationError):
            AffineEllipseMap(mu0=1.0j)

    def test_newton_inverse(self, disk_points):
        """Should solve g(z) = w for an affine parameterization."""
        param = AffineParameterization(0.3 + 0.1j)
        z = newton_inverse(param, param(disk_points))
        assert_allclose(z, disk_points, atol=1e-11)

    def test_sampled_parameterization_of_identity(self):
        """Should interpolate and invert a sampled identity mapping."""
        grid = disk_lattice(32)
        f = sample(lambda z: z, grid, "f")
        one = sample(lambda z: np.ones_like(z), grid)
        param = SampledParameterization(f, one, zero_field(grid))
        w = np.array([0.1 + 0.2j, -0.3j, 0.45])
        assert_allclose(param(w), w, atol=1e-5)
        assert_allclose(param.inverse(w), w, atol=1e-5)

    def test_sampled_parameterization_needs_square_lattice(self):
        """Should reject strip grids."""
        f = zero_field(strip_lattice(16))
        with pytest.raises(GridSpecError):
            SampledParameterization(f, f, f)


class TestReflection:
    """Tests for reflection across disk and quasidisk boundaries."""

    def test_disk_inversion(self):
        """Should reflect w to 1/conj(w)."""
        assert reflect(ReflectionRule.disk(), 0.5j) == pytest.approx(2.0j)

    def test_center_reflects_to_infinity(self):
        """Should send the center to infinity."""
        assert np.isinf(reflect(ReflectionRule.disk(), 0j))

    def test_boundary_point_is_an_error(self):
        """Should raise ReflectionError on the boundary."""
        with pytest.raises(ReflectionError):
            reflect(ReflectionRule.disk(), np.array([0.2, 1.0 + 0j]))

    def test_affine_pullback_is_exact(self, disk_points):
        """Should reflect g(z) to g(1/conj(z)) for an affine quasidisk."""
        param = AffineParameterization(0.3)
        rule = ReflectionRule.through(QuasidiskGeometry(param))
        z = disk_points[np.abs(disk_points) > 0.1]
        assert_allclose(reflect(rule, param(z)), param(1.0 / np.conj(z)), rtol=1e-10)

    def test_identity_pullback_matches_inversion(self, disk_points):
        """Should agree with disk inversion for the identity parameterization."""
        rule = ReflectionRule.through(QuasidiskGeometry(IdentityParameterization()))
        z = disk_points[np.abs(disk_points) > 0.1]
        assert_allclose(reflect(rule, z), 1.0 / np.conj(z), rtol=1e-12)

    def test_rule_consistency(self):
        """Should reject disk inversion on a non-disk geometry and pullback without a map."""
        with pytest.raises(ValidationError):
            ReflectionRule(geometry=PlaneGeometry(), mode=ReflectionMode.DISK_INVERSION)
        with pytest.raises(ValidationError):
            ReflectionRule(geometry=PlaneGeometry(), mode=ReflectionMode.PULLBACK)

    def test_sandwich_for_the_disk(self):
        """Should measure 1/|z| on the sampled annulus."""
        result = measure_sandwich(IdentityParameterization())
        assert result.holds
        assert result.lower == pytest.approx(1.0 / 0.95, rel=1e-12)
        assert result.upper == pytest.approx(2.0, rel=1e-12)

    def test_sandwich_for_an_ellipse(self):
        """Should give positive finite constants for an affine quasidisk."""
        result = measure_sandwich(AffineParameterization(0.3))
        assert result.holds
        assert 0.0 < result.lower <= result.upper < 10.0
