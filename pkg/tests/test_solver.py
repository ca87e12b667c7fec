"""Tests for the Beltrami solvers."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.errors import ConvergenceError, DegenerateDerivativeError, GridSpecError, ParameterRangeError, SupportError
from src.grid import GridKind, SampledField, disk_lattice, lattice_interior, make_grid, sample, strip_lattice, zero_field
from src.grid.derivatives import wirtinger
from src.solver import (
    BeltramiCoefficient,
    MappingKind,
    QcMapping,
    chain_coefficients,
    derivative_chain_solve,
    injectivity_sample,
    log_chart_to_plane,
    neumann_series,
    normal_solution,
    plane_coefficient,
    principal_log_solution,
    principal_solution,
    reconstruct_map,
    solve_inhomogeneous,
    univalence_margin,
    univalence_profile,
)
from src.solver.normal import interpolate
from src.transforms import cauchy
from src.verify.checks import cap, chain_coefficient, log_coefficient, radial_coefficient


class TestNeumannSeries:
    """Tests for the fixed-point iteration h = rhs + K h."""

    @pytest.fixture
    def one(self):
        grid = make_grid(GridKind.SQUARE, 16, (-1.0, 1.0))
        return SampledField(grid, np.ones(grid.node_count), "one")

    def test_contraction_converges(self, one):
        """Should sum the geometric series of a contraction."""
        h, diag = neumann_series(lambda x: 0.5 * x, one, "test")
        assert_allclose(h.values, 2.0, rtol=1e-9)
        assert diag.contraction_ratio == pytest.approx(0.5)

    def test_expansion_diverges(self, one):
        """Should raise ConvergenceError when increments grow."""
        with pytest.raises(ConvergenceError):
            neumann_series(lambda x: 1.5 * x, one, "test")

    def test_zero_rhs_returns_immediately(self, one):
        """Should return zero without iterating."""
        h, diag = neumann_series(lambda x: 0.5 * x, zero_field(one.grid), "test")
        assert not np.any(h.values)
        assert diag.iterations == 0

    def test_inhomogeneous_without_coefficient_is_cauchy(self):
        """Should reduce to the Cauchy transform when mu = 0."""
        grid = make_grid(GridKind.SQUARE, 32, (-2.0, 2.0))
        phi = sample(lambda z: cap(z, 0.8), grid, "phi")
        sigma = solve_inhomogeneous(zero_field(grid), phi)
        assert_allclose(sigma.values, cauchy(phi).values, atol=1e-12)


class TestPrincipalSolution:
    """Tests for principal solutions on the plane."""

    def test_disk_closed_form(self):
        """Should reproduce z + 0.5 conj(z) inside D and z + 0.5/z outside."""
        grid = make_grid(GridKind.SQUARE, 128, (-2.0, 2.0))
        mu = sample(lambda z: 0.5 * (np.abs(z) < 1.0), grid, "mu")
        mapping = principal_solution(mu)
        z, h = grid.nodes, grid.spacing
        expected = np.where(np.abs(z) < 1.0, z + 0.5 * np.conj(z), z + 0.5 / z)
        away = np.abs(np.abs(z) - 1.0) > 4.0 * h
        assert np.max(np.abs(mapping.f.values - expected)[away]) <= 5.0 * h
        assert np.min(mapping.jacobian()[away]) > 0
        assert mapping.kind == MappingKind.PRINCIPAL

    def test_zero_coefficient_is_identity(self):
        """Should return f = z with f_z = 1."""
        grid = make_grid(GridKind.SQUARE, 16, (-2.0, 2.0))
        mapping = principal_solution(zero_field(grid))
        assert_allclose(mapping.f.values, grid.nodes)
        assert_allclose(mapping.fz.values, 1.0)

    def test_exponential_mode_agrees(self):
        """Should give the same map through sigma = log f_z."""
        grid = make_grid(GridKind.SQUARE, 64, (-2.0, 2.0))
        mu = sample(lambda z: 0.3 * cap(z), grid, "mu")
        plain = principal_solution(mu)
        exp = principal_solution(mu, exponential=True)
        assert np.max(np.abs(plain.f.values - exp.f.values)) < 1e-2
        assert exp.diagnostics.extra["exp_consistency"] < 1e-2
        assert exp.diagnostics.extra["min_abs_fz"] > 0

    def test_smooth_residual_is_small(self):
        """Should report a small finite-difference Beltrami residual for a smooth coefficient."""
        grid = make_grid(GridKind.SQUARE, 64, (-2.0, 2.0))
        mapping = principal_solution(sample(lambda z: 0.3 * cap(z), grid, "mu"))
        assert mapping.diagnostics.residual < 5e-2

    def test_residual_ignores_stored_derivatives(self):
        """Should measure the residual from f itself, not from the stored f_z and f_zbar."""
        grid = make_grid(GridKind.SQUARE, 32, (-2.0, 2.0))
        z = grid.nodes
        # stored derivatives claim a conformal map; f is affine with dilatation 0.2
        mapping = QcMapping(
            f=SampledField(grid, z + 0.2 * np.conj(z), "f"),
            fz=SampledField(grid, np.ones(grid.node_count), "f_z"),
            fzbar=zero_field(grid),
            kind=MappingKind.PRINCIPAL,
        )
        residual = mapping.beltrami_residual(zero_field(grid), lattice_interior(grid))
        assert residual == pytest.approx(0.2, rel=1e-6)


class TestNormalSolution:
    """Tests for normal solutions on the unit disk."""

    def test_radial_closed_form(self):
        """Should reproduce z |z|^0.5 for mu = 0.2 z/conj(z)."""
        grid = disk_lattice(64)
        mu = BeltramiCoefficient.from_rule(radial_coefficient, grid, d=0.2)
        mapping = normal_solution(mu, rule=radial_coefficient)
        z, h = grid.nodes, grid.spacing
        interior = np.abs(z) <= 1.0 - 4.0 * h
        expected = z * np.abs(z) ** 0.5
        assert np.max(np.abs(mapping.f.values - expected)[interior]) <= 10.0 * h
        assert abs(interpolate(mapping.f.values, grid, np.array([0j]))[0]) <= 10.0 * h
        assert abs(interpolate(mapping.f.values, grid, np.array([1.0 + 0j]))[0] - 1.0) <= 10.0 * h
        assert np.max(np.abs(mapping.f.values[np.abs(z) < 1.0])) <= 1.0 + 10.0 * h
        assert mapping.kind == MappingKind.NORMAL

    def test_zero_coefficient_is_identity(self):
        """Should return the identity without solving."""
        grid = disk_lattice(16)
        mapping = normal_solution(zero_field(grid))
        assert_allclose(mapping.f.values, grid.nodes)

    def test_needs_square_output_grid(self):
        """Should reject strip output grids."""
        with pytest.raises(GridSpecError):
            normal_solution(zero_field(disk_lattice(16)), grid=strip_lattice(16))


class TestLogarithmicSolution:
    """Tests for principal logarithmic solutions on the strip."""

    def test_deviation_scales_quadratically(self):
        """Should grow roughly fourfold when c doubles."""
        grid = strip_lattice(64)
        deviation = {
            c: principal_log_solution(sample(log_coefficient(c), grid, "nu")).diagnostics.extra["sup_deviation"]
            for c in (0.1, 0.2)
        }
        assert 2.0 <= deviation[0.2] / deviation[0.1] <= 8.0

    def test_records_support_constants(self):
        """Should report c = max |e^(-xi) nu| and d = max |nu|."""
        grid = strip_lattice(32)
        mapping = principal_log_solution(sample(log_coefficient(0.1), grid, "nu"))
        assert mapping.diagnostics.extra["c"] == pytest.approx(0.1, rel=1e-6)
        assert mapping.kind == MappingKind.LOG_PRINCIPAL

    def test_plane_conjugation(self):
        """Should agree with the plane principal solution of nu(log z) z/conj(z) on 0.2 <= |z| <= 0.8."""
        rule = log_coefficient(0.1)
        strip_map = principal_log_solution(sample(rule, strip_lattice(64), "nu"))
        grid = make_grid(GridKind.SQUARE, 64, (-2.0, 2.0))
        plane = principal_solution(sample(lambda z: plane_coefficient(rule, z), grid, "mu"))
        z = grid.nodes
        band = (np.abs(z) >= 0.2) & (np.abs(z) <= 0.8)
        expected = plane.f.values[band] - interpolate(plane.f.values, grid, np.array([0j]))[0]
        error = np.max(np.abs(log_chart_to_plane(strip_map, z[band]) - expected))
        assert error <= 10.0 * grid.spacing

    def test_plane_coefficient_keeps_modulus(self):
        """Should carry |nu(log z)| over to the plane and vanish at the origin."""
        z = np.array([0j, 0.5, 0.3 + 0.4j, -0.1j])
        mu = plane_coefficient(log_coefficient(0.1), z)
        assert mu[0] == 0
        assert_allclose(np.abs(mu[1:]), np.abs(log_coefficient(0.1)(np.log(z[1:]))))

    def test_needs_strip_grid(self):
        """Should reject square lattices."""
        with pytest.raises(GridSpecError):
            principal_log_solution(zero_field(disk_lattice(16)))

    def test_rejects_support_at_right_end(self):
        """Should raise SupportError when nu reaches the right end of the strip."""
        nu = sample(lambda z: 0.1 * np.ones_like(z), strip_lattice(16), "nu")
        with pytest.raises(SupportError):
            principal_log_solution(nu)


class TestDerivativeChain:
    """Tests for the logarithmic-derivative chain and map reconstruction."""

    def test_chain_coefficients(self):
        """Should follow n_{k,i} = [i = 1] + n_{k-1,i-1} + n_{k-1,i}."""
        table = chain_coefficients(3)
        assert table[1] == {1: 1}
        assert table[2] == {1: 2, 2: 1}
        assert table[3] == {1: 3, 2: 3, 3: 1}

    @pytest.mark.parametrize("k, m", [(0, 8), (1, 7), (2, 8)])
    def test_rejects_orders(self, k, m):
        """Should require k >= 1 and m >= k + 7."""
        mu = zero_field(disk_lattice(16))
        with pytest.raises(ParameterRangeError):
            derivative_chain_solve(mu, k=k, m=m)

    def test_rejects_large_coefficients(self):
        """Should refuse coefficients above the smallness threshold."""
        grid = disk_lattice(32)
        mu = BeltramiCoefficient.from_rule(lambda z: 0.5 * cap(z), grid, d=0.5)
        with pytest.raises(ParameterRangeError):
            derivative_chain_solve(mu, k=1, m=8)

    def test_pipeline_gives_univalent_map(self):
        """Should rebuild a map with small residuals and margin below 1/2."""
        grid = disk_lattice(64)
        mu = BeltramiCoefficient.from_rule(chain_coefficient, grid, d=0.03)
        chain = derivative_chain_solve(mu, k=1, m=8)
        mapping = reconstruct_map(chain, mu)
        assert chain.residuals[0] <= 1e-2
        assert mapping.diagnostics.extra["path_discrepancy"] <= 1e-2
        assert univalence_margin(mapping) <= 0.5
        assert injectivity_sample(mapping, pairs=2000, seed=1).holds

    def test_records_decay_constant(self):
        """Should report sup |f_1| dist for each level."""
        grid = disk_lattice(64)
        mu = BeltramiCoefficient.from_rule(chain_coefficient, grid, d=0.03)
        chain = derivative_chain_solve(mu, k=1, m=8)
        assert 0.0 < chain.diagnostics.extra["decay_1"] < 1.0

    def test_first_level_matches_principal_solution(self):
        """Should agree with F_ww/F_w of an independent principal solution within 20h on |z| <= 0.8."""
        grid = disk_lattice(64)
        mu = BeltramiCoefficient.from_rule(chain_coefficient, grid, d=0.03)
        chain = derivative_chain_solve(mu, k=1, m=8)
        principal = principal_solution(mu)
        fz_w, _ = wirtinger(principal.fz)
        oracle = fz_w.values / principal.fz.values
        inner = np.abs(grid.nodes) <= 0.8
        error = np.max(np.abs(chain.level(1).values - oracle)[inner])
        assert error <= 20.0 * grid.spacing


class TestUnivalence:
    """Tests for univalence margins."""

    def test_identity_has_zero_margin(self):
        """Should report 0 for h(z) = z."""
        assert univalence_margin(lambda z: z) == pytest.approx(0.0, abs=1e-10)

    def test_quadratic_margin(self):
        """Should approach 2a for h(z) = z + a z^2 near the origin."""
        assert univalence_margin(lambda z: z + 0.1 * z**2) == pytest.approx(0.2, abs=5e-3)

    def test_constant_is_degenerate(self):
        """Should raise DegenerateDerivativeError when h' vanishes."""
        with pytest.raises(DegenerateDerivativeError):
            univalence_margin(lambda z: np.ones_like(z))

    def test_koebe_margin_tends_to_three(self):
        """Should approach 3 near z = 1 and fail the criterion for the Koebe function."""
        margin = univalence_margin(lambda z: z / (1.0 - z) ** 2)
        assert margin == pytest.approx(3.0, abs=0.15)
        assert margin > 1.0

    def test_profile_peaks_at_the_rim(self):
        """Should report ring maxima that grow towards the boundary for the Koebe function."""
        radii, profile = univalence_profile(lambda z: z / (1.0 - z) ** 2, rings=8)
        assert radii.shape == profile.shape == (8,)
        assert int(np.argmax(profile)) == 7
        assert profile[-1] == pytest.approx(univalence_margin(lambda z: z / (1.0 - z) ** 2))
