"""Tests for grids, sampled fields, weighted norms, derivatives and QBF-1 files."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from src.errors import FieldFormatError, GridSpecError, NonFiniteFieldError
from src.grid import (
    ComplexGrid,
    DiskGeometry,
    GridKind,
    QuasidiskGeometry,
    SampledField,
    WeightedNormSpec,
    disk_lattice,
    dz,
    dzbar,
    holomorphic_derivatives,
    lp_norm,
    make_grid,
    pullback_wirtinger,
    read_field,
    sample,
    strip_lattice,
    weighted_norm,
    write_field,
    zero_field,
)
from src.moebius import AffineParameterization, IdentityParameterization


class TestMakeGrid:
    """Tests for grid construction and validation."""

    def test_square_lattice_is_cell_centered(self):
        """Should place square-lattice nodes at cell centers."""
        grid = make_grid(GridKind.SQUARE, 16, (-1.0, 1.0))
        assert grid.extent == (-1.0, 1.0, -1.0, 1.0)
        assert grid.spacing == pytest.approx(0.125)
        assert grid.axis1[0] == pytest.approx(-1.0 + 0.0625)
        assert grid.nodes.shape == (256,)

    def test_row_major_node_order(self):
        """Should order nodes row-major with axis 0 as y."""
        grid = make_grid("square-lattice", 8, (0.0, 1.0))
        assert grid.nodes[1].real > grid.nodes[0].real
        assert grid.nodes[8].imag > grid.nodes[0].imag
        assert grid.nodes[1].imag == grid.nodes[0].imag

    @pytest.mark.parametrize("n", [4, 12, 100])
    def test_rejects_bad_square_size(self, n):
        """Should reject n below 8 or not a power of two."""
        with pytest.raises((GridSpecError, ValidationError)):
            make_grid(GridKind.SQUARE, n, (-1.0, 1.0))

    def test_rejects_non_square_box(self):
        """Should reject a rectangular box."""
        with pytest.raises((GridSpecError, ValidationError)):
            make_grid(GridKind.SQUARE, 16, (-1.0, 1.0, -2.0, 2.0))

    def test_polar_weights_integrate_area(self):
        """Should carry polar weights that sum to the disk area."""
        grid = make_grid(GridKind.POLAR, 32, 1.0)
        assert float(np.sum(grid.weights)) == pytest.approx(np.pi, rel=1e-12)

    def test_strip_lattice_has_square_cells(self):
        """Should give strip lattices equal spacing in xi and phi."""
        grid = strip_lattice(32)
        assert grid.kind == GridKind.STRIP
        assert grid.spacing == pytest.approx(grid.spacing_y)

    def test_disk_lattice_margin(self):
        """Should pad disk lattices beyond the unit circle."""
        grid = disk_lattice(32, margin=0.25)
        assert grid.extent == (-1.25, 1.25, -1.25, 1.25)
        with pytest.raises(GridSpecError):
            disk_lattice(32, margin=0.0)

    def test_polar_grid_has_no_ghost_cells(self):
        """Should refuse ghost extension of polar grids."""
        with pytest.raises(GridSpecError):
            make_grid(GridKind.POLAR, 16, 1.0).extended_node_array(2)

    def test_ghost_extension_keeps_interior(self):
        """Should keep interior nodes bit-identical under ghost extension."""
        grid = disk_lattice(16)
        ext = grid.extended_node_array(2)
        assert ext.shape == (20, 20)
        assert np.array_equal(ext[2:-2, 2:-2], grid.node_array)


class TestSampledField:
    """Tests for SampledField validation and arithmetic."""

    @pytest.fixture
    def grid(self):
        return disk_lattice(16)

    def test_rejects_non_finite_values(self, grid):
        """Should raise NonFiniteFieldError on NaN samples."""
        values = np.zeros(grid.node_count, dtype=complex)
        values[5] = np.nan
        with pytest.raises(NonFiniteFieldError) as exc:
            SampledField(grid, values, "mu")
        assert exc.value.count == 1
        assert exc.value.location == grid.nodes[5]

    def test_rejects_wrong_size(self, grid):
        """Should raise GridSpecError when the value count does not match."""
        with pytest.raises(GridSpecError):
            SampledField(grid, np.zeros(10))

    def test_values_are_read_only(self, grid):
        """Should freeze the value array."""
        field = zero_field(grid)
        with pytest.raises(ValueError):
            field.values[0] = 1.0

    def test_arithmetic(self, grid):
        """Should add and multiply pointwise and by scalars."""
        f = sample(lambda z: z, grid)
        g = 2.0 * f + f * f
        assert_allclose(g.values, 2.0 * grid.nodes + grid.nodes ** 2)

    def test_mixing_grids_is_an_error(self, grid):
        """Should refuse arithmetic between fields on different grids."""
        other = zero_field(disk_lattice(32))
        with pytest.raises(GridSpecError):
            zero_field(grid) + other

    def test_strip_sampling_records_wrap_defect(self):
        """Should record zero defect for periodic rules and a large one otherwise."""
        grid = strip_lattice(16)
        periodic = sample(lambda z: np.exp(1j * z.imag), grid)
        drifting = sample(lambda z: z, grid)
        assert periodic.wrap_defect < 1e-12
        assert drifting.wrap_defect == pytest.approx(2.0 * np.pi)

    def test_derived_fields_keep_wrap_defect(self):
        """Should carry the wrap defect through arithmetic and relabeling."""
        grid = strip_lattice(16)
        periodic = sample(lambda z: np.exp(1j * z.imag), grid)
        drifting = sample(lambda z: z, grid)
        assert drifting.with_values(drifting.values, "g").wrap_defect == drifting.wrap_defect
        assert (2.0 * drifting).wrap_defect == drifting.wrap_defect
        assert drifting.conj().wrap_defect == drifting.wrap_defect
        assert (periodic + drifting).wrap_defect == drifting.wrap_defect


class TestWeightedNorms:
    """Tests for weighted and plain Lp norms."""

    def test_disk_l2_of_one(self):
        """Should give sqrt(pi) for the constant 1 on a polar disk grid."""
        grid = make_grid(GridKind.POLAR, 32, 1.0)
        one = sample(lambda z: np.ones_like(z), grid)
        spec = WeightedNormSpec(p=2.0, geometry=DiskGeometry())
        assert weighted_norm(one, spec) == pytest.approx(np.sqrt(np.pi), rel=1e-12)

    def test_weighted_sup_norm(self):
        """Should weight the sup norm by the boundary distance."""
        grid = make_grid(GridKind.POLAR, 32, 1.0)
        one = sample(lambda z: np.ones_like(z), grid)
        spec = WeightedNormSpec(p=float("inf"), s=1.0, geometry=DiskGeometry())
        assert weighted_norm(one, spec) == pytest.approx(1.0 - 0.5 / 32)

    def test_rejects_p_below_one(self):
        """Should reject exponents p < 1."""
        with pytest.raises(ValidationError):
            WeightedNormSpec(p=0.5)

    def test_lp_norm_respects_mask(self):
        """Should only sum nodes inside the mask."""
        grid = disk_lattice(32)
        one = sample(lambda z: np.ones_like(z), grid)
        mask = np.zeros(grid.node_count, dtype=bool)
        mask[:10] = True
        expected = np.sqrt(10 * grid.spacing * grid.spacing_y)
        assert lp_norm(one, 2.0, mask) == pytest.approx(expected)
        assert lp_norm(one, 2.0, np.zeros(grid.node_count, dtype=bool)) == 0.0


class TestDerivatives:
    """Tests for lattice and Cauchy-circle derivatives."""

    @pytest.fixture
    def grid(self):
        return disk_lattice(32)

    def test_quadratic_is_differentiated_exactly(self, grid):
        """Should differentiate z^2 exactly, edges included."""
        f = sample(lambda z: z ** 2, grid)
        assert_allclose(dz(f).values, 2.0 * grid.nodes, atol=1e-11)
        assert_allclose(dzbar(f).values, 0.0, atol=1e-11)

    def test_modulus_squared(self, grid):
        """Should give conj(z) and z as the Wirtinger pair of |z|^2."""
        f = sample(lambda z: np.abs(z) ** 2, grid)
        assert_allclose(dz(f).values, np.conj(grid.nodes), atol=1e-11)
        assert_allclose(dzbar(f).values, grid.nodes, atol=1e-11)

    def test_mask_zeroes_outside(self, grid):
        """Should return zero outside the mask."""
        mask = np.abs(grid.nodes) < 0.5
        f = sample(lambda z: z ** 2, grid)
        out = dz(f, mask).values
        assert np.all(out[~mask] == 0)
        assert_allclose(out[mask], 2.0 * grid.nodes[mask], atol=1e-11)

    def test_holomorphic_derivatives_of_exp(self):
        """Should recover exp as its own first and second derivative."""
        z = np.array([0.0, 0.3 + 0.2j, -0.5j])
        first, second = holomorphic_derivatives(np.exp, z, order=2)
        assert_allclose(first, np.exp(z), rtol=1e-10)
        assert_allclose(second, np.exp(z), rtol=1e-8)

    def test_holomorphic_derivatives_need_positive_radius(self):
        """Should reject points on the unit circle with the default radius."""
        with pytest.raises(GridSpecError):
            holomorphic_derivatives(np.exp, np.array([1.0 + 0j]))

    def test_pullback_through_affine_map(self, grid):
        """Should recover f_w = 1, f_wbar = 0 for f(w) = w pulled back through an affine map."""
        param = AffineParameterization(0.3)
        f = sample(lambda z: param(z), grid)
        f_w, f_wb = pullback_wirtinger(f, param)
        assert_allclose(f_w.values, 1.0, atol=1e-11)
        assert_allclose(f_wb.values, 0.0, atol=1e-11)


class TestQuasidiskGeometry:
    """Tests for quasidisk boundary distances."""

    def test_identity_quasidisk_is_the_disk(self):
        """Should measure distance 1 from the origin of the identity quasidisk."""
        geometry = QuasidiskGeometry(IdentityParameterization())
        assert geometry.boundary_distance(np.array([0j]))[0] == pytest.approx(1.0)
        assert geometry.contains(np.array([0.5 + 0j, 1.5 + 0j])).tolist() == [True, False]

    def test_affine_weights_carry_jacobian(self):
        """Should scale the weights by 1 - |mu0|^2 for an affine quasidisk."""
        grid = disk_lattice(16)
        geometry = QuasidiskGeometry(AffineParameterization(0.5))
        weights, _, inside = geometry.measure(grid)
        assert_allclose(weights, grid.weights * 0.75)
        assert inside.sum() > 0


class TestFieldFiles:
    """Tests for QBF-1 reading and writing."""

    @pytest.fixture
    def field(self):
        grid = disk_lattice(16)
        return sample(lambda z: np.exp(z) / 3.0 + 1j / 7.0, grid, "f")

    def test_round_trip_is_bit_exact(self, field, tmp_path):
        """Should reproduce values bit-exactly after write and read."""
        path = write_field(field, tmp_path / "f.qbf", {"version": "0.1.0"})
        back = read_field(path)
        assert back.grid == field.grid
        assert back.label == "f"
        assert np.array_equal(back.values, field.values)

    def test_header_carries_provenance(self, field, tmp_path):
        """Should write provenance into the JSON header."""
        path = write_field(field, tmp_path / "f.qbf", {"config_hash": "abc"})
        header = json.loads(path.read_text().splitlines()[0])
        assert header["format"] == "QBF-1"
        assert header["provenance"] == {"config_hash": "abc"}

    def test_missing_file(self, tmp_path):
        """Should raise FileNotFoundError for a missing file."""
        with pytest.raises(FileNotFoundError):
            read_field(tmp_path / "missing.qbf")

    def test_malformed_header(self, tmp_path):
        """Should raise FieldFormatError when the header is not JSON."""
        path = tmp_path / "bad.qbf"
        path.write_text("not json\n0,0,0,0\n")
        with pytest.raises(FieldFormatError):
            read_field(path)

    def test_truncated_rows(self, field, tmp_path):
        """Should raise FieldFormatError when rows are missing."""
        path = write_field(field, tmp_path / "f.qbf")
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-3]) + "\n")
        with pytest.raises(FieldFormatError):
            read_field(path)

    def test_rejects_mismatched_nodes(self, field, tmp_path):
        """Should raise FieldFormatError when node coordinates disagree with the header."""
        path = write_field(field, tmp_path / "f.qbf")
        header, *rows = path.read_text().splitlines()
        meta = json.loads(header)
        meta["extent"] = [-2.0, 2.0, -2.0, 2.0]
        path.write_text(json.dumps(meta) + "\n" + "\n".join(rows) + "\n")
        with pytest.raises(FieldFormatError):
            read_field(path)

    def test_grid_declaration_is_validated(self, tmp_path):
        """Should raise FieldFormatError when the header declares an invalid grid."""
        path = tmp_path / "bad.qbf"
        path.write_text(json.dumps({"format": "QBF-1", "kind": "square-lattice", "n": 12, "extent": [-1, 1, -1, 1]}) + "\n")
        with pytest.raises(FieldFormatError):
            read_field(path)

    def test_complex_grid_equality(self):
        """Should compare grids by value."""
        assert ComplexGrid(kind="square-lattice", n=16, extent=(-1, 1, -1, 1)) == make_grid(GridKind.SQUARE, 16, (-1, 1))

    def test_equality_ignores_cached_arrays(self):
        """Should compare equal and hash alike whether or not node arrays were computed."""
        used = make_grid(GridKind.SQUARE, 16, (-1, 1))
        _ = used.nodes, used.weights, used.axis0
        fresh = make_grid(GridKind.SQUARE, 16, (-1, 1))
        assert used == fresh
        assert hash(used) == hash(fresh)
        assert used != make_grid(GridKind.SQUARE, 32, (-1, 1))

    def test_loaded_field_combines_with_sampled(self, field, tmp_path):
        """Should add a field read from disk to the field it was written from."""
        back = read_field(write_field(field, tmp_path / "f.qbf"))
        assert_allclose((field + back).values, 2.0 * field.values)
