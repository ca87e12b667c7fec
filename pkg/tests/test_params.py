"""Tests for parameter-dependent families, mollification and Holder measurements."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from src.errors import CertificateViolationError, FieldFormatError, InsufficientResolutionError, ParameterRangeError
from src.params import (
    BUMPS,
    FamilySpec,
    MollifierSchedule,
    holder_modulus,
    ladder,
    load_family,
    mollify_family,
    parse_family,
)
from src.params.expressions import Term


def linear_family(**overrides) -> FamilySpec:
    options = dict(
        rule=lambda z, t: 0.3 * t[..., 0] * BUMPS["taper"](z),
        box=[(0.0, 0.5)],
        d=0.15,
        label="linear-taper",
    )
    options.update(overrides)
    return FamilySpec(**options)


@pytest.fixture
def points():
    rng = np.random.default_rng(5)
    return 0.9 * np.sqrt(rng.random(40)) * np.exp(2j * np.pi * rng.random(40))


class TestExpressions:
    """Tests for family.json terms and documents."""

    @pytest.fixture
    def document(self):
        return {
            "label": "demo",
            "box": [[0.0, 0.5]],
            "d": 0.15,
            "terms": [{"coef": [0.3, 0.0], "t": [1], "bump": "taper"}],
        }

    def test_term_evaluates_monomial(self, points):
        """Should multiply coef z^a conj(z)^b t^e and the bumps."""
        term = Term(coef=[0.0, 2.0], z=1, zbar=2, t=[1], bump=["taper"])
        t = np.full(points.shape + (1,), 0.4)
        expected = 2j * points * np.conj(points) ** 2 * 0.4 * (1 - np.abs(points) ** 2)
        assert_allclose(term.evaluate(points, t), expected)

    def test_term_rejects_unknown_bump(self):
        """Should reject bump names outside the catalogue."""
        with pytest.raises(ValidationError):
            Term(coef=1.0, bump="square")

    def test_term_rejects_bad_pair(self):
        """Should reject coefficient lists that are not pairs."""
        with pytest.raises(ValidationError):
            Term(coef=[1.0, 2.0, 3.0])

    def test_parse_family(self, document, points):
        """Should compile the terms into a working rule."""
        family = parse_family(document)
        expected = linear_family().evaluate(points, [0.25])
        assert family.label == "demo"
        assert_allclose(family.evaluate(points, [0.25]), expected)

    def test_parse_rejects_extra_parameters(self, document):
        """Should refuse terms that use undeclared parameters."""
        document["terms"][0]["t"] = [1, 1]
        with pytest.raises(ParameterRangeError):
            parse_family(document)

    def test_parse_rejects_invalid_document(self, document):
        """Should wrap schema errors in ParameterRangeError."""
        del document["d"]
        with pytest.raises(ParameterRangeError):
            parse_family(document)

    def test_load_family(self, document, tmp_path):
        """Should read a family from disk."""
        path = tmp_path / "family.json"
        path.write_text(json.dumps(document))
        assert load_family(path).dim == 1

    def test_load_missing_file(self, tmp_path):
        """Should raise FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_family(tmp_path / "absent.json")

    def test_load_invalid_json(self, tmp_path):
        """Should raise FieldFormatError for malformed JSON."""
        path = tmp_path / "family.json"
        path.write_text("{not json")
        with pytest.raises(FieldFormatError):
            load_family(path)


class TestFamilySpec:
    """Tests for family certificates."""

    def test_box_dimension(self):
        """Should accept 1 to 4 parameters only."""
        with pytest.raises(ValidationError):
            linear_family(box=[(0.0, 1.0)] * 5)
        with pytest.raises(ValidationError):
            linear_family(box=[(1.0, 0.0)])

    def test_sup_certificate_below_one(self):
        """Should reject d >= 1."""
        with pytest.raises(ValidationError):
            linear_family(d=1.0)

    def test_spot_check_catches_false_sup(self):
        """Should detect a sup certificate the rule exceeds."""
        with pytest.raises(ValidationError):
            linear_family(d=0.01)

    def test_spot_check_catches_false_growth(self):
        """Should detect a z-derivative certificate the rule exceeds."""
        with pytest.raises(ValidationError):
            linear_family(growth=[(1, 1e-6)])

    def test_geometry_of_the_box(self):
        """Should expose the center and clamp into the box."""
        family = linear_family()
        assert family.center.tolist() == [0.25]
        assert family.clamp(np.array([0.9])).tolist() == [0.5]


class TestMollifier:
    """Tests for cap-kernel smoothing in the parameter."""

    @pytest.fixture
    def schedule(self):
        return MollifierSchedule(b=1.0)

    def test_kernel_is_a_probability(self, schedule):
        """Should give unit mass, nodes in the ball and zero mean."""
        nodes, weights = schedule.kernel(2)
        assert weights.sum() == pytest.approx(1.0)
        assert np.all(np.sum(nodes**2, axis=1) < 1.0)
        assert_allclose(weights @ nodes, 0.0, atol=1e-14)

    def test_radius_rule(self, schedule):
        """Should be capped at delta_max and vanish at the circle."""
        large = MollifierSchedule(b=100.0)
        assert large.radius(np.array([0j]))[0] == pytest.approx(large.delta_max)
        assert schedule.radius(np.array([1.0 + 0j]))[0] == 0.0
        assert schedule.radius(np.array([0.5 + 0j]), order_m=1)[0] < schedule.radius(np.array([0.5 + 0j]))[0]

    def test_linear_dependence_is_preserved(self, schedule, points):
        """Should leave a family linear in t unchanged away from the box edges."""
        family = linear_family()
        smooth = mollify_family(family, schedule)
        assert_allclose(smooth.evaluate(points, [0.25]), family.evaluate(points, [0.25]), atol=1e-12)

    def test_keeps_sup_and_drops_derivative_certificates(self, schedule):
        """Should keep d and drop growth certificates."""
        smooth = mollify_family(linear_family(growth=[(1, 1.0)]), schedule)
        assert smooth.d == 0.15
        assert smooth.growth == []
        assert smooth.label == "linear-taper-mollified"

    def test_negative_order(self, schedule):
        """Should reject negative derivative orders."""
        with pytest.raises(ParameterRangeError):
            mollify_family(linear_family(), schedule, order_m=-1)

    def test_radius_below_resolution(self):
        """Should raise InsufficientResolutionError when delta is under the t-spacing."""
        with pytest.raises(InsufficientResolutionError):
            mollify_family(linear_family(), MollifierSchedule(b=1e-3), probes=[0.5])

    def test_records_parameter_slope(self, schedule):
        """Should report the finite-difference t-slope below its limit."""
        smooth = mollify_family(linear_family(), schedule)
        diagnostics = smooth.diagnostics
        assert set(diagnostics) == {"param_slope", "param_slope_limit", "min_radius"}
        assert diagnostics["param_slope"] == pytest.approx(0.3, rel=1e-3)
        assert diagnostics["param_slope"] <= diagnostics["param_slope_limit"]

    def test_unbounded_slope_is_rejected(self, schedule):
        """Should raise CertificateViolationError when the smoothed family still oscillates in t."""
        family = linear_family(
            rule=lambda z, t: 0.1 * np.sin(t[..., 0] / 1e-4) * BUMPS["taper"](z),
            box=[(0.0, 1.0)],
            d=0.1,
        )
        with pytest.raises(CertificateViolationError):
            mollify_family(family, schedule)

    def test_stays_within_b_of_the_family(self, schedule):
        """Should move values at |z| = 0.5 by at most b over 100 random parameters."""
        family = linear_family(rule=lambda z, t: 0.3 * np.sin(4.0 * t[..., 0]) * BUMPS["taper"](z), d=0.3)
        smooth = mollify_family(family, schedule)
        rng = np.random.default_rng(11)
        z = np.array([0.5 * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))])
        gaps = [
            float(np.abs(smooth.evaluate(z, [t]) - family.evaluate(z, [t]))[0])
            for t in rng.uniform(0.0, 0.5, size=100)
        ]
        assert max(gaps) <= schedule.b

    def test_commutes_with_conjugation(self, schedule, points):
        """Should give the conjugate of the smoothed family when smoothing the conjugate family."""
        rule = lambda z, t: 0.3 * t[..., 0] * (1.0 + 0.5j * z) * BUMPS["taper"](z)
        family = linear_family(rule=rule, d=0.25)
        conjugate = linear_family(rule=lambda z, t: np.conj(rule(z, t)), d=0.25)
        t = [0.05]
        assert_allclose(
            mollify_family(conjugate, schedule).evaluate(points, t),
            np.conj(mollify_family(family, schedule).evaluate(points, t)),
            atol=1e-14,
        )


class TestHolderModulus:
    """Tests for the measured Holder exponent."""

    def test_ladder_halves(self):
        """Should halve the step at each rung."""
        assert ladder(0.2, 4) == pytest.approx([0.2, 0.1, 0.05, 0.025])

    def test_rejects_derivative_order(self):
        """Should accept k in 0..2 only."""
        with pytest.raises(ParameterRangeError):
            holder_modulus(linear_family(), 3, [0j])

    def test_constant_family_saturates(self):
        """Should report no exponent when every difference is at the noise floor."""
        family = linear_family(rule=lambda z, t: np.zeros(z.shape), d=0.0)
        beta, table = holder_modulus(family, 0, [0j, 0.5], delta_ladder=[0.2, 0.1], n=16)
        assert beta is None
        assert table.saturated
        assert len(table.rows) == 4

    def test_linear_family_is_lipschitz(self):
        """Should measure a slope near 1 for a family linear in t."""
        beta, table = holder_modulus(linear_family(), 0, [0.0, 0.5], delta_ladder=[0.2, 0.1, 0.05], n=32)
        assert beta is not None
        assert 0.5 < beta <= 1.0
        assert all(fit.r_squared >= 0.9 for fit in table.fits if fit.r_squared is not None)
