"""Tests for the quasibel command line and file renderings."""

import csv
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.cli import HeatScale, build_parser, graymap, gridlines, main
from src.cli.main import EXIT_OK, EXIT_USAGE, parse_probes
from src.errors import ParameterRangeError
from src.grid import GridKind, disk_lattice, make_grid, read_field, read_header, sample, write_field, zero_field
from src.transforms import cauchy_m
from src.verify.checks import cap, chain_coefficient


def read_csv(path):
    with open(path, encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


class TestParser:
    """Tests for argument parsing and exit codes."""

    def test_unknown_verb(self, capsys):
        """Should exit 2 with usage on stderr."""
        assert main(["frobnicate"]) == EXIT_USAGE
        assert "usage" in capsys.readouterr().err

    def test_version(self):
        """Should exit 0 for --version."""
        assert main(["--version"]) == EXIT_OK

    def test_global_flags_after_verb(self):
        """Should accept the global options on every verb."""
        args = build_parser().parse_args(["verify", "--suite", "kz-norm", "--n", "64", "--seed", "3"])
        assert (args.n, args.seed, args.suite) == (64, 3, "kz-norm")

    def test_parse_probes(self):
        """Should read comma-separated complex literals."""
        assert parse_probes("0, 0.5,0.25+0.25j") == [0j, 0.5 + 0j, 0.25 + 0.25j]

    def test_missing_config(self, tmp_path):
        """Should exit 2 when an explicit config file is missing."""
        assert main(["verify", "--suite", "reflection-sandwich", "--config", str(tmp_path / "none.yaml")]) == EXIT_USAGE

    def test_missing_out(self, tmp_path):
        """Should exit 2 when a writing verb has no --out."""
        path = write_field(zero_field(disk_lattice(16)), tmp_path / "f.qbf")
        assert main(["render", "--in", str(path), "--mode", "heat"]) == EXIT_USAGE


class TestVerbs:
    """End-to-end tests of the verbs on small lattices."""

    @pytest.fixture
    def bump_file(self, tmp_path):
        field = sample(lambda z: cap(z, 0.5) * (1.0 + 0.5j * z), disk_lattice(32), "bump")
        return write_field(field, tmp_path / "bump.qbf")

    def test_transform_writes_field(self, bump_file, tmp_path):
        """Should apply C_m and stamp provenance on the output."""
        out = tmp_path / "out.qbf"
        assert main(["transform", "--op", "cauchy_m", "--m", "2", "--in", str(bump_file), "--out", str(out)]) == EXIT_OK
        expected = cauchy_m(read_field(bump_file), 2)
        assert_allclose(read_field(out).values, expected.values, atol=1e-14)
        assert "config_hash" in read_header(out)["provenance"]

    def test_missing_input(self, tmp_path):
        """Should exit 2 when the coefficient file does not exist."""
        code = main(["solve", "--kind", "principal", "--mu", str(tmp_path / "absent.qbf"), "--out", str(tmp_path / "f.qbf")])
        assert code == EXIT_USAGE

    def test_solve_principal_report(self, tmp_path):
        """Should write the map and a JSON report."""
        grid = make_grid(GridKind.SQUARE, 32, (-2.0, 2.0))
        mu = write_field(sample(lambda z: 0.3 * cap(z), grid, "mu"), tmp_path / "mu.qbf")
        out, report = tmp_path / "f.qbf", tmp_path / "report.json"
        code = main(["solve", "--kind", "principal", "--mu", str(mu), "--out", str(out), "--report", str(report)])
        assert code == EXIT_OK
        data = json.loads(report.read_text())
        assert data["kind"] == "principal"
        assert data["derivative_bounds"][0] > 0
        assert read_field(out).grid.n == 32

    def test_solve_chain_reports_univalence_profile(self, tmp_path):
        """Should add ring-wise univalence margins and chain decay constants to the report."""
        mu = write_field(sample(chain_coefficient, disk_lattice(64), "mu"), tmp_path / "mu.qbf")
        out, report = tmp_path / "f.qbf", tmp_path / "report.json"
        args = ["solve", "--kind", "chain", "--mu", str(mu), "--out", str(out), "--pairs", "500", "--report", str(report)]
        assert main(args) == EXIT_OK
        data = json.loads(report.read_text())
        profile = data["univalence_profile"]
        assert len(profile["radius"]) == len(profile["margin"]) == 16
        assert max(profile["margin"]) == pytest.approx(data["univalence_margin"])
        assert data["chain"]["extra"]["decay_1"] > 0

    def test_solve_rejects_wrong_grid(self, bump_file, tmp_path):
        """Should exit 2 when the log solver is given a square lattice."""
        code = main(["solve", "--kind", "log", "--mu", str(bump_file), "--out", str(tmp_path / "f.qbf")])
        assert code == EXIT_USAGE

    def test_verify_passing_check(self, tmp_path):
        """Should exit 0 and write provenance-stamped JSON lines."""
        out = tmp_path / "reports.jsonl"
        assert main(["verify", "--suite", "reflection-sandwich", "--out", str(out)]) == EXIT_OK
        (line,) = [json.loads(s) for s in out.read_text().splitlines()]
        assert line["id"] == "reflection-sandwich"
        assert line["pass"] is True
        assert line["provenance"]["version"]

    def test_verify_unknown_check(self):
        """Should exit 2 for an unregistered check."""
        assert main(["verify", "--suite", "no-such-check"]) == EXIT_USAGE

    def test_family_mollify(self, tmp_path):
        """Should tabulate original and smoothed values at each probe."""
        spec = tmp_path / "family.json"
        spec.write_text(json.dumps({
            "box": [[0.0, 0.5]],
            "d": 0.15,
            "terms": [{"coef": [0.3, 0.0], "t": [1], "bump": "taper"}],
        }))
        out = tmp_path / "mollify.csv"
        code = main(["family", "--cmd", "mollify", "--spec", str(spec), "--samples", "3", "--out", str(out)])
        assert code == EXIT_OK
        rows = read_csv(out)
        assert len(rows) == 6
        middle = [r for r in rows if float(r["t"]) == 0.25]
        for row in middle:
            assert float(row["smoothed_re"]) == pytest.approx(float(row["mu_re"]), abs=1e-12)

    def test_family_radius_too_small(self, tmp_path):
        """Should exit 2 when the mollifier radius falls below the t-spacing."""
        spec = tmp_path / "family.json"
        spec.write_text(json.dumps({"box": [[0.0, 1.0]], "d": 0.1, "terms": [{"coef": 0.1, "bump": "taper"}]}))
        code = main(["family", "--cmd", "mollify", "--spec", str(spec), "--b", "1e-3", "--out", str(tmp_path / "m.csv")])
        assert code == EXIT_USAGE


class TestRender:
    """Tests for gridline and graymap rendering."""

    def test_identity_gridlines_are_axis_parallel(self, tmp_path):
        """Should draw horizontal rows and vertical columns for f = z."""
        grid = make_grid(GridKind.SQUARE, 32, (-1.0, 1.0))
        path = write_field(sample(lambda z: z, grid, "f"), tmp_path / "f.qbf")
        out = tmp_path / "grid.csv"
        assert main(["render", "--in", str(path), "--mode", "grid", "--lines", "8", "--out", str(out)]) == EXIT_OK
        rows = read_csv(out)
        by_line = {}
        for row in rows:
            by_line.setdefault((row["line"], row["direction"]), []).append((float(row["x"]), float(row["y"])))
        assert len(by_line) == 16
        for (_, direction), points in by_line.items():
            xs, ys = zip(*points)
            assert len(set(ys if direction == "row" else xs)) == 1

    def test_gridline_vertices_follow_the_map(self):
        """Should place vertices at f(node) for f = z + 0.5 conj(z)."""
        grid = make_grid(GridKind.SQUARE, 16, (-1.0, 1.0))
        field = sample(lambda z: z + 0.5 * np.conj(z), grid)
        nodes = grid.node_array
        for direction, index, points in gridlines(field, 4):
            source = nodes[index, :] if direction == "row" else nodes[:, index]
            assert_allclose(points, source + 0.5 * np.conj(source))

    def test_gridlines_need_a_line(self):
        """Should reject fewer than one line."""
        with pytest.raises(ParameterRangeError):
            gridlines(zero_field(disk_lattice(16)), 0)

    def test_zero_heat_map(self, tmp_path):
        """Should write an all-black graymap for a zero field."""
        path = write_field(zero_field(disk_lattice(16)), tmp_path / "zero.qbf")
        out = tmp_path / "heat.pgm"
        assert main(["render", "--in", str(path), "--mode", "heat", "--out", str(out)]) == EXIT_OK
        lines = [line for line in out.read_text().splitlines() if not line.startswith("#")]
        assert lines[:3] == ["P2", "16 16", "255"]
        assert all(v == "0" for line in lines[3:] for v in line.split())

    def test_log_scale(self):
        """Should map the peak to 255 and the smallest magnitude to a positive level."""
        grid = make_grid(GridKind.SQUARE, 8, (-1.0, 1.0))
        field = sample(lambda z: np.exp(8.0 * z.real), grid)
        linear = graymap(field, HeatScale.LINEAR)
        log = graymap(field, HeatScale.LOG)
        assert linear.max() == log.max() == 255
        assert log.min() > linear.min()
