#!/usr/bin/env python3
"""
quasibel command line.

Verbs:
    transform   apply a singular integral operator to a QBF-1 field
    solve       principal, normal, logarithmic or chain solution of a Beltrami equation
    family      Holder table or mollified samples of a parameter family
    verify      run registered estimate checks, JSON-lines reports
    render      gridline CSV or graymap of a field

Exit status: 0 on success, 1 when a check or a numerical construction fails,
2 on usage and input errors.

Usage:
    quasibel verify --suite kz-norm,beurling-isometry --n 64 --out reports.jsonl
"""

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from src import __version__
from src.config import Settings, config_hash, load_settings, use_settings
from src.errors import FieldFormatError, QuasibelError, UnknownCheckError
from src.grid.io import read_field, write_field
from src.logging_config import setup_logging
from src.moebius.models import ReflectionRule
from src.params import MollifierSchedule, holder_modulus, load_family, mollify_family
from src.solver import (
    BeltramiCoefficient,
    QcMapping,
    derivative_chain_solve,
    injectivity_sample,
    normal_solution,
    principal_log_solution,
    principal_solution,
    reconstruct_map,
    univalence_margin,
    univalence_profile,
)
from src.transforms import Backend, OperatorFamily, OperatorSpec, apply_operator
from src.verify import ALL, CheckStatus, run_suite

from .render import DEFAULT_LINES, HeatScale, RenderMode, render

console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

SOLVE_KINDS = ("principal", "normal", "log", "chain")
FAMILY_COMMANDS = ("holder", "mollify")


def parse_probes(text: str) -> list[complex]:
    """Comma-separated complex literals, e.g. "0,0.5,0.25+0.25j"."""
    try:
        return [complex(part.strip().replace(" ", "")) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid probe list {text!r}") from e


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("global options")
    group.add_argument("--n", type=int, help="Lattice size (overrides verify.n)")
    group.add_argument("--seed", type=int, help="Random seed (overrides verify.seed)")
    group.add_argument("--tol", type=float, help="Series tolerance (overrides solver.series_tol)")
    group.add_argument("--out", help="Output file")
    group.add_argument("--config", help="Settings YAML (default config/quasibel.yaml or $QUASIBEL_CONFIG)")
    group.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    group.add_argument("--log-to-file", action="store_true", help="Also write a log file")
    return common


def build_parser() -> argparse.ArgumentParser:
    """The argparse tree; global options are accepted after every verb."""
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="quasibel",
        description="Numerical Beltrami solvers and singular integral estimates",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"quasibel {__version__}")
    verbs = parser.add_subparsers(dest="verb", metavar="VERB", required=True)

    transform = verbs.add_parser("transform", parents=[common], help="Apply a transform to a field")
    transform.add_argument("--op", required=True, choices=[f.value for f in OperatorFamily])
    transform.add_argument("--m", type=int, default=0, help="Counter-term order")
    transform.add_argument("--in", dest="input", required=True, help="QBF-1 input field")
    transform.add_argument("--backend", choices=[b.value for b in Backend])

    solve = verbs.add_parser("solve", parents=[common], help="Solve a Beltrami equation")
    solve.add_argument("--kind", required=True, choices=SOLVE_KINDS)
    solve.add_argument("--mu", required=True, help="QBF-1 coefficient field")
    solve.add_argument("--k", type=int, default=1, help="Chain order")
    solve.add_argument("--m", type=int, default=8, help="Counter-term order of the chain")
    solve.add_argument("--pairs", type=int, default=10_000, help="Injectivity sample size (chain)")
    solve.add_argument("--report", help="JSON report path")

    family = verbs.add_parser("family", parents=[common], help="Parameter family tables")
    family.add_argument("--cmd", required=True, choices=FAMILY_COMMANDS)
    family.add_argument("--spec", required=True, help="family.json")
    family.add_argument("--k", type=int, default=0, help="Derivative order (holder)")
    family.add_argument("--probes", type=parse_probes, default=[0j, 0.5 + 0j])
    family.add_argument("--b", type=float, default=0.5, help="Smallness constant of the radius rule (mollify)")
    family.add_argument("--order-m", type=int, default=0, help="Derivative order of the radius rule (mollify)")
    family.add_argument("--samples", type=int, default=5, help="Parameter samples along the first axis (mollify)")

    verify = verbs.add_parser("verify", parents=[common], help="Run estimate checks")
    verify.add_argument("--suite", default=ALL, help="'all' or comma-separated check ids")
    verify.add_argument("--workers", type=int, help="Concurrent checks")

    rend = verbs.add_parser("render", parents=[common], help="Render a field to CSV or PGM")
    rend.add_argument("--in", dest="input", required=True, help="QBF-1 input field")
    rend.add_argument("--mode", required=True, choices=[m.value for m in RenderMode])
    rend.add_argument("--scale", default=HeatScale.LINEAR.value, choices=[s.value for s in HeatScale])
    rend.add_argument("--lines", type=int, default=DEFAULT_LINES, help="Gridlines per direction")

    return parser


def _apply_overrides(settings: Settings, args: argparse.Namespace) -> Settings:
    solver = settings.solver
    verify = settings.verify
    if args.tol is not None:
        solver = solver.model_copy(update={"series_tol": args.tol})
    if args.n is not None:
        verify = verify.model_copy(update={"n": args.n})
    if args.seed is not None:
        verify = verify.model_copy(update={"seed": args.seed})
    return settings.model_copy(update={"solver": solver, "verify": verify})


def _require_out(args: argparse.Namespace) -> Path:
    if not args.out:
        raise argparse.ArgumentError(None, f"{args.verb} requires --out")
    return Path(args.out)


# =============================================================================
# Verbs
# =============================================================================


def cmd_transform(args: argparse.Namespace, settings: Settings, provenance: dict) -> int:
    out = _require_out(args)
    field = read_field(args.input)
    family = OperatorFamily(args.op)
    spec = OperatorSpec(
        family=family,
        m=args.m,
        backend=Backend(args.backend or settings.transforms.backend),
        reflection=ReflectionRule.disk() if family.is_domain else None,
    )
    result = apply_operator(spec, field)
    write_field(result, out, provenance)
    console.print(f"[green]✓[/green] {family.value} (m={spec.m}) of '{field.label}' → {out}")
    return EXIT_OK


def _mapping_report(mapping: QcMapping) -> dict:
    diag = mapping.diagnostics
    return {
        "kind": mapping.kind.value,
        "n": mapping.grid.n,
        "iterations": diag.iterations,
        "residual": diag.residual,
        "contraction_ratio": diag.contraction_ratio,
        "extra": diag.extra,
    }


def cmd_solve(args: argparse.Namespace, settings: Settings, provenance: dict) -> int:
    out = _require_out(args)
    field = read_field(args.mu)
    report: dict = {}

    if args.kind == "principal":
        mapping = principal_solution(field)
    elif args.kind == "normal":
        mapping = normal_solution(field)
    elif args.kind == "log":
        mapping = principal_log_solution(field)
    else:
        mu = BeltramiCoefficient(field=field, d=float(np.max(np.abs(field.values))))
        chain = derivative_chain_solve(mu, k=args.k, m=args.m)
        mapping = reconstruct_map(chain, mu)
        sample = injectivity_sample(mapping, pairs=args.pairs, seed=settings.verify.seed)
        report["chain"] = {
            "k": chain.k,
            "m": chain.m,
            "level_residuals": chain.residuals,
            "iterations": chain.diagnostics.iterations,
            "extra": chain.diagnostics.extra,
        }
        report["univalence_margin"] = univalence_margin(mapping)
        radii, profile = univalence_profile(mapping)
        report["univalence_profile"] = {"radius": radii.tolist(), "margin": profile.tolist()}
        report["injectivity"] = {
            "pairs": sample.pairs,
            "violations": sample.violations,
            "closest_image": sample.closest_image,
            "holds": sample.holds,
        }

    if args.kind in ("principal", "normal"):
        low, high = mapping.derivative_bounds()
        report["derivative_bounds"] = [low, high]
    report = {**_mapping_report(mapping), **report, "provenance": provenance}

    write_field(mapping.f, out, provenance)
    if args.report:
        path = Path(args.report)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report, indent=2, sort_keys=True, default=str))

    console.print(Panel.fit(
        f"[bold green]{args.kind} solution[/bold green]\n\n"
        f"Iterations: {report['iterations']}\n"
        f"Residual: {report['residual']:.3e}\n"
        f"Contraction ratio: {report['contraction_ratio']:.4f}\n\n"
        f"[dim]Output:[/dim] {out}",
        border_style="green",
    ))
    return EXIT_OK


def _holder_csv(args: argparse.Namespace, settings: Settings, provenance: dict, out: Path) -> None:
    family = load_family(args.spec)
    beta, table = holder_modulus(family, args.k, args.probes, n=settings.verify.n)
    fits = {fit.probe: fit for fit in table.fits}
    with open(out, "w", newline="", encoding="utf-8") as f:
        f.write(f"# quasibel {provenance['version']} config {provenance['config_hash']}\n")
        writer = csv.writer(f)
        writer.writerow(["probe_re", "probe_im", "delta_t", "difference", "slope", "r_squared"])
        for row in table.rows:
            fit = fits.get(row.probe)
            slope = "" if fit is None or fit.slope is None else f"{fit.slope:.6g}"
            r2 = "" if fit is None or fit.r_squared is None else f"{fit.r_squared:.6g}"
            writer.writerow([row.probe.real, row.probe.imag, row.delta_t, f"{row.difference:.17g}", slope, r2])
    summary = "saturated (t-independent within the noise floor)" if beta is None else f"beta = {beta:.4f}"
    console.print(Panel.fit(
        f"[bold green]Holder modulus of '{family.label}'[/bold green]\n\n"
        f"k = {table.k}: {summary}\n\n"
        f"[dim]Output:[/dim] {out}",
        border_style="green",
    ))


def _mollify_csv(args: argparse.Namespace, settings: Settings, provenance: dict, out: Path) -> None:
    family = load_family(args.spec)
    cfg = settings.params
    schedule = MollifierSchedule(
        b=args.b,
        beta=cfg.beta,
        s=cfg.s,
        delta_max=cfg.delta_max,
        nodes_per_axis=cfg.cap_nodes,
    )
    smoothed = mollify_family(family, schedule, args.order_m, args.probes)
    probes = np.asarray(args.probes, dtype=complex)
    with open(out, "w", newline="", encoding="utf-8") as f:
        f.write(f"# quasibel {provenance['version']} config {provenance['config_hash']}\n")
        writer = csv.writer(f)
        writer.writerow(["probe_re", "probe_im", "t", "mu_re", "mu_im", "smoothed_re", "smoothed_im"])
        for t_first in np.linspace(family.lower[0], family.upper[0], max(1, args.samples)):
            t = family.center.copy()
            t[0] = t_first
            original = family.evaluate(probes, t)
            mollified = smoothed.evaluate(probes, t)
            for z, a, b in zip(probes, original, mollified):
                writer.writerow([z.real, z.imag, f"{t_first:.17g}", f"{a.real:.17g}", f"{a.imag:.17g}",
                                 f"{b.real:.17g}", f"{b.imag:.17g}"])
    slope = smoothed.diagnostics["param_slope"]
    console.print(f"[green]✓[/green] Mollified '{family.label}' sampled at {probes.size} probe(s), t-slope {slope:.3e} → {out}")


def cmd_family(args: argparse.Namespace, settings: Settings, provenance: dict) -> int:
    out = _require_out(args)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.cmd == "holder":
        _holder_csv(args, settings, provenance, out)
    else:
        _mollify_csv(args, settings, provenance, out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, settings: Settings, provenance: dict) -> int:
    names = [ALL] if args.suite.strip() == ALL else [s.strip() for s in args.suite.split(",") if s.strip()]
    suite = run_suite(names, workers=args.workers, out=args.out, provenance=provenance)

    table = Table(title=f"Verify suite (n={suite.n}, seed={suite.seed})")
    table.add_column("check")
    table.add_column("status")
    table.add_column("seconds", justify="right")
    styles = {CheckStatus.PASSED: "green", CheckStatus.FAILED: "red", CheckStatus.ERROR: "yellow"}
    for report in suite.reports:
        style = styles[report.status]
        table.add_row(report.id, f"[{style}]{report.status.value}[/{style}]", f"{report.seconds:.1f}")
    console.print(table)

    border = "green" if suite.success else "red"
    console.print(Panel.fit(
        f"Total: {suite.total}\n"
        f"Passed: {suite.passed}\n"
        f"Failed: {suite.failed}\n"
        f"Errors: {suite.errored}"
        + (f"\n\n[dim]Reports:[/dim] {args.out}" if args.out else ""),
        border_style=border,
    ))
    return EXIT_OK if suite.success else EXIT_FAILED


def cmd_render(args: argparse.Namespace, settings: Settings, provenance: dict) -> int:
    out = _require_out(args)
    field = read_field(args.input)
    render(field, args.mode, out, scale=args.scale, lines=args.lines, provenance=provenance)
    console.print(f"[green]✓[/green] {args.mode} rendering of '{field.label}' → {out}")
    return EXIT_OK


COMMANDS: dict[str, Callable[[argparse.Namespace, Settings, dict], int]] = {
    "transform": cmd_transform,
    "solve": cmd_solve,
    "family": cmd_family,
    "verify": cmd_verify,
    "render": cmd_render,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run one verb and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help and --version exit 0; every parse failure is a usage error
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        settings = _apply_overrides(load_settings(args.config), args)
    except (FileNotFoundError, ValidationError) as e:
        err_console.print(f"[red]Error:[/red] {e}")
        return EXIT_USAGE

    digest = config_hash(settings)
    provenance = {"version": __version__, "config_hash": digest}
    setup_logging(
        level=args.log_level or settings.logging.level,
        log_dir=settings.logging.log_dir,
        log_to_file=args.log_to_file or settings.logging.log_to_file,
        config_hash=digest,
    )

    use_settings(settings)
    start = time.perf_counter()
    try:
        status = COMMANDS[args.verb](args, settings, provenance)
    except argparse.ArgumentError as e:
        err_console.print(f"[red]Error:[/red] {e}")
        err_console.print(parser.format_usage().rstrip())
        return EXIT_USAGE
    except (FileNotFoundError, FieldFormatError, UnknownCheckError, ValidationError) as e:
        err_console.print(f"[red]Error:[/red] {e}")
        return EXIT_USAGE
    except QuasibelError as e:
        err_console.print(f"[red]{type(e).__name__}:[/red] {e}")
        return EXIT_USAGE if isinstance(e, ValueError) else EXIT_FAILED
    finally:
        use_settings(None)

    logger.info(f"{args.verb} finished with status {status} in {time.perf_counter() - start:.1f}s")
    return status


def run() -> None:
    """Console-script entry point."""
    sys.exit(main())


if __name__ == "__main__":
    run()
