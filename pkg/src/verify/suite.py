"""Run registered checks and emit JSON-lines reports."""

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Optional, Union

from src.config import get_settings
from src.errors import QuasibelError, UnknownCheckError

from .checks import REGISTRY, Check, CheckContext
from .models import CheckStatus, EstimateReport, SuiteReport

logger = logging.getLogger(__name__)

ALL = "all"


def resolve_checks(names: Iterable[str]) -> list[Check]:
    """
    Registry entries for the requested names, in registry order.

    "all" selects every check.

    Raises:
        UnknownCheckError: If a name is not registered
    """
    requested = {name.strip() for name in names if name.strip()}
    if ALL in requested:
        return list(REGISTRY.values())
    for name in sorted(requested):
        if name not in REGISTRY:
            raise UnknownCheckError(name, REGISTRY)
    return [check for check_id, check in REGISTRY.items() if check_id in requested]


def run_check(check: Check, ctx: CheckContext) -> EstimateReport:
    """Run one check; numerical failures become an error report."""
    start = time.perf_counter()
    try:
        outcome = check.run(ctx)
    except QuasibelError as e:
        logger.error(f"Check '{check.id}' raised {type(e).__name__}: {e}")
        return EstimateReport(
            id=check.id,
            anchor=check.anchor,
            n=ctx.n,
            seconds=time.perf_counter() - start,
            status=CheckStatus.ERROR,
            error=f"{type(e).__name__}: {e}",
        )
    status = CheckStatus.PASSED if outcome.passed else CheckStatus.FAILED
    report = EstimateReport(
        id=check.id,
        anchor=check.anchor,
        measured=outcome.measured,
        tol=outcome.tol,
        passed=bool(outcome.passed),
        n=ctx.n,
        seconds=time.perf_counter() - start,
        status=status,
    )
    logger.info(f"Check '{check.id}': {status.value} in {report.seconds:.1f}s")
    return report


def run_suite(
    names: Iterable[str],
    n: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    out: Union[str, Path, None] = None,
    provenance: Optional[dict] = None,
) -> SuiteReport:
    """
    Execute the named checks, optionally writing one JSON line per report.

    Reports come back in registry order regardless of completion order.

    Raises:
        UnknownCheckError: If a name is not registered
    """
    settings = get_settings().verify
    ctx = CheckContext(
        n=settings.n if n is None else n,
        seed=settings.seed if seed is None else seed,
        trials=settings.trials,
        tolerances=settings.tolerances,
    )
    workers = settings.workers if workers is None else workers
    checks = resolve_checks(names)

    if checks:
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            reports = list(pool.map(lambda check: run_check(check, ctx), checks))
    else:
        reports = []

    suite = SuiteReport(n=ctx.n, seed=ctx.seed, reports=reports)
    suite.calculate_summary()
    if out is not None:
        write_reports(reports, out, provenance)
    logger.info(f"Suite finished: {suite.passed}/{suite.total} passed, {suite.failed} failed, {suite.errored} errors")
    return suite


def write_reports(
    reports: list[EstimateReport],
    path: Union[str, Path],
    provenance: Optional[dict] = None,
) -> None:
    """One JSON line per report; provenance, when given, is stamped on every line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for report in reports:
            line = report.to_json_line() if provenance is None else json.dumps(
                {**report.model_dump(by_alias=True, exclude_none=True), "provenance": provenance},
                sort_keys=True,
            )
            f.write(line + "\n")
