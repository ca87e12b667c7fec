"""Pydantic models for estimate checks and suite reports."""

import json
from datetime import datetime
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field

PLUMBING = "plumbing"


class CheckStatus(str, Enum):
    """Outcome of a single check."""
    PASSED = "passed"
    FAILED = "failed"
    ERROR = "error"


class EstimateReport(BaseModel):
    """
    Result of one registered check.

    Serialized as one JSON line with keys id, anchor, measured, tol, pass, n,
    seconds (plus status and error when a check raised).
    """

    model_config = ConfigDict(populate_by_name=True)

    id: str
    anchor: str = PLUMBING
    measured: dict[str, Any] = Field(default_factory=dict)
    tol: Optional[float] = None
    passed: bool = Field(default=False, alias="pass")
    n: int
    seconds: float = 0.0
    status: CheckStatus = CheckStatus.FAILED
    error: Optional[str] = None

    def body(self) -> dict[str, Any]:
        """Report content without the runtime, for reproducibility comparisons."""
        return self.model_dump(by_alias=True, exclude={"seconds"}, exclude_none=True)

    def to_json_line(self) -> str:
        return json.dumps(self.model_dump(by_alias=True, exclude_none=True), sort_keys=True)


class SuiteReport(BaseModel):
    """All reports of one suite run with summary counts."""

    generated_at: datetime = Field(default_factory=datetime.now)
    n: int
    seed: int
    reports: list[EstimateReport] = Field(default_factory=list)

    total: int = 0
    passed: int = 0
    failed: int = 0
    errored: int = 0

    def calculate_summary(self) -> None:
        """Calculate summary statistics from the reports."""
        self.total = len(self.reports)
        self.passed = sum(1 for r in self.reports if r.status == CheckStatus.PASSED)
        self.failed = sum(1 for r in self.reports if r.status == CheckStatus.FAILED)
        self.errored = sum(1 for r in self.reports if r.status == CheckStatus.ERROR)

    @property
    def success(self) -> bool:
        return all(r.status == CheckStatus.PASSED for r in self.reports)
