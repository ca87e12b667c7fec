"""
The family.json expression language.

A family is a sum of terms coef * z^a * conj(z)^b * prod_i t_i^(e_i) * bump(z):

    {
      "label": "linear-half-disk",
      "box": [[0.0, 0.5]],
      "d": 0.15,
      "growth": [[1, 0.5]],
      "param_growth": [2, 1.0],
      "terms": [
        {"coef": 0.3, "z": 0, "zbar": 0, "t": [1], "bump": "half_disk"}
      ]
    }

coef is a number or a [re, im] pair; bump is a name or a list of names that
are multiplied together.
"""

import json
import logging
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from src.errors import FieldFormatError, ParameterRangeError

from .models import FamilySpec

logger = logging.getLogger(__name__)


def _inside(z: np.ndarray, radius: float = 1.0) -> np.ndarray:
    return np.abs(z) < radius


def _smooth_cap(z: np.ndarray) -> np.ndarray:
    r2 = np.abs(z) ** 2
    out = np.zeros(z.shape)
    inside = r2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return out


BUMPS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "one": lambda z: np.ones(z.shape),
    "disk": lambda z: _inside(z).astype(float),
    "half_disk": lambda z: (np.abs(z) <= 0.5).astype(float),
    "gauss": lambda z: np.where(_inside(z), np.exp(-np.abs(z) ** 2), 0.0),
    "cap": _smooth_cap,
    "taper": lambda z: np.where(_inside(z), 1.0 - np.abs(z) ** 2, 0.0),
}


class Term(BaseModel):
    coef: complex
    z: int = Field(default=0, ge=0)
    zbar: int = Field(default=0, ge=0)
    t: list[int] = Field(default_factory=list)
    bump: list[str] = Field(default_factory=lambda: ["one"])

    @field_validator("coef", mode="before")
    @classmethod
    def _pair(cls, v):
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError("complex coefficients are [re, im] pairs")
            return complex(float(v[0]), float(v[1]))
        return v

    @field_validator("bump", mode="before")
    @classmethod
    def _names(cls, v):
        names = [v] if isinstance(v, str) else list(v)
        unknown = [name for name in names if name not in BUMPS]
        if unknown:
            raise ValueError(f"unknown bump(s) {unknown}; known: {sorted(BUMPS)}")
        return names

    @field_validator("t")
    @classmethod
    def _exponents(cls, v: list[int]) -> list[int]:
        if any(e < 0 for e in v):
            raise ValueError("parameter exponents must be non-negative")
        return v

    def evaluate(self, z: np.ndarray, t: np.ndarray) -> np.ndarray:
        out = self.coef * z ** self.z * np.conj(z) ** self.zbar
        for i, e in enumerate(self.t):
            if e:
                out = out * t[..., i] ** e
        for name in self.bump:
            out = out * BUMPS[name](z)
        return out


class FamilyDocument(BaseModel):
    """Validated contents of a family.json file."""

    label: str = "family"
    box: list[tuple[float, float]]
    d: float
    growth: list[tuple[int, float]] = Field(default_factory=list)
    param_growth: Optional[tuple[float, float]] = None
    seed: int = 0
    terms: list[Term]


def compile_terms(terms: list[Term]) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Vectorized rule mu(z, t) summing the terms."""

    def rule(z: np.ndarray, t: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape, dtype=complex)
        for term in terms:
            total = total + term.evaluate(z, t)
        return total

    return rule


def parse_family(data: dict) -> FamilySpec:
    """
    Build a FamilySpec from a decoded family.json document.

    Raises:
        ParameterRangeError: If the document is invalid or a term uses more
            parameters than the box declares
    """
    try:
        doc = FamilyDocument.model_validate(data)
    except ValidationError as e:
        raise ParameterRangeError("family", data.get("label", "family") if isinstance(data, dict) else data, str(e)) from e
    for term in doc.terms:
        if len(term.t) > len(doc.box):
            raise ParameterRangeError("t", term.t, f"Term uses more than the {len(doc.box)} declared parameter(s)")
    return FamilySpec(
        rule=compile_terms(doc.terms),
        box=doc.box,
        d=doc.d,
        growth=doc.growth,
        param_growth=doc.param_growth,
        label=doc.label,
        seed=doc.seed,
    )


def load_family(path: Union[str, Path]) -> FamilySpec:
    """
    Read a family.json file.

    Raises:
        FileNotFoundError: If the file does not exist
        FieldFormatError: If the file is not valid JSON
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Family file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FieldFormatError(str(path), f"Invalid JSON ({e.msg} at line {e.lineno})") from e
    family = parse_family(data)
    logger.info(f"Loaded family '{family.label}' with {family.dim} parameter(s) from {path}")
    return family
