"""Parameter-dependent Beltrami families: smoothing in t and Holder measurements."""

from .expressions import BUMPS, load_family, parse_family
from .holder import HolderTable, holder_modulus, ladder
from .models import FamilySpec, MollifierSchedule
from .mollify import mollify_family

__all__ = [
    "BUMPS",
    "FamilySpec",
    "HolderTable",
    "MollifierSchedule",
    "holder_modulus",
    "ladder",
    "load_family",
    "mollify_family",
    "parse_family",
]
