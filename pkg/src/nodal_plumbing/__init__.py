"""Truncated-series calculus for the plumbing model ``zw = t`` of a node."""

from .family import ModelFamily, SectionK, VerticalSection, fiber_pullback, laur, residue_at_node
from .pairing import CoordinateChange, PairingResult
from .series import ComplexSeries, DomainError, SeriesError

__all__ = [
    "ComplexSeries",
    "CoordinateChange",
    "DomainError",
    "ModelFamily",
    "PairingResult",
    "SectionK",
    "SeriesError",
    "VerticalSection",
    "fiber_pullback",
    "laur",
    "residue_at_node",
]
__version__ = "0.1.0"
