"""Structural current variation across banks and rows.

Within one module, idle and read currents vary systematically by bank, and
activate/precharge current grows with the number of ones in the row address.
Both effects are modeled as multipliers applied to the relevant current
before energy integration.  Bank 0 is the normalization anchor (factor 1.0).
Writes show no notable per-bank variation and columns none at all, so the
write factor is identically 1.0 and there is no column table.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .trace import NUM_BANKS


class BankContext(Enum):
    IDLE = "idle"
    READ = "read"
    WRITE = "write"


@dataclass(frozen=True)
class StructuralVariation:
    """Per-bank multipliers plus the row-address-ones slope.

    ``row_ones_slope`` is the fractional activate/precharge current increase
    per `1` bit in the row address.
    """

    bank_idle_factor: tuple[float, ...]
    bank_read_factor: tuple[float, ...]
    row_ones_slope: float

    def __post_init__(self):
        for name in ("bank_idle_factor", "bank_read_factor"):
            factors = getattr(self, name)
            if len(factors) != NUM_BANKS:
                raise ValueError(f"{name} must have {NUM_BANKS} entries")

    def check(self) -> list[str]:
        """Return invariant violations (anchor, positivity, slope sign)."""
        problems = []
        for name in ("bank_idle_factor", "bank_read_factor"):
            factors = getattr(self, name)
            if factors[0] != 1.0:
                problems.append(f"{name}[0] must be 1.0 (normalization anchor)")
            if any(f <= 0 for f in factors):
                problems.append(f"{name} entries must be > 0")
        if self.row_ones_slope < 0:
            problems.append("row_ones_slope must be >= 0")
        return problems


def disabled_variation() -> StructuralVariation:
    """Variation-free tables: all factors 1, zero row slope."""
    ones = (1.0,) * NUM_BANKS
    return StructuralVariation(ones, ones, 0.0)


def row_factor(sv: StructuralVariation, row: int) -> float:
    """Activate/precharge multiplier: 1 + slope * popcount(row address)."""
    return 1.0 + sv.row_ones_slope * int(row).bit_count()


def bank_factor(sv: StructuralVariation, bank: int, context: BankContext) -> float:
    """Per-bank multiplier for the given context; writes are always 1.0."""
    if context is BankContext.WRITE:
        return 1.0
    if context is BankContext.IDLE:
        return sv.bank_idle_factor[bank]
    return sv.bank_read_factor[bank]
