"""Uniform lattices shared by kernel pairs, symbols and grid functions.

Every grid is a lattice ``lo + k * step`` with ``n`` (a power of two)
nodes.  Symmetric grids place ``0`` on node ``n // 2`` and stop one step
short of ``+half_width``; this keeps discrete convolutions on the lattice
and puts ``s = 0`` (where most symbols peak) on a node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GridError", "GridParams", "DEFAULT_T_GRID", "DEFAULT_S_GRID", "is_power_of_two"]


class GridError(ValueError):
    """Raised for malformed grids, mismatched grids, or insufficient range."""


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridParams:
    """Uniform grid ``lo, lo + step, ..., hi`` with ``step = (hi - lo) / (n - 1)``."""

    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not is_power_of_two(self.n) or self.n < 2:
            raise GridError(f"grid size must be a power of two >= 2, got {self.n}")
        if not self.hi > self.lo:
            raise GridError(f"empty grid range [{self.lo}, {self.hi}]")

    @classmethod
    def symmetric(cls, half_width: float, n: int) -> "GridParams":
        step = 2.0 * half_width / n
        return cls(-half_width, half_width - step, n)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.n)

    @property
    def origin_offset(self) -> float:
        """``lo / step``; an integer exactly when 0 is a lattice point."""
        return self.lo / self.step

    @property
    def contains_origin(self) -> bool:
        off = self.origin_offset
        return abs(off - round(off)) < 1e-9 and self.lo <= 0 <= self.hi

    @property
    def zero_index(self) -> int:
        if not self.contains_origin:
            raise GridError("grid lattice does not contain 0")
        return int(round(-self.origin_offset))

    def same_as(self, other: "GridParams") -> bool:
        return (
            self.n == other.n
            and np.isclose(self.lo, other.lo, rtol=0, atol=1e-12 * max(1.0, abs(self.lo)))
            and np.isclose(self.hi, other.hi, rtol=0, atol=1e-12 * max(1.0, abs(self.hi)))
        )

    def require_same(self, other: "GridParams", what: str = "grids") -> None:
        if not self.same_as(other):
            raise GridError(f"{what} differ: {self} vs {other}")

    def index_range(self, a: float, b: float) -> np.ndarray:
        return np.nonzero((self.nodes >= a) & (self.nodes <= b))[0]


DEFAULT_T_GRID = GridParams.symmetric(64.0, 2**15)
DEFAULT_S_GRID = GridParams.symmetric(64.0, 2**13)
