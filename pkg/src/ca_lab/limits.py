"""Global enumeration budgets.

Every exhaustive routine asks this module for its cap instead of hard-coding
one, so a single environment variable (``CA_LAB_MAX_CELLS``) can tighten or
relax all of them at once.
"""
from __future__ import annotations

import os

DEFAULT_MAX_CELLS = 1 << 24
MAX_ALPHABET = 16
MAX_RADIUS_2D = 2


class CapExceeded(RuntimeError):
    """Raised when an exhaustive operation would exceed its budget."""

    def __init__(self, what: str, required: int, cap: int):
        super().__init__(f"{what}: requires {required}, cap is {cap}")
        self.what = what
        self.required = required
        self.cap = cap


def max_cells() -> int:
    raw = os.environ.get("CA_LAB_MAX_CELLS")
    if raw is None:
        return DEFAULT_MAX_CELLS
    value = int(raw)
    if value <= 0:
        raise ValueError("CA_LAB_MAX_CELLS must be positive")
    return value


def env_or(default: int) -> int:
    """``CA_LAB_MAX_CELLS`` when set, else ``default`` (for caps larger than the global one)."""
    return max_cells() if "CA_LAB_MAX_CELLS" in os.environ else default


def check(what: str, required: int, cap: int | None = None) -> None:
    cap = max_cells() if cap is None else cap
    if required > cap:
        raise CapExceeded(what, required, cap)
