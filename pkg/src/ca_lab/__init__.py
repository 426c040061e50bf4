"""Exact tools for 2D cellular automata: slicing into 1D rules, closingness
and sensitivity analysis, entropy counts, Wang tilings and the tile-set
reduction."""
from . import core, dyn1d, dyn2d, formats, limits, reduction, slicing, stretch, wang
from .core import AsymptoticPair2D, PeriodicConfig1D, RuleTable1D, RuleTable2D, TorusConfig2D

__version__ = "0.1.0"

__all__ = [
    "AsymptoticPair2D",
    "PeriodicConfig1D",
    "RuleTable1D",
    "RuleTable2D",
    "TorusConfig2D",
    "core",
    "dyn1d",
    "dyn2d",
    "formats",
    "limits",
    "reduction",
    "slicing",
    "stretch",
    "wang",
]
