"""Skeletal program enumeration toolkit.

Extracts variable-hole skeletons from MiniC programs, enumerates the
non-alpha-equivalent fillings with scope- and type-aware set-partition
combinatorics, and drives differential compiler testing over the
enumerated variants.
"""

__version__ = "0.1.0"

__all__ = [
    "combinat",
    "minilang",
    "skeleton",
    "enumerator",
    "harness",
    "cli",
]
