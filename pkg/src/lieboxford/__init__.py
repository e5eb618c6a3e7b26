"""Verification and exploration toolkit for one-dimensional Lieb-Oxford bounds."""

__version__ = "0.1.0"

MODULES = [
    "numerics",
    "potentials",
    "states",
    "energies",
    "bounds",
    "explore",
    "hubbard",
    "report",
    "cli",
]
