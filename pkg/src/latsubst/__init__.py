"""Lattice substitution systems: modular coincidence and total-index tests for model sets."""
from .errors import *  # noqa: F401,F403
from .lattice import (Coset, Inflation, ResidueSystem, coset_contains, coset_measure,
                      enumerate_residues, residue_of, validate_inflation)

__version__ = "0.1.0"
