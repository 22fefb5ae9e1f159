"""Relative equilibria of symmetric Hamiltonian systems: slices, reduction and branches."""

__version__ = "0.1.0"

from .errors import ReleqError  # noqa: F401
from .system_model import HamiltonianModel, HamiltonianSystem, PhaseSpace, SymmetrySpec  # noqa: F401
