"""Spectral computations for a three-star quantum graph with a jump on one edge."""

__version__ = "0.1.0"

from .model import (CLASSES, CharTrace, Diagnostic, EdgeSpec, JumpSpec, PotentialSpec,
                    Spectrum, SpectrumEntry, StarProblem, a_from_beta, beta_of, validate)
from .propagate import IntegratorSettings, propagate_edge, propagate_edge1, solve_edge
from .charfn import hadamard_rebuild, omega, omega0, omega_trace
from .spectrum import enumerate_dirichlet, enumerate_eigenvalues
from .recovery import recover

__all__ = [
    "CLASSES", "CharTrace", "Diagnostic", "EdgeSpec", "JumpSpec", "PotentialSpec", "Spectrum",
    "SpectrumEntry", "StarProblem", "a_from_beta", "beta_of", "validate", "IntegratorSettings",
    "propagate_edge", "propagate_edge1", "solve_edge", "hadamard_rebuild", "omega", "omega0",
    "omega_trace", "enumerate_dirichlet", "enumerate_eigenvalues", "recover",
]
