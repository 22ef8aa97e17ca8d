"""Random-matrix and pseudochaos simulation laboratory.

Builds GUE and spoofed-spectrum Hamiltonian ensembles, simulates their
dynamics exactly and by fixed-point phase kickback, prepares Gibbs samples by
rejection, and computes level-spacing, form-factor, OTOC, entanglement, and
stabilizer-entropy diagnostics of quantum chaos.
"""

__version__ = "0.1.0"

from .rng import SeededRng

__all__ = ["SeededRng", "__version__"]
