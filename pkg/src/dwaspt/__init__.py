"""Decohered symmetry-protected topological chains in the doubled (Choi) space."""
import os

# BLAS thread count must be fixed before numpy loads its backend
if os.environ.get("DWASPT_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["DWASPT_THREADS"])

from .lattice import LatticeLayout, PauliString, commutes, pauli_multiply, pauli_to_dense  # noqa: E402

__version__ = "0.1.0"
__all__ = ["LatticeLayout", "PauliString", "commutes", "pauli_multiply", "pauli_to_dense"]
