"""Finite MPS machinery: states, automaton MPOs, two-site DMRG, filter gates, checkpoints."""
from .state import MPS, TruncationPolicy, sandwich, truncated_svd
from .mpo import MPO, mpo_from_hamiltonian, mpo_from_terms
from .dmrg import DMRGNotConverged, DMRGResult, cluster_initial_state, dmrg_ground_state
from .gates import apply_filter_gate, apply_filter_gates, apply_operator_sum
from .io import load_mps, save_mps

__all__ = [
    "MPS", "TruncationPolicy", "sandwich", "truncated_svd",
    "MPO", "mpo_from_hamiltonian", "mpo_from_terms",
    "DMRGNotConverged", "DMRGResult", "cluster_initial_state", "dmrg_ground_state",
    "apply_filter_gate", "apply_filter_gates", "apply_operator_sum",
    "load_mps", "save_mps",
]
