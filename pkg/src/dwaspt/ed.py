"""Brute-force statevector reference for the single layer and the doubled ladder."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from . import kernels
from .channels import FilterGate, build_filter_gates, channel_specs, choi_vectorize
from .lattice import (
    MAX_DENSE_MATRIX_SITES,
    MAX_DENSE_VECTOR_SITES,
    LatticeLayout,
    PauliString,
    SizeGuardError,
)
from .models import HamiltonianTerms, build_h0_dw

# partial traces are formed densely only up to this many subsystem sites
MAX_SUBSYSTEM_SITES = 12


@dataclass
class DenseState:
    """A statevector on a layout, with the log of every scalar divided out."""

    vector: np.ndarray
    layout: LatticeLayout
    log_norm: float = 0.0

    def __post_init__(self):
        n = self.layout.n_sites
        if n > MAX_DENSE_VECTOR_SITES:
            raise SizeGuardError(f"dense vectors are limited to {MAX_DENSE_VECTOR_SITES} sites")
        if self.vector.shape != (2**n,):
            raise ValueError(f"vector length {self.vector.shape} does not match {n} sites")
        if not np.all(np.isfinite(self.vector)):
            raise ValueError("non-finite amplitudes")

    @property
    def n_sites(self) -> int:
        return self.layout.n_sites

    def copy(self) -> "DenseState":
        return DenseState(self.vector.copy(), self.layout, self.log_norm)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def normalize(self) -> "DenseState":
        nrm = self.norm()
        self.vector = self.vector / nrm
        self.log_norm += math.log(nrm)
        return self

    def apply(self, p: PauliString) -> np.ndarray:
        x, z, ph = p.masks(self.n_sites)
        return kernels.apply_pauli_sum(self.vector, [x], [z], np.array([ph]))

    def expectation(self, p: PauliString) -> complex:
        """``<v|P|v> / <v|v>``."""
        x, z, ph = p.masks(self.n_sites)
        return kernels.pauli_expectation(self.vector, x, z, ph) / np.vdot(self.vector, self.vector).real

    def relative_overlap(self, p: PauliString | None = None) -> complex:
        """``<<1| P |v>>`` with the unnormalized rung Bell product ``<<1|``."""
        if not self.layout.doubled:
            raise ValueError("relative state needs the doubled layout")
        w = self.vector if p is None else self.apply(p)
        n_pairs = self.n_sites // 2
        t = w.reshape((4,) * n_pairs)
        bell = np.array([1.0, 0.0, 0.0, 1.0])
        for _ in range(n_pairs):
            t = np.tensordot(t, bell, axes=([0], [0]))
        return complex(t)

    def schmidt_values(self, bond: int) -> np.ndarray:
        """Schmidt values of the normalized state across path bond ``bond``."""
        n = self.n_sites
        if not 0 <= bond <= n:
            raise ValueError("bond out of range")
        m = self.vector.reshape(2**bond, 2 ** (n - bond))
        s = scipy.linalg.svd(m, compute_uv=False)
        return s / np.linalg.norm(s)

    def bond_spectra(self) -> list[np.ndarray]:
        """Schmidt values at every path bond 0..n (the ends give ``[1]``)."""
        return [self.schmidt_values(b) for b in range(self.n_sites + 1)]

    def reduced_density_matrix(self, sites) -> np.ndarray:
        """Dense reduced density matrix of the normalized state on ``sites``."""
        sites = sorted(sites)
        if len(sites) > MAX_SUBSYSTEM_SITES:
            raise SizeGuardError(f"subsystems are limited to {MAX_SUBSYSTEM_SITES} sites")
        n = self.n_sites
        rest = [s for s in range(n) if s not in sites]
        t = self.vector.reshape((2,) * n).transpose(sites + rest)
        m = t.reshape(2 ** len(sites), -1)
        rho = m @ m.conj().T
        return rho / np.trace(rho).real


@dataclass
class GroundState:
    state: DenseState
    energy: float
    degenerate: bool = False
    basis: np.ndarray | None = None
    residual: float = 0.0
    solver: str = ""


def matvec_operator(h: HamiltonianTerms) -> spla.LinearOperator:
    """Matrix-free ``H v`` through the statevector kernels."""
    xs, zs, phs = h.symplectic()
    n = h.n_sites
    dim = 2**n
    real = np.all(np.asarray(phs).imag == 0)
    dtype = np.float64 if real else np.complex128
    phs = phs.real if real else phs

    def mv(v):
        v = np.ascontiguousarray(np.ravel(v), dtype=dtype)
        return kernels.apply_pauli_sum(v, xs, zs, phs)

    return spla.LinearOperator((dim, dim), matvec=mv, dtype=dtype)


def exact_ground_state(h: HamiltonianTerms, method: str = "auto", degeneracy_tol: float = 1e-9,
                       seed: int = 7) -> GroundState:
    """Lowest eigenvector of ``h``; flags a degenerate ground space.

    ``method`` is ``"dense"`` (full diagonalization, <= 14 sites),
    ``"lanczos"`` (matrix-free ARPACK, <= 24 sites) or ``"auto"``.
    """
    n = h.n_sites
    if n > MAX_DENSE_VECTOR_SITES:
        raise SizeGuardError(f"exact diagonalization is limited to {MAX_DENSE_VECTOR_SITES} sites")
    if method == "auto":
        method = "dense" if n <= 12 else "lanczos"
    if method == "dense":
        if n > MAX_DENSE_MATRIX_SITES:
            raise SizeGuardError(f"dense diagonalization is limited to {MAX_DENSE_MATRIX_SITES} sites")
        w, v = np.linalg.eigh(h.to_dense())
        k = 4
    elif method == "lanczos":
        op = matvec_operator(h)
        rng = np.random.default_rng(seed)
        k = 4
        w, v = spla.eigsh(op, k=k, which="SA", v0=rng.standard_normal(2**n), tol=1e-13,
                          ncv=min(24, 2**n - 1))
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    else:
        raise ValueError(f"unknown method {method!r}")
    e0 = float(w[0])
    ndeg = int(np.sum(np.abs(w[:k] - e0) < degeneracy_tol))
    psi = np.array(v[:, 0])
    psi = _fix_gauge(psi)
    op = matvec_operator(h)
    resid = float(np.linalg.norm(op.matvec(psi) - e0 * psi))
    return GroundState(
        DenseState(psi, h.layout),
        e0,
        degenerate=ndeg > 1,
        basis=np.array(v[:, :ndeg]) if ndeg > 1 else None,
        residual=resid,
        solver=method,
    )


def _fix_gauge(psi: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude amplitude real positive."""
    i = int(np.argmax(np.abs(psi)))
    ph = psi[i] / abs(psi[i])
    out = psi / ph
    if np.iscomplexobj(out) and np.max(np.abs(out.imag)) < 1e-14:
        out = out.real
    return out


def doubled_from_single(psi: np.ndarray, L: int, boundary: str = "periodic") -> DenseState:
    """``|psi^*>_u |psi>_l`` on the interleaved doubled path."""
    rho = np.outer(psi, np.conj(psi))
    return DenseState(choi_vectorize(rho), LatticeLayout(L, boundary, doubled=True))


def free_fermion_energy(L: int, J_zz: float) -> float:
    """Exact ground energy of the periodic single-layer model for ``0 <= J_zz < 1``.

    The tau spins are free (``-L``) and the sigma ring is a transverse-field
    Ising chain whose ground state lies in the even-parity sector with
    antiperiodic momenta ``k = (2n + 1) pi / L``. Valid for any ``L``, so it
    checks DMRG energies beyond exact-diagonalization sizes; the dual model
    has the same spectrum.
    """
    if not 0 <= J_zz < 1:
        raise ValueError("closed form needs 0 <= J_zz < 1 (paramagnetic ring)")
    k = (2 * np.arange(L) + 1) * np.pi / L
    return float(-L - np.sum(np.sqrt(1 + J_zz**2 - 2 * J_zz * np.cos(k))))


def doubled_ground_state(L: int, J_zz: float, boundary: str = "periodic",
                         method: str = "auto") -> tuple[DenseState, float]:
    """Doubled-ladder ground state built from the single-layer ground state.

    Returns the state and the doubled energy ``2 E_single``.
    """
    gs = exact_ground_state(build_h0_dw(L, J_zz, boundary), method=method)
    if gs.degenerate:
        raise ValueError("single-layer ground state is degenerate")
    return doubled_from_single(gs.state.vector, L, boundary), 2 * gs.energy


def filter_statevector(state: DenseState, gates: list[FilterGate]) -> DenseState:
    """Apply ``(1-p) I + p h`` for each gate, renormalizing after each step."""
    out = state.copy()
    for g in gates:
        if g.is_identity:
            continue
        a, b = g.coefficients
        out.vector = a * out.vector + b * out.apply(g.h)
        nrm = out.norm()
        if nrm == 0:
            raise ValueError("filter annihilated the state")
        out.vector /= nrm
        out.log_norm += math.log(nrm)
    return out


def decohered_state(L: int, J_zz: float, p_zz: float, mode: str = "paired",
                    boundary: str = "periodic", initial: DenseState | None = None) -> DenseState:
    """Filtered doubled state for one point of the scan."""
    if initial is None:
        initial, _ = doubled_ground_state(L, J_zz, boundary)
    gates = []
    for spec in channel_specs(p_zz, J_zz, mode):
        gates += build_filter_gates(spec, initial.layout)
    return filter_statevector(initial, gates)


def oracle_observables(state: DenseState, k: int | None = None, es_levels: int = 20,
                       region_sites: int = 8, region: list[int] | None = None) -> dict:
    """Every observable of the analysis module evaluated by direct contraction.

    ``region`` optionally names an arbitrary site subset whose entanglement
    entropy and spectrum are computed from the dense reduced density matrix.
    """
    from .observables import measure_all

    if state.layout.L > 6:
        raise SizeGuardError("oracle observables are limited to L <= 6")
    rec = measure_all(state, k=k, es_levels=es_levels, region_sites=region_sites)
    if region is not None:
        rho = state.reduced_density_matrix(region)
        w = np.clip(np.linalg.eigvalsh(rho)[::-1], 0, None)
        nz = w[w > 1e-300]
        rec["region_entropy"] = float(-np.sum(nz * np.log(nz)))
        rec["region_es"] = sorted((-np.log(nz[:es_levels])).tolist())
    return rec
