"""Hamiltonians of the sigma-tau chain, the domain-wall CZ circuit, and the doubled ladder."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    MAX_DENSE_VECTOR_SITES,
    LatticeLayout,
    PauliString,
    SizeGuardError,
    operator_sum_to_dense,
    pauli_multiply,
)


@dataclass(frozen=True)
class HamiltonianTerms:
    """A real-coefficient sum of Pauli strings on a fixed layout."""

    terms: tuple[PauliString, ...]
    layout: LatticeLayout
    J_zz: float
    model: str

    @property
    def L(self) -> int:
        return self.layout.L

    @property
    def boundary(self) -> str:
        return self.layout.boundary

    @property
    def n_sites(self) -> int:
        return self.layout.n_sites

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def nonzero_terms(self) -> list[PauliString]:
        return [t for t in self.terms if t.coeff != 0]

    def to_dense(self) -> np.ndarray:
        return operator_sum_to_dense(self.nonzero_terms(), self.n_sites).real

    def symplectic(self):
        """Arrays ``(x_masks, z_masks, phases)`` for the statevector kernels."""
        n = self.n_sites
        xs, zs, phs = [], [], []
        for t in self.nonzero_terms():
            x, z, ph = t.masks(n)
            xs.append(x)
            zs.append(z)
            phs.append(ph)
        return np.array(xs, dtype=np.uint64), np.array(zs, dtype=np.uint64), np.array(phs)


def _check_L(L: int):
    if L < 2:
        raise ValueError(f"need L >= 2, got {L}")


def build_h0(L: int, J_zz: float, boundary: str = "periodic") -> HamiltonianTerms:
    """Decoupled model: transverse fields on both species plus sigma Ising bonds."""
    _check_L(L)
    if J_zz < 0:
        raise ValueError("J_zz must be nonnegative")
    lay = LatticeLayout(L, boundary, doubled=False)
    terms = []
    for j in range(L):
        terms.append(PauliString(((lay.tau(j), "X"),), -1.0))
        terms.append(PauliString(((lay.sigma(j), "X"),), -1.0))
        if lay.periodic or j + 1 < L:
            terms.append(PauliString.from_ops([(lay.sigma(j), "Z"), (lay.sigma(j + 1), "Z")], -J_zz))
    return HamiltonianTerms(tuple(terms), lay, J_zz, "h0")


def build_h0_dw(L: int, J_zz: float, boundary: str = "periodic") -> HamiltonianTerms:
    """Cluster-coupled dual model ``U_DW H0 U_DW^dagger``.

    Periodic terms are written out directly; the open chain is obtained by
    conjugating the open ``H0`` with the open circuit.
    """
    _check_L(L)
    if J_zz < 0:
        raise ValueError("J_zz must be nonnegative")
    lay = LatticeLayout(L, boundary, doubled=False)
    if not lay.periodic:
        circ = build_u_dw(L, boundary)
        h0 = build_h0(L, J_zz, boundary)
        terms = tuple(clifford_conjugate(circ, t) for t in h0.terms)
        return HamiltonianTerms(terms, lay, J_zz, "h0_dw")
    terms = []
    for j in range(L):
        terms.append(PauliString.from_ops(
            [(lay.sigma(j), "Z"), (lay.tau(j), "X"), (lay.sigma(j + 1), "Z")], -1.0))
        terms.append(PauliString.from_ops(
            [(lay.tau(j - 1), "Z"), (lay.sigma(j), "X"), (lay.tau(j), "Z")], -1.0))
        terms.append(PauliString.from_ops([(lay.sigma(j), "Z"), (lay.sigma(j + 1), "Z")], -J_zz))
    return HamiltonianTerms(tuple(terms), lay, J_zz, "h0_dw")


def cluster_stabilizers(L: int, boundary: str = "periodic") -> list[PauliString]:
    """The 2L cluster stabilizers ``sz tx sz`` and ``tz sx tz`` (sign +1)."""
    h = build_h0_dw(L, 0.0, boundary)
    return [-t for t in h.terms if t.coeff != 0]


def build_doubled_hamiltonian(L: int, J_zz: float, boundary: str = "periodic") -> HamiltonianTerms:
    """Ladder ``H0_DW(u)^* + H0_DW(l)`` on the interleaved doubled path.

    The upper (bra) layer receives the complex-conjugated operator.
    """
    single = build_h0_dw(L, J_zz, boundary)
    lay = LatticeLayout(L, boundary, doubled=True)
    terms = [embed_string(t, lay, "u").conjugate() for t in single.terms]
    terms += [embed_string(t, lay, "l") for t in single.terms]
    return HamiltonianTerms(tuple(terms), lay, J_zz, "doubled_h0_dw")


def embed_string(p: PauliString, layout: LatticeLayout, layer) -> PauliString:
    """Move a single-layer Pauli string onto one layer of the doubled path."""
    return PauliString(tuple((layout.embed(s, layer), op) for s, op in p.ops), p.coeff)


def symmetry_generators(layout: LatticeLayout) -> dict[str, PauliString]:
    """Global flips prod sigma^x and prod tau^x (one pair per layer when doubled)."""
    L = layout.L
    layers = ("u", "l") if layout.doubled else ("u",)
    out = {}
    for lay in layers:
        suffix = f"_{lay}" if layout.doubled else ""
        out["sigma" + suffix] = PauliString(tuple((layout.flatten(lay, 0, j), "X") for j in range(L)))
        out["tau" + suffix] = PauliString(tuple((layout.flatten(lay, 1, j), "X") for j in range(L)))
    return out


@dataclass(frozen=True)
class CliffordCircuit:
    """A product of mutually commuting CZ gates given as path-index pairs."""

    gates: tuple[tuple[int, int], ...]
    n_sites: int

    def __len__(self):
        return len(self.gates)


def build_u_dw(L: int, boundary: str = "periodic", layout: LatticeLayout | None = None,
               layer="u") -> CliffordCircuit:
    """Domain-wall circuit: CZ(sigma_{j-1}, tau_{j-1/2}) CZ(sigma_j, tau_{j-1/2}).

    On a ring the j = 0 gates wrap to tau_{L-1/2}. On an open chain only
    gates whose sites exist are kept (j = 1 .. L-1). With a doubled
    ``layout`` the circuit acts on the chosen layer.
    """
    _check_L(L)
    if layout is None:
        layout = LatticeLayout(L, boundary, doubled=False)
    gates = []
    for j in range(L):
        if not layout.periodic and j == 0:
            continue
        t = layout.flatten(layer, 1, layout.cell(j - 1))
        gates.append((layout.flatten(layer, 0, layout.cell(j - 1)), t))
        gates.append((layout.flatten(layer, 0, j), t))
    return CliffordCircuit(tuple(gates), layout.n_sites)


def _single_image(circ: CliffordCircuit, site: int, op: str) -> PauliString:
    out = PauliString(((site, op),))
    if op == "Z":
        return out
    for a, b in circ.gates:
        if a == site:
            out = pauli_multiply(out, PauliString(((b, "Z"),)))
        elif b == site:
            out = pauli_multiply(out, PauliString(((a, "Z"),)))
    return out


def clifford_conjugate(circ: CliffordCircuit, p: PauliString) -> PauliString:
    """Exact image ``U p U^dagger`` (CZ maps X_a -> X_a Z_b, Y_a -> Y_a Z_b)."""
    out = PauliString((), p.coeff)
    for s, op in p.ops:
        out = pauli_multiply(out, _single_image(circ, s, op))
    return out


def conjugate_terms(circ: CliffordCircuit, h: HamiltonianTerms, model: str | None = None) -> HamiltonianTerms:
    terms = tuple(clifford_conjugate(circ, t) for t in h.terms)
    return HamiltonianTerms(terms, h.layout, h.J_zz, model or h.model + "_conj")


def apply_u_dw_to_state(circ: CliffordCircuit, psi: np.ndarray) -> np.ndarray:
    """Apply the diagonal CZ product to a dense statevector."""
    n = circ.n_sites
    if n > MAX_DENSE_VECTOR_SITES:
        raise SizeGuardError(f"dense vectors are limited to {MAX_DENSE_VECTOR_SITES} sites")
    if psi.shape != (2**n,):
        raise ValueError(f"expected vector of length {2**n}")
    t = np.array(psi).reshape((2,) * n)
    for a, b in circ.gates:
        idx = [slice(None)] * n
        idx[a] = 1
        idx[b] = 1
        t[tuple(idx)] *= -1
    return t.reshape(-1)


def circuit_to_dense(circ: CliffordCircuit) -> np.ndarray:
    n = circ.n_sites
    if n > 14:
        raise SizeGuardError("dense matrices are limited to 14 sites")
    diag = apply_u_dw_to_state(circ, np.ones(2**n))
    return np.diag(diag)
