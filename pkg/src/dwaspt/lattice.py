"""Site indexing for the doubled sigma-tau ladder and exact Pauli-string algebra.

The doubled chain has four spins per unit cell ``j``: the sigma spin on site
``j`` and the tau spin on link ``j + 1/2``, each on an upper (``u``, bra) and a
lower (``l``, ket) layer. They are laid out on a 1D path as::

    [sigma(0,u), sigma(0,l), tau(1/2,u), tau(1/2,l), sigma(1,u), ...]

so every contiguous block of rungs is a contiguous block of the path.

Basis states use the Kronecker convention: path site 0 is the most
significant bit of the computational-basis index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

LAYERS = ("u", "l")
SPECIES = ("sigma", "tau")

_LAYER_ALIASES = {"u": 0, "upper": 0, "l": 1, "ell": 1, "lower": 1, "ℓ": 1}
_SPECIES_ALIASES = {"sigma": 0, "s": 0, "σ": 0, "tau": 1, "t": 1, "τ": 1}

# dense memory guards
MAX_DENSE_VECTOR_SITES = 24
MAX_DENSE_MATRIX_SITES = 14

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-site products: (a, b) -> (phase, result) with a.b = phase * result
_PRODUCT = {}
for _a in "IXYZ":
    _PRODUCT[("I", _a)] = (1, _a)
    _PRODUCT[(_a, "I")] = (1, _a)
    _PRODUCT[(_a, _a)] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PRODUCT[(_a, _b)] = (1j, _c)
    _PRODUCT[(_b, _a)] = (-1j, _c)


class SizeGuardError(ValueError):
    """Raised when a dense object would exceed the memory guard."""


def _layer_index(layer) -> int:
    if isinstance(layer, int):
        if layer not in (0, 1):
            raise ValueError(f"layer must be 0 or 1, got {layer}")
        return layer
    try:
        return _LAYER_ALIASES[layer]
    except KeyError:
        raise ValueError(f"unknown layer {layer!r}") from None


def _species_index(species) -> int:
    if isinstance(species, int):
        if species not in (0, 1):
            raise ValueError(f"species must be 0 or 1, got {species}")
        return species
    try:
        return _SPECIES_ALIASES[species]
    except KeyError:
        raise ValueError(f"unknown species {species!r}") from None


@dataclass(frozen=True)
class LatticeLayout:
    """Map (layer, species, cell) labels onto the interleaved path.

    Parameters
    ----------
    L : int
        Number of unit cells (sigma sites per chain).
    boundary : {"periodic", "open"}
    doubled : bool
        If False the layout holds a single layer (2L path sites, ordering
        ``[sigma_0, tau_1/2, sigma_1, ...]``) and the layer label is ignored.
    """

    L: int
    boundary: str = "periodic"
    doubled: bool = True

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be positive")
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def sites_per_cell(self) -> int:
        return 4 if self.doubled else 2

    @property
    def n_sites(self) -> int:
        return self.sites_per_cell * self.L

    @property
    def n_rungs(self) -> int:
        """Number of rungs (sigma or tau position) along the chain, i.e. 2L."""
        return 2 * self.L

    def cell(self, j: int) -> int:
        """Wrap (periodic) or validate (open) a cell index."""
        if self.periodic:
            return j % self.L
        if not 0 <= j < self.L:
            raise IndexError(f"cell index {j} outside open chain of length {self.L}")
        return j

    def flatten(self, layer, species, j: int) -> int:
        if not 0 <= j < self.L:
            raise IndexError(f"cell index {j} out of range [0, {self.L})")
        s = _species_index(species)
        if not self.doubled:
            return 2 * j + s
        return 4 * j + 2 * s + _layer_index(layer)

    def unflatten(self, index: int) -> tuple[str, str, int]:
        if not 0 <= index < self.n_sites:
            raise IndexError(f"path index {index} out of range [0, {self.n_sites})")
        if not self.doubled:
            j, s = divmod(index, 2)
            return "u", SPECIES[s], j
        j, rem = divmod(index, 4)
        s, lay = divmod(rem, 2)
        return LAYERS[lay], SPECIES[s], j

    def sigma(self, j: int, layer="u") -> int:
        """Path index of sigma_j (cell index wrapped on a ring)."""
        return self.flatten(layer, 0, self.cell(j))

    def tau(self, j: int, layer="u") -> int:
        """Path index of tau_{j+1/2} (cell index wrapped on a ring)."""
        return self.flatten(layer, 1, self.cell(j))

    def single_layer(self) -> "LatticeLayout":
        return LatticeLayout(self.L, self.boundary, doubled=False)

    def doubled_layout(self) -> "LatticeLayout":
        return LatticeLayout(self.L, self.boundary, doubled=True)

    def embed(self, single_index: int, layer) -> int:
        """Send a single-layer path index to the doubled path."""
        j, s = divmod(single_index, 2)
        return 4 * j + 2 * s + _layer_index(layer)

    def rung_sites(self, rung: int) -> tuple[int, int]:
        """The (u, l) path sites of rung ``rung`` in [0, 2L)."""
        if not self.doubled:
            raise ValueError("rungs only exist on the doubled layout")
        return 2 * rung, 2 * rung + 1


@dataclass(frozen=True)
class PauliString:
    """Signed product of single-site Pauli operators.

    ``ops`` is a sorted tuple of ``(site, label)`` with label in ``"XYZ"``;
    identities are never stored.
    """

    ops: tuple[tuple[int, str], ...] = ()
    coeff: complex = 1.0

    def __post_init__(self):
        ops = tuple(sorted(self.ops))
        sites = [s for s, _ in ops]
        if len(set(sites)) != len(sites):
            raise ValueError("repeated site in PauliString; build it with from_ops")
        for s, p in ops:
            if p not in "XYZ" or len(p) != 1:
                raise ValueError(f"invalid Pauli label {p!r}")
            if s < 0:
                raise ValueError("negative site index")
        object.__setattr__(self, "ops", ops)

    @classmethod
    def from_ops(cls, ops: Iterable[tuple[int, str]], coeff: complex = 1.0) -> "PauliString":
        """Build from a possibly repeated list of factors, multiplied left to right."""
        out = cls((), coeff)
        for s, p in ops:
            if p == "I":
                continue
            out = out * cls(((s, p),))
        return out

    @classmethod
    def from_dict(cls, factors: Mapping[int, str], coeff: complex = 1.0) -> "PauliString":
        return cls(tuple((s, p) for s, p in factors.items() if p != "I"), coeff)

    @property
    def factors(self) -> dict[int, str]:
        return dict(self.ops)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.ops)

    @property
    def is_identity(self) -> bool:
        return not self.ops

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return pauli_multiply(self, other)
        return PauliString(self.ops, self.coeff * other)

    def __rmul__(self, other):
        return PauliString(self.ops, self.coeff * other)

    def __neg__(self):
        return PauliString(self.ops, -self.coeff)

    def commutes_with(self, other: "PauliString") -> bool:
        return commutes(self, other)

    def same_operator(self, other: "PauliString", tol: float = 0.0) -> bool:
        return self.ops == other.ops and abs(self.coeff - other.coeff) <= tol

    def masks(self, n: int) -> tuple[int, int, complex]:
        """Symplectic form ``(x_mask, z_mask, phase)`` on ``n`` sites.

        The string acts as ``|i> -> phase * (-1)^popcount(i & z_mask) |i ^ x_mask>``
        where ``phase`` absorbs the coefficient and a factor ``i`` per Y.
        """
        x = z = 0
        ny = 0
        for s, p in self.ops:
            if s >= n:
                raise ValueError(f"site {s} outside {n}-site register")
            bit = 1 << (n - 1 - s)
            if p in "XY":
                x |= bit
            if p in "YZ":
                z |= bit
            if p == "Y":
                ny += 1
        return x, z, self.coeff * (1j) ** ny

    def shifted(self, offset: int, n: int | None = None) -> "PauliString":
        """Translate every factor by ``offset`` (mod ``n`` when given)."""
        if n is None:
            return PauliString(tuple((s + offset, p) for s, p in self.ops), self.coeff)
        return PauliString(tuple(((s + offset) % n, p) for s, p in self.ops), self.coeff)

    def conjugate(self) -> "PauliString":
        """Complex conjugate in the computational basis (Y* = -Y)."""
        ny = sum(p == "Y" for _, p in self.ops)
        return PauliString(self.ops, np.conj(self.coeff) * (-1) ** ny)

    def __str__(self):
        body = " ".join(f"{p}{s}" for s, p in self.ops) or "I"
        return f"({self.coeff:g}) {body}"


def pauli_multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a . b`` with the phase tracked."""
    fa, fb = a.factors, b.factors
    phase = 1
    out = {}
    for s in sorted(set(fa) | set(fb)):
        ph, r = _PRODUCT[(fa.get(s, "I"), fb.get(s, "I"))]
        phase *= ph
        if r != "I":
            out[s] = r
    coeff = a.coeff * b.coeff * phase
    if isinstance(coeff, complex) and coeff.imag == 0:
        coeff = coeff.real
    return PauliString(tuple(out.items()), coeff)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the number of anticommuting single-site overlaps is even."""
    fb = b.factors
    n_anti = sum(1 for s, p in a.ops if s in fb and fb[s] != p)
    return n_anti % 2 == 0


def pauli_to_dense(p: PauliString, n: int) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a Pauli string (ED sizes only)."""
    if n > MAX_DENSE_MATRIX_SITES:
        raise SizeGuardError(f"dense matrices are limited to {MAX_DENSE_MATRIX_SITES} sites")
    f = p.factors
    if f and max(f) >= n:
        raise ValueError("Pauli string support exceeds register size")
    out = np.ones((1, 1), dtype=complex)
    for s in range(n):
        out = np.kron(out, PAULI_MATRICES[f.get(s, "I")])
    return p.coeff * out


def pauli_dagger(p: PauliString) -> PauliString:
    return PauliString(p.ops, np.conj(p.coeff))


def operator_sum_to_dense(terms: Iterable[PauliString], n: int) -> np.ndarray:
    out = np.zeros((2**n, 2**n), dtype=complex)
    for t in terms:
        out += pauli_to_dense(t, n)
    return out
