"""Pauli decoherence channels as Kraus maps and as filter gates on Choi vectors.

A channel ``rho -> (1-p) rho + p g rho g`` with a Pauli string ``g`` becomes,
on the Choi vector ``|rho>> = sum_ab rho_ba |a>_u |b>_l``, the operator
``(1-p) I + p (g^* (x) g) = (1-2p)^(1/2) exp(tau h)`` with ``h = g^* (x) g``
and ``tanh(tau) = p / (1-p)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import (
    MAX_DENSE_VECTOR_SITES,
    LatticeLayout,
    PauliString,
    SizeGuardError,
    commutes,
    pauli_multiply,
    pauli_to_dense,
)
from .models import build_u_dw, clifford_conjugate, embed_string

CHANNEL_KINDS = ("zz", "x", "tzxtz")
PROJECTIVE = "projective"

# density matrices are materialized only up to this many single-layer sites
MAX_DENSITY_SITES = 12


def tau_weight(p: float):
    """Filter weight ``artanh(p / (1-p))``; the string ``"projective"`` at p = 1/2."""
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"probability {p} outside [0, 1/2]")
    if p == 0.5:
        return PROJECTIVE
    return math.atanh(p / (1.0 - p))


def px_of_pzz(p_zz: float, J_zz: float) -> float:
    """Locked X-channel strength ``1/2 - (1/2)(1 - 2 p_zz)^(1/J_zz)``."""
    if J_zz <= 0:
        raise ValueError("J_zz must be positive")
    if not 0.0 <= p_zz <= 0.5:
        raise ValueError(f"probability {p_zz} outside [0, 1/2]")
    return 0.5 - 0.5 * (1.0 - 2.0 * p_zz) ** (1.0 / J_zz)


def norm_constant(p_zz: float, p_x: float, L: int) -> float:
    """Scalar ``(1-2p_zz)^(L/2) (1-2p_x)^(L/2)`` dropped from the filtered state."""
    return (1.0 - 2.0 * p_zz) ** (L / 2) * (1.0 - 2.0 * p_x) ** (L / 2)


@dataclass(frozen=True)
class ChannelSpec:
    """One product channel ``prod_j E_j`` over a set of cells.

    kind: ``"zz"`` (sigma_j^z sigma_{j+1}^z), ``"x"`` (sigma_j^x) or
    ``"tzxtz"`` (tau^z_{j-1/2} sigma^x_j tau^z_{j+1/2}).
    """

    kind: str
    p: float
    cells: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if not 0.0 <= self.p <= 0.5:
            raise ValueError(f"probability {self.p} outside [0, 1/2]")

    def cell_range(self, L: int) -> tuple[int, ...]:
        return tuple(range(L)) if self.cells is None else tuple(self.cells)


def channel_operator(kind: str, j: int, layout: LatticeLayout) -> PauliString | None:
    """Single-layer Pauli string ``g_j`` of a channel factor (None if it leaves an open chain)."""
    single = layout.single_layer()
    L = single.L
    if kind == "zz":
        if not single.periodic and j + 1 >= L:
            return None
        return PauliString.from_ops([(single.sigma(j), "Z"), (single.sigma(j + 1), "Z")])
    if kind == "x":
        return PauliString(((single.sigma(j), "X"),))
    if kind == "tzxtz":
        circ = build_u_dw(L, single.boundary)
        return clifford_conjugate(circ, PauliString(((single.sigma(j), "X"),)))
    raise ValueError(f"unknown channel kind {kind!r}")


def kraus_operators(spec: ChannelSpec, layout: LatticeLayout) -> list[list[PauliString]]:
    """Per-cell Kraus sets ``[sqrt(1-p) I, sqrt(p) g_j]`` as Pauli strings."""
    out = []
    for j in spec.cell_range(layout.L):
        g = channel_operator(spec.kind, j, layout)
        if g is None:
            continue
        out.append([PauliString((), math.sqrt(1 - spec.p)), g * math.sqrt(spec.p)])
    return out


def _pauli_action(p: PauliString, n: int):
    """Permutation and phase vector with ``P|i> = phase[i] |perm[i]>``."""
    x, z, ph = p.masks(n)
    idx = np.arange(2**n, dtype=np.int64)
    parity = np.zeros(2**n, dtype=np.int64)
    zz = idx & z
    while np.any(zz):
        parity ^= zz & 1
        zz = zz >> 1
    return idx ^ x, ph * (1 - 2 * parity)


def apply_pauli_conjugation(rho: np.ndarray, g: PauliString, n: int) -> np.ndarray:
    """``g rho g^dagger`` for a dense ``rho`` on ``n`` sites."""
    perm, phase = _pauli_action(g, n)
    out = np.empty_like(rho, dtype=complex)
    scaled = (phase[:, None] * rho) * np.conj(phase)[None, :]
    out[np.ix_(perm, perm)] = scaled
    return out


def apply_channel_to_density_matrix(rho: np.ndarray, spec: ChannelSpec, layout: LatticeLayout,
                                    atol: float = 1e-10) -> np.ndarray:
    """Kraus-form application ``rho -> prod_j [(1-p) rho + p g_j rho g_j]``."""
    single = layout.single_layer()
    n = single.n_sites
    if n > MAX_DENSITY_SITES:
        raise SizeGuardError(f"density matrices are limited to {MAX_DENSITY_SITES} sites")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2**n, 2**n):
        raise ValueError(f"rho must be {2**n}x{2**n}")
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise ValueError("rho is not Hermitian")
    for j in spec.cell_range(single.L):
        g = channel_operator(spec.kind, j, single)
        if g is None:
            continue
        rho = (1 - spec.p) * rho + spec.p * apply_pauli_conjugation(rho, g, n)
    return rho


def choi_vectorize(rho: np.ndarray) -> np.ndarray:
    """``rho -> |rho>>`` on the interleaved doubled path (u = bra index, l = ket index)."""
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.shape != (dim, dim) or 1 << n != dim:
        raise ValueError("rho must be square with a power-of-two dimension")
    if 2 * n > MAX_DENSE_VECTOR_SITES:
        raise SizeGuardError("Choi vector would exceed the dense size guard")
    t = np.asarray(rho).T.reshape((2,) * (2 * n))
    order = [ax for s in range(n) for ax in (s, n + s)]
    return np.ascontiguousarray(t.transpose(order)).reshape(-1)


def choi_devectorize(vec: np.ndarray) -> np.ndarray:
    """Inverse of :func:`choi_vectorize`."""
    n2 = vec.shape[0].bit_length() - 1
    if n2 % 2:
        raise ValueError("Choi vector must live on an even number of sites")
    n = n2 // 2
    t = np.asarray(vec).reshape((2,) * n2)
    order = [2 * s for s in range(n)] + [2 * s + 1 for s in range(n)]
    return np.ascontiguousarray(t.transpose(order)).reshape(2**n, 2**n).T


@dataclass(frozen=True)
class FilterGate:
    """Non-unitary filter ``(1-2p)^(1/2) exp(tau h) = (1-p) I + p h`` on the doubled path.

    ``h = conj(g)_u (x) g_l`` squares to the identity. At ``p = 1/2`` the
    weight is the projective flag and the gate is ``(I + h) / 2``.
    """

    h: PauliString
    p: float
    kind: str = ""
    cell: int = -1

    @property
    def tau(self):
        return tau_weight(self.p)

    @property
    def projective(self) -> bool:
        return self.p == 0.5

    @property
    def support(self) -> tuple[int, ...]:
        return self.h.support

    @property
    def coefficients(self) -> tuple[float, float]:
        """``(a, b)`` with gate ``= a I + b h``."""
        return 1.0 - self.p, self.p

    @property
    def is_identity(self) -> bool:
        return self.p == 0.0 or self.h.is_identity

    def local_matrix(self) -> np.ndarray:
        """Dense gate on its support sites, in ascending site order."""
        sup = self.support
        local = PauliString(tuple((sup.index(s), op) for s, op in self.h.ops), self.h.coeff)
        hm = pauli_to_dense(local, len(sup))
        eye = np.eye(2 ** len(sup))
        if self.projective:
            return 0.5 * (eye + hm)
        t = self.tau
        return math.sqrt(1 - 2 * self.p) * (math.cosh(t) * eye + math.sinh(t) * hm)


def build_filter_gates(spec: ChannelSpec, layout: LatticeLayout) -> list[FilterGate]:
    """One filter gate per cell for ``spec`` on the doubled ``layout``."""
    doubled = layout.doubled_layout()
    gates = []
    for j in spec.cell_range(doubled.L):
        g = channel_operator(spec.kind, j, doubled)
        if g is None:
            continue
        h_u = embed_string(g, doubled, "u").conjugate()
        h_l = embed_string(g, doubled, "l")
        gates.append(FilterGate(pauli_multiply(h_u, h_l), spec.p, spec.kind, j))
    return gates


def channel_specs(p_zz: float, J_zz: float, mode: str = "paired") -> list[ChannelSpec]:
    """Channels applied to the dual initial state, in application order (ZZ first)."""
    specs = [ChannelSpec("zz", p_zz)]
    if mode == "paired":
        specs.append(ChannelSpec("tzxtz", px_of_pzz(p_zz, J_zz)))
    elif mode != "simplified":
        raise ValueError(f"unknown channel mode {mode!r}")
    return specs


def is_strongly_symmetric(spec: ChannelSpec, generator: PauliString, layout: LatticeLayout) -> bool:
    """Every Kraus operator satisfies ``K U = e^{i theta} U K`` with one common theta.

    The identity branch forces theta = 0, so every Pauli Kraus operator must
    commute with the generator.
    """
    phases = set()
    for kset in kraus_operators(spec, layout):
        for k in kset:
            if k.coeff == 0:
                continue
            phases.add(commutes(k, generator))
    return len(phases) <= 1


def is_strong_symmetric_state(rho: np.ndarray, u: np.ndarray, atol: float = 1e-10) -> bool:
    """``U rho = e^{i theta} rho`` for theta in {0, pi}."""
    ur = u @ rho
    return bool(np.allclose(ur, rho, atol=atol) or np.allclose(ur, -rho, atol=atol))


def is_weak_symmetric_state(rho: np.ndarray, u: np.ndarray, atol: float = 1e-10) -> bool:
    """``U rho U^dagger = rho``."""
    return bool(np.allclose(u @ rho @ u.conj().T, rho, atol=atol))
