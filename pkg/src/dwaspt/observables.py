"""Correlators, string orders and entanglement diagnostics of doubled states.

Every function accepts either a dense :class:`~dwaspt.ed.DenseState` or an
:class:`~dwaspt.mps.MPS`; both expose ``layout``, ``expectation``,
``relative_overlap`` and ``schmidt_values``. All quantities are ratios, so
neither the state norm nor the relative-state normalization matters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeLayout, PauliString


def _sz(layout: LatticeLayout, j: int, layer: str) -> tuple[int, str]:
    return layout.sigma(j, layer), "Z"


@dataclass(frozen=True)
class RelativeState:
    """Unnormalized product of rung Bell pairs ``sum_s |s>_u |s>_l``.

    On the interleaved path every rung is the adjacent pair (2r, 2r+1), so
    the MPS has bond dimension 1 between rungs and 2 inside a rung.
    """

    layout: LatticeLayout

    def __post_init__(self):
        if not self.layout.doubled:
            raise ValueError("relative state needs the doubled layout")

    def as_mps(self):
        from .mps import MPS

        left = np.eye(2).reshape(1, 2, 2)
        right = np.eye(2).reshape(2, 2, 1)
        tensors = []
        for _ in range(self.layout.n_sites // 2):
            tensors += [left.copy(), right.copy()]
        return MPS(tensors, self.layout)

    def as_dense(self) -> np.ndarray:
        pair = np.array([1.0, 0.0, 0.0, 1.0])
        v = np.ones(1)
        for _ in range(self.layout.n_sites // 2):
            v = np.kron(v, pair)
        return v

    def overlap(self, state, p: PauliString | None = None) -> complex:
        """``<<1| P |state>>`` evaluated by the state's own contraction."""
        if state.layout != self.layout:
            raise ValueError("relative state and state live on different layouts")
        return state.relative_overlap(p)


def renyi2_string(layout: LatticeLayout, i: int, j: int) -> PauliString:
    """``sz_{i,u} sz_{j,u} sz_{i,l} sz_{j,l}`` (upper factor conjugated, a no-op for Z)."""
    up = PauliString.from_ops([_sz(layout, i, "u"), _sz(layout, j, "u")]).conjugate()
    lo = PauliString.from_ops([_sz(layout, i, "l"), _sz(layout, j, "l")])
    return up * lo


def renyi2_correlator(state, i: int, j: int) -> float:
    """Renyi-2 correlator ``Tr[sz sz rho sz sz rho] / Tr[rho^2]``; 1 when i == j."""
    if i == j:
        return 1.0
    return float(np.real(state.expectation(renyi2_string(state.layout, i, j))))


def _rmax(L: int) -> int:
    return L // 2


def chi_renyi2(state) -> float:
    """``(2/L) sum_{r=1}^{L/2} C^II(0, r)``; odd L sums to floor(L/2)."""
    L = state.layout.L
    return 2.0 / L * sum(renyi2_correlator(state, 0, r) for r in range(1, _rmax(L) + 1))


def linear_correlator(state, i: int, j: int, denominator: complex | None = None) -> float:
    """``<<1| sz_{i,u} sz_{j,u} |rho>> / <<1|rho>> = Tr[rho sz_i sz_j] / Tr[rho]``."""
    if denominator is None:
        denominator = state.relative_overlap(None)
    if abs(denominator) < 1e-300:
        raise ZeroDivisionError("vanishing trace <<1|rho>>")
    if i == j:
        return 1.0
    lay = state.layout
    op = PauliString.from_ops([_sz(lay, i, "u"), _sz(lay, j, "u")])
    return float(np.real(state.relative_overlap(op) / denominator))


def chi_linear(state, denominator: complex | None = None) -> float:
    L = state.layout.L
    if denominator is None:
        denominator = state.relative_overlap(None)
    return 2.0 / L * sum(linear_correlator(state, 0, r, denominator) for r in range(1, _rmax(L) + 1))


def _check_k(layout: LatticeLayout, k: int):
    kmax = layout.L if layout.periodic else layout.L - 1
    if not 1 <= k <= kmax:
        raise ValueError(f"string length k={k} outside [1, {kmax}]")


def string_operator(layout: LatticeLayout, k: int, layer: str) -> PauliString:
    """``tz_{1/2} [prod_{j=1}^k sx_j] tz_{k+1/2}`` on one layer of the doubled path."""
    _check_k(layout, k)
    ops = [(layout.tau(0, layer), "Z")]
    ops += [(layout.sigma(j, layer), "X") for j in range(1, k + 1)]
    ops.append((layout.tau(k, layer), "Z"))
    return PauliString.from_ops(ops)


def string_renyi2(state, k: int) -> float:
    lay = state.layout
    op = string_operator(lay, k, "u").conjugate() * string_operator(lay, k, "l")
    return float(np.real(state.expectation(op)))


def string_linear(state, k: int, denominator: complex | None = None) -> float:
    if denominator is None:
        denominator = state.relative_overlap(None)
    op = string_operator(state.layout, k, "u")
    return float(np.real(state.relative_overlap(op) / denominator))


def entropy_from_schmidt(s: np.ndarray) -> float:
    """Von Neumann entropy (nats) of Schmidt values ``s``."""
    w = np.asarray(s, dtype=float) ** 2
    w = w / w.sum()
    w = w[w > 1e-300]
    return float(-np.sum(w * np.log(w)))


def spectrum_from_schmidt(s: np.ndarray, n: int | None = None) -> list[float]:
    """Entanglement spectrum levels ``-ln lambda^2`` in ascending order."""
    w = np.asarray(s, dtype=float) ** 2
    w = np.sort(w[w > 0] / w.sum())[::-1]
    if n is not None:
        w = w[:n]
    return (-np.log(w)).tolist()


def _prefix_bond(state, region) -> int:
    """Translate a region into the path bond whose left side equals it."""
    lay = state.layout
    if isinstance(region, (int, np.integer)):
        return int(region)
    sites = sorted(int(s) for s in region)
    if not sites:
        return 0
    if sites != list(range(sites[0], sites[0] + len(sites))):
        raise ValueError("region is not contiguous on the path")
    if sites[0] == 0:
        return len(sites)
    spc = lay.sites_per_cell
    if lay.periodic and sites[0] % spc == 0 and len(sites) % spc == 0:
        # a block of whole cells on a translation-invariant ring is equivalent to the prefix
        return len(sites)
    raise ValueError("region cannot be rotated onto an MPS prefix; use the dense oracle")


def entanglement_entropy(state, region) -> float:
    """``S_A`` in nats for a prefix (or, on a ring, a whole-cell block) of the path."""
    return entropy_from_schmidt(state.schmidt_values(_prefix_bond(state, region)))


def entanglement_spectrum(state, region, n: int = 20) -> list[float]:
    return spectrum_from_schmidt(state.schmidt_values(_prefix_bond(state, region)), n)


def default_string_length(L: int) -> int:
    return max(1, L // 2 - 1)


@dataclass
class ObservableRecord:
    """All measured quantities at one (L, p_zz) point."""

    L: int
    chi_II: float
    chi_I: float
    C_II: list[float]
    C_I: list[float]
    k: int
    S1: float
    S2: float
    S1_all: list[float]
    S2_all: list[float]
    ee_half: float
    ee_region: float
    es_half: list[float]
    sx_profile: list[float]
    trace_ratio: float = 1.0
    odd_L: bool = False
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)


def symmetry_overlaps(state) -> dict[str, float]:
    """Real parts of ``<psi|U|psi>/<psi|psi>`` for the four per-layer flips.

    A symmetric Choi vector gives +1 or -1 for each flip.
    """
    from .models import symmetry_generators

    return {name: float(state.expectation(u).real) for name, u in symmetry_generators(state.layout).items()}


def measure_all(state, k: int | None = None, es_levels: int = 20, region_sites: int = 8) -> dict:
    """Evaluate every observable on ``state``; returns a plain dict."""
    lay = state.layout
    L = lay.L
    if k is None:
        k = default_string_length(L)
    denom = state.relative_overlap(None)
    rmax = _rmax(L)
    c2 = [renyi2_correlator(state, 0, r) for r in range(1, rmax + 1)]
    c1 = [linear_correlator(state, 0, r, denom) for r in range(1, rmax + 1)]
    kmax = L - 1
    s1_all = [string_linear(state, kk, denom) for kk in range(1, kmax + 1)]
    s2_all = [string_renyi2(state, kk) for kk in range(1, kmax + 1)]
    spectra = state.bond_spectra()
    half = 4 * (L // 2)
    sx = [entropy_from_schmidt(spectra[2 * x]) for x in range(1, 2 * L)]
    rec = ObservableRecord(
        L=L,
        chi_II=2.0 / L * sum(c2),
        chi_I=2.0 / L * sum(c1),
        C_II=c2,
        C_I=c1,
        k=k,
        S1=s1_all[k - 1],
        S2=s2_all[k - 1],
        S1_all=s1_all,
        S2_all=s2_all,
        ee_half=entropy_from_schmidt(spectra[half]),
        ee_region=entropy_from_schmidt(spectra[region_sites]),
        es_half=spectrum_from_schmidt(spectra[half], es_levels),
        sx_profile=sx,
        odd_L=bool(L % 2),
    )
    return rec.as_dict()
