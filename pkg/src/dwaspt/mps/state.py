"""Open-boundary matrix-product states with a tracked canonical center."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..lattice import LatticeLayout, PAULI_MATRICES, PauliString

_PAULI_REAL = {
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


def pauli_matrix(label: str) -> np.ndarray:
    if label in _PAULI_REAL:
        return _PAULI_REAL[label]
    return PAULI_MATRICES[label]


@dataclass(frozen=True)
class TruncationPolicy:
    """Bond truncation: keep at most ``max_bond`` values above ``svd_floor``.

    ``svd_floor`` applies to Schmidt values of the normalized state;
    ``error_budget`` is the per-gate discarded weight above which a warning
    record is emitted.
    """

    max_bond: int = 128
    svd_floor: float = 1e-6
    error_budget: float = 1e-4

    def __post_init__(self):
        if self.max_bond < 1:
            raise ValueError("max_bond must be >= 1")
        if self.svd_floor < 0:
            raise ValueError("svd_floor must be >= 0")


def truncated_svd(m: np.ndarray, policy: TruncationPolicy | None):
    """SVD of ``m`` cut by ``policy``; returns ``U, S, Vh, discarded_weight``.

    The discarded weight is relative to the full squared norm.
    """
    try:
        u, s, vh = scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        u, s, vh = scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")
    total = float(np.sum(s**2))
    if total == 0.0:
        raise ValueError("zero state in SVD")
    if policy is None:
        keep = int(np.sum(s > 0)) or 1
    else:
        rel = s / math.sqrt(total)
        keep = int(np.sum(rel > policy.svd_floor))
        keep = max(1, min(keep, policy.max_bond))
    disc = float(np.sum(s[keep:] ** 2)) / total
    return u[:, :keep], s[:keep], vh[:keep], disc


class MPS:
    """Finite MPS; tensors have shape ``(D_left, d, D_right)``.

    Bond ``b`` sits between sites ``b-1`` and ``b``. ``center`` is the
    orthogonality center when the gauge is known (``None`` otherwise).
    ``log_norm`` accumulates the log of every scalar divided out of the
    state, so the unnormalized vector is ``exp(log_norm)`` times the stored one.
    """

    def __init__(self, tensors, layout: LatticeLayout | None = None, center: int | None = None,
                 log_norm: float = 0.0):
        self.tensors = [np.asarray(t) for t in tensors]
        for t in self.tensors:
            if t.ndim != 3:
                raise ValueError("MPS tensors must be rank 3")
        for a, b in zip(self.tensors[:-1], self.tensors[1:]):
            if a.shape[2] != b.shape[0]:
                raise ValueError("inconsistent bond dimensions")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("open boundary bonds must have dimension 1")
        if layout is None:
            layout = LatticeLayout(max(1, len(self.tensors) // 4), doubled=True)
        self.layout = layout
        self.center = center
        self.log_norm = float(log_norm)
        self.schmidt: dict[int, np.ndarray] = {}
        self.trunc_log: list[float] = []
        self.warnings: list[str] = []

    # construction -----------------------------------------------------
    @classmethod
    def product_state(cls, local_states, layout: LatticeLayout | None = None) -> "MPS":
        tensors = [np.asarray(v).reshape(1, -1, 1) for v in local_states]
        out = cls(tensors, layout, center=None)
        out.canonicalize(0)
        return out

    @classmethod
    def random(cls, layout: LatticeLayout, bond: int, seed: int = 0, d: int = 2) -> "MPS":
        rng = np.random.default_rng(seed)
        n = layout.n_sites
        dims = [1] + [min(bond, d ** min(b, n - b)) for b in range(1, n)] + [1]
        tensors = [rng.standard_normal((dims[i], d, dims[i + 1])) for i in range(n)]
        out = cls(tensors, layout)
        out.canonicalize(0)
        out.normalize()
        out.log_norm = 0.0
        return out

    @classmethod
    def from_dense(cls, vec: np.ndarray, layout: LatticeLayout, policy: TruncationPolicy | None = None) -> "MPS":
        n = layout.n_sites
        vec = np.asarray(vec)
        if vec.shape != (2**n,):
            raise ValueError("vector does not match layout")
        nrm = np.linalg.norm(vec)
        rest = (vec / nrm).reshape(1, -1)
        tensors = []
        for i in range(n - 1):
            dl = rest.shape[0]
            m = rest.reshape(dl * 2, -1)
            u, s, vh, _ = truncated_svd(m, policy)
            tensors.append(u.reshape(dl, 2, -1))
            rest = s[:, None] * vh
        tensors.append(rest.reshape(rest.shape[0], 2, 1))
        return cls(tensors, layout, center=n - 1, log_norm=math.log(nrm))

    def copy(self) -> "MPS":
        out = MPS([t.copy() for t in self.tensors], self.layout, self.center, self.log_norm)
        out.schmidt = {k: v.copy() for k, v in self.schmidt.items()}
        out.trunc_log = list(self.trunc_log)
        out.warnings = list(self.warnings)
        return out

    # properties -------------------------------------------------------
    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[0] for t in self.tensors] + [1]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    @property
    def dtype(self):
        return np.result_type(*self.tensors)

    @property
    def truncation_error(self) -> float:
        return float(sum(self.trunc_log))

    def to_dense(self) -> np.ndarray:
        if self.n_sites > 24:
            raise ValueError("to_dense is limited to 24 sites")
        v = self.tensors[0].reshape(-1, self.tensors[0].shape[2])
        for t in self.tensors[1:]:
            v = (v @ t.reshape(t.shape[0], -1)).reshape(-1, t.shape[2])
        return v.reshape(-1)

    # gauge ------------------------------------------------------------
    def _shift_right(self, i: int):
        t = self.tensors[i]
        dl, d, dr = t.shape
        q, r = np.linalg.qr(t.reshape(dl * d, dr))
        self.tensors[i] = q.reshape(dl, d, -1)
        self.tensors[i + 1] = np.tensordot(r, self.tensors[i + 1], axes=(1, 0))

    def _shift_left(self, i: int):
        t = self.tensors[i]
        dl, d, dr = t.shape
        q, r = np.linalg.qr(t.reshape(dl, d * dr).T)
        self.tensors[i] = q.T.reshape(-1, d, dr)
        self.tensors[i - 1] = np.tensordot(self.tensors[i - 1], r.T, axes=(2, 0))

    def canonicalize(self, center: int = 0) -> "MPS":
        """Bring the state into mixed canonical form around ``center``."""
        n = self.n_sites
        if not 0 <= center < n:
            raise IndexError("center out of range")
        for i in range(center):
            self._shift_right(i)
        for i in range(n - 1, center, -1):
            self._shift_left(i)
        self.center = center
        return self

    def move_center(self, c: int) -> "MPS":
        if self.center is None:
            return self.canonicalize(c)
        while self.center < c:
            self._shift_right(self.center)
            self.center += 1
        while self.center > c:
            self._shift_left(self.center)
            self.center -= 1
        return self

    def norm(self) -> float:
        if self.center is None:
            return math.sqrt(abs(self._raw_overlap(self, None)))
        return float(np.linalg.norm(self.tensors[self.center]))

    def normalize(self) -> "MPS":
        if self.center is None:
            self.canonicalize(0)
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize a zero state")
        self.tensors[self.center] = self.tensors[self.center] / nrm
        self.log_norm += math.log(nrm)
        return self

    def is_canonical(self, atol: float = 1e-12) -> bool:
        if self.center is None:
            return False
        for i, t in enumerate(self.tensors):
            dl, d, dr = t.shape
            if i < self.center:
                m = t.reshape(dl * d, dr)
                if not np.allclose(m.conj().T @ m, np.eye(dr), atol=atol):
                    return False
            elif i > self.center:
                m = t.reshape(dl, d * dr)
                if not np.allclose(m @ m.conj().T, np.eye(dl), atol=atol):
                    return False
        return True

    # spectra ----------------------------------------------------------
    def schmidt_values(self, bond: int) -> np.ndarray:
        """Normalized Schmidt values across ``bond`` (descending)."""
        n = self.n_sites
        if not 0 <= bond <= n:
            raise IndexError("bond out of range")
        if bond in (0, n):
            return np.ones(1)
        self.move_center(bond)
        t = self.tensors[bond]
        s = scipy.linalg.svd(t.reshape(t.shape[0], -1), compute_uv=False)
        return s / np.linalg.norm(s)

    def bond_spectra(self) -> list[np.ndarray]:
        """Schmidt values at every bond 0..n from one left-to-right SVD sweep."""
        n = self.n_sites
        self.move_center(0)
        out = [np.ones(1)]
        for i in range(n - 1):
            t = self.tensors[i]
            dl, d, dr = t.shape
            u, s, vh, _ = truncated_svd(t.reshape(dl * d, dr), None)
            self.tensors[i] = u.reshape(dl, d, -1)
            self.tensors[i + 1] = np.tensordot(s[:, None] * vh, self.tensors[i + 1], axes=(1, 0))
            out.append(s / np.linalg.norm(s))
        self.center = n - 1
        out.append(np.ones(1))
        return out

    # contractions -----------------------------------------------------
    def _factors(self, p: PauliString | None) -> dict[int, np.ndarray]:
        if p is None:
            return {}
        return {s: pauli_matrix(op) for s, op in p.ops}

    def expectation(self, p: PauliString) -> complex:
        """``<psi|P|psi> / <psi|psi>`` using the canonical center."""
        if p.is_identity:
            return complex(p.coeff)
        if self.center is None:
            self.canonicalize(0)
        ops = self._factors(p)
        sup = p.support
        i0 = min(sup[0], self.center)
        i1 = max(sup[-1], self.center)
        d0 = self.tensors[i0].shape[0]
        env = np.eye(d0, dtype=self.dtype)
        for i in range(i0, i1 + 1):
            a = self.tensors[i]
            t = np.tensordot(env, a, axes=(1, 0))
            if i in ops:
                t = np.tensordot(t, ops[i], axes=(1, 1)).transpose(0, 2, 1)
            env = np.tensordot(a.conj(), t, axes=([0, 1], [0, 1]))
        val = np.trace(env)
        nrm2 = np.linalg.norm(self.tensors[self.center]) ** 2
        return complex(p.coeff * val / nrm2)

    def apply_pauli(self, p: PauliString) -> "MPS":
        """Return ``P|psi>`` (the gauge is preserved since Paulis are unitary)."""
        out = self.copy()
        for s, op in p.ops:
            out.tensors[s] = np.tensordot(pauli_matrix(op), out.tensors[s], axes=(1, 1)).transpose(1, 0, 2)
        if p.coeff != 1:
            c = out.center if out.center is not None else 0
            out.tensors[c] = out.tensors[c] * p.coeff
        return out

    def _raw_overlap(self, other: "MPS", p: PauliString | None) -> complex:
        """``<self| P |other>`` of the stored tensors (no norm logs)."""
        if self.n_sites != other.n_sites:
            raise ValueError("overlap between states of different length")
        ops = self._factors(p)
        env = np.ones((1, 1))
        for i, (a, b) in enumerate(zip(self.tensors, other.tensors)):
            t = np.tensordot(env, b, axes=(1, 0))
            if i in ops:
                t = np.tensordot(t, ops[i], axes=(1, 1)).transpose(0, 2, 1)
            env = np.tensordot(a.conj(), t, axes=([0, 1], [0, 1]))
        coeff = 1.0 if p is None else p.coeff
        return complex(coeff * env[0, 0])

    def overlap(self, other: "MPS", include_norm_log: bool = True) -> complex:
        """``<self|other>``, rescaled by both norm logs unless disabled."""
        raw = self._raw_overlap(other, None)
        if include_norm_log:
            return raw * math.exp(self.log_norm + other.log_norm)
        return raw

    def relative_overlap(self, p: PauliString | None = None) -> complex:
        """``<<1| P |psi>>`` with the unnormalized rung Bell product ``<<1|``.

        Requires the doubled layout, whose rungs are path pairs (2r, 2r+1).
        The stored tensors are used; the result is a ratio-ready scalar.
        """
        if not self.layout.doubled:
            raise ValueError("relative state needs the doubled layout")
        ops = self._factors(p)
        env = np.ones(1)
        log_scale = 0.0
        for r in range(self.n_sites // 2):
            a = self.tensors[2 * r]
            b = self.tensors[2 * r + 1]
            if 2 * r in ops:
                a = np.tensordot(ops[2 * r], a, axes=(1, 1)).transpose(1, 0, 2)
            if 2 * r + 1 in ops:
                b = np.tensordot(ops[2 * r + 1], b, axes=(1, 1)).transpose(1, 0, 2)
            ea = np.tensordot(env, a, axes=(0, 0))  # (s, m)
            m = np.tensordot(ea, b, axes=(1, 0))  # (s, t, r)
            env = m[0, 0] + m[1, 1]
            nrm = np.linalg.norm(env)
            if nrm > 0:
                env = env / nrm
                log_scale += math.log(nrm)
        coeff = 1.0 if p is None else p.coeff
        return complex(coeff * env[0] * math.exp(log_scale))


def sandwich(bra: MPS, p: PauliString | None, ket: MPS) -> complex:
    """``<bra| P |ket>`` of the stored tensors."""
    return bra._raw_overlap(ket, p)
