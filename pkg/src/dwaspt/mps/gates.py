"""Non-unitary filter gates ``a I + b h`` applied to an MPS.

The gate is written as a bond-dimension-2 MPO over the span of ``h``
(identity on the sites in between), so supports that are far apart on the
path, including ring-wrapping ones, need no swap network. After the
product the span is brought back to canonical form and truncated.
"""
from __future__ import annotations

import math

import numpy as np

from ..channels import FilterGate
from ..lattice import PauliString
from .state import MPS, TruncationPolicy, pauli_matrix, truncated_svd


def _sum_mpo(a: complex, b: complex, h: PauliString, lo: int, hi: int, dtype):
    """Tensors of ``a I + b h`` on sites lo..hi (bond dimension 2 inside)."""
    fac = dict(h.ops)
    eye = np.eye(2)
    b = b * h.coeff
    out = []
    for i in range(lo, hi + 1):
        op = pauli_matrix(fac[i]) if i in fac else eye
        if lo == hi:
            w = np.zeros((1, 1, 2, 2), dtype=dtype)
            w[0, 0] = a * eye + b * op
        elif i == lo:
            w = np.zeros((1, 2, 2, 2), dtype=dtype)
            w[0, 0] = a * eye
            w[0, 1] = b * op
        elif i == hi:
            w = np.zeros((2, 1, 2, 2), dtype=dtype)
            w[0, 0] = eye
            w[1, 0] = op
        else:
            w = np.zeros((2, 2, 2, 2), dtype=dtype)
            w[0, 0] = eye
            w[1, 1] = op
        out.append(w)
    return out


def _apply_local_mpo(t: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Contract MPO tensor ``w (wl, wr, s, t)`` into MPS tensor ``t (Dl, t, Dr)``."""
    dl, d, dr = t.shape
    wl, wr = w.shape[:2]
    x = np.tensordot(w, t, axes=(3, 1))  # (wl, wr, s, Dl, Dr)
    x = x.transpose(3, 0, 2, 4, 1)  # (Dl, wl, s, Dr, wr)
    return x.reshape(dl * wl, d, dr * wr)


def apply_operator_sum(mps: MPS, a: complex, b: complex, h: PauliString,
                       policy: TruncationPolicy | None) -> float:
    """In place ``|psi> <- (a I + b h)|psi>``, renormalized.

    Returns the total discarded weight of this application.
    """
    if h.is_identity:
        mps.tensors[mps.center or 0] = mps.tensors[mps.center or 0] * (a + b * h.coeff)
        mps.normalize()
        return 0.0
    sup = h.support
    lo, hi = sup[0], sup[-1]
    dtype = np.result_type(mps.dtype, np.asarray(a), np.asarray(b), np.asarray(h.coeff))
    if any(op == "Y" for _, op in h.ops):
        dtype = np.result_type(dtype, np.complex128)
    mps.move_center(lo)
    for i, w in zip(range(lo, hi + 1), _sum_mpo(a, b, h, lo, hi, dtype)):
        mps.tensors[i] = _apply_local_mpo(mps.tensors[i].astype(dtype, copy=False), w)
    # right-to-left QR over the span restores right-canonical tensors past lo
    for i in range(hi, lo, -1):
        mps._shift_left(i)
    mps.center = lo
    disc_total = 0.0
    for i in range(lo, hi):
        t = mps.tensors[i]
        dl, d, dr = t.shape
        u, s, vh, disc = truncated_svd(t.reshape(dl * d, dr), policy)
        disc_total += disc
        mps.tensors[i] = u.reshape(dl, d, -1)
        mps.tensors[i + 1] = np.tensordot(s[:, None] * vh, mps.tensors[i + 1], axes=(1, 0))
        mps.schmidt[i + 1] = s / np.linalg.norm(s)
    mps.center = hi
    mps.normalize()
    mps.trunc_log.append(disc_total)
    if policy is not None and disc_total > policy.error_budget:
        mps.warnings.append(f"truncation {disc_total:.3e} above budget {policy.error_budget:.1e} on sites {lo}-{hi}")
    return disc_total


def apply_filter_gate(mps: MPS, gate: FilterGate, policy: TruncationPolicy | None) -> MPS:
    """Apply ``(1-p) I + p h`` in place and return the state."""
    if gate.is_identity:
        mps.trunc_log.append(0.0)
        return mps
    a, b = gate.coefficients
    apply_operator_sum(mps, a, b, gate.h, policy)
    return mps


def apply_filter_gates(mps: MPS, gates, policy: TruncationPolicy | None) -> MPS:
    for g in gates:
        apply_filter_gate(mps, g, policy)
    return mps


def apply_pauli_product(mps: MPS, p: PauliString) -> MPS:
    """Unitary Pauli string applied site by site; returns a new state."""
    return mps.apply_pauli(p)
