"""Finite-state-machine MPOs for sums of Pauli strings.

Each bond carries automaton states: ``READY`` (no factor placed yet),
``DONE`` (term complete) and one state per distinct remaining suffix of a
term in progress. Terms sharing a suffix share a channel, so ring-wrapping
terms cost one channel each across the chain.
"""
from __future__ import annotations

import numpy as np

from ..lattice import PauliString
from .state import pauli_matrix

READY = ("<ready>",)
DONE = ("<done>",)


class MPO:
    """List of tensors ``W[i]`` with shape ``(w_left, w_right, d_out, d_in)``."""

    def __init__(self, tensors):
        self.tensors = [np.asarray(w) for w in tensors]
        for a, b in zip(self.tensors[:-1], self.tensors[1:]):
            if a.shape[1] != b.shape[0]:
                raise ValueError("inconsistent MPO bonds")

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [w.shape[0] for w in self.tensors] + [self.tensors[-1].shape[1]]

    def to_dense(self) -> np.ndarray:
        if self.n_sites > 12:
            raise ValueError("dense MPO limited to 12 sites")
        m = self.tensors[0][0]  # (wr, d, d)
        for w in self.tensors[1:]:
            # m: (wr, D, D); w: (wl, wr', d, d)
            m = np.einsum("aij,abkl->bikjl", m, w)
            sh = m.shape
            m = m.reshape(sh[0], sh[1] * sh[2], sh[3] * sh[4])
        return m[0]

    def expectation_product(self, local_states) -> complex:
        """``<phi|W|phi>`` for a product state given by local vectors."""
        env = np.ones(1)
        for w, v in zip(self.tensors, local_states):
            v = np.asarray(v)
            env = env @ np.einsum("abst,s,t->ab", w, v.conj(), v)
        return complex(env[0])


def mpo_from_terms(terms, n_sites: int, d: int = 2) -> MPO:
    """Build the automaton MPO of a list of :class:`PauliString` terms."""
    terms = [t for t in terms if t.coeff != 0]
    real = all(np.imag(t.coeff) == 0 and all(op != "Y" for _, op in t.ops) for t in terms)
    dtype = np.float64 if real else np.complex128
    # state tables per bond 0..n
    states = [{READY: 0, DONE: 1} for _ in range(n_sites + 1)]
    trans: list[dict] = [dict() for _ in range(n_sites)]
    eye = np.eye(d)

    def key(term_ops, b):
        return tuple(o for o in term_ops if o[0] >= b)

    def state_index(b, k):
        table = states[b]
        if k not in table:
            table[k] = len(table)
        return table[k]

    for t in terms:
        ops = t.ops
        if not ops:
            raise ValueError("identity terms are not supported in the MPO")
        first, last = ops[0][0], ops[-1][0]
        if last >= n_sites:
            raise ValueError("term exceeds chain length")
        fac = dict(ops)
        for i in range(first, last + 1):
            lk = READY if i == first else key(ops, i)
            rk = DONE if i == last else key(ops, i + 1)
            li = state_index(i, lk)
            ri = state_index(i + 1, rk)
            op = pauli_matrix(fac[i]) if i in fac else eye
            if i == first:
                prev = trans[i].get((li, ri))
                val = t.coeff * op
                trans[i][(li, ri)] = val if prev is None else prev + val
            else:
                trans[i][(li, ri)] = op
    tensors = []
    for i in range(n_sites):
        wl, wr = len(states[i]), len(states[i + 1])
        w = np.zeros((wl, wr, d, d), dtype=dtype)
        w[0, 0] = eye
        w[1, 1] = eye
        for (li, ri), op in trans[i].items():
            w[li, ri] += op.real if real else op
        tensors.append(w)
    tensors[0] = tensors[0][0:1]
    tensors[-1] = tensors[-1][:, 1:2]
    return MPO(tensors)


def mpo_from_hamiltonian(h) -> MPO:
    """MPO of a :class:`~dwaspt.models.HamiltonianTerms`."""
    return mpo_from_terms(h.terms, h.n_sites)
