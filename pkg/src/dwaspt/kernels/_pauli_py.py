"""Pure-numpy fallback for the Pauli-string statevector kernels.

Works on the ``(2,) * n`` tensor view of the vector: X flips an axis, Z
multiplies by ``[1, -1]`` along it. Independent of the bit-mask loop used by
the compiled kernel, which makes the two useful as cross-checks.
"""
from __future__ import annotations

import numpy as np

_SIGN = np.array([1.0, -1.0])


def _n_sites(size: int) -> int:
    n = size.bit_length() - 1
    if 1 << n != size:
        raise ValueError("vector length must be a power of two")
    return n


def _apply_masks(v: np.ndarray, x: int, z: int, n: int) -> np.ndarray:
    t = v.reshape((2,) * n) if n else v.reshape(())
    for s in range(n):
        bit = 1 << (n - 1 - s)
        if z & bit:
            shape = [1] * n
            shape[s] = 2
            t = t * _SIGN.reshape(shape)
        if x & bit:
            t = np.flip(t, axis=s)
    return np.ascontiguousarray(t).reshape(-1)


def apply_pauli_sum(v, xmasks, zmasks, phases, out):
    """Accumulate ``out += sum_t P_t v`` in place."""
    n = _n_sites(v.shape[0])
    for x, z, ph in zip(xmasks, zmasks, phases):
        out += ph * _apply_masks(v, int(x), int(z), n)


def pauli_expectation(v, x, z, phase):
    """Return ``<v| P |v>``."""
    n = _n_sites(v.shape[0])
    return phase * np.vdot(v, _apply_masks(v, int(x), int(z), n))
