"""Statevector Pauli kernels: compiled core with a pure-numpy fallback.

The compiled extension is used when it was built and importable; setting
``DWASPT_PURE_PYTHON=1`` forces the fallback. ``BACKEND`` names the active one.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pauli_py

try:
    if os.environ.get("DWASPT_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _pauli_cy as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pauli_py
    BACKEND = "python"

__all__ = ["BACKEND", "apply_pauli_sum", "pauli_expectation", "backend_module"]


def backend_module(name: str | None = None):
    """Return a kernel module by name (``"cython"``/``"python"``), default active."""
    if name is None:
        return _impl
    if name == "python":
        return _pauli_py
    if name == "cython":
        from . import _pauli_cy

        return _pauli_cy
    raise ValueError(f"unknown kernel backend {name!r}")


def _prepare(v, phases):
    complex_phase = np.iscomplexobj(phases) and np.any(np.asarray(phases).imag != 0)
    dtype = np.complex128 if (np.iscomplexobj(v) or complex_phase) else np.float64
    v = np.ascontiguousarray(v, dtype=dtype)
    phases = np.ascontiguousarray(np.asarray(phases).real if dtype == np.float64 else phases, dtype=dtype)
    return v, phases, dtype


def apply_pauli_sum(v, xmasks, zmasks, phases, out=None, backend=None):
    """Return ``out + sum_t P_t v``; ``out`` defaults to zeros.

    Real inputs with real phases stay real; anything else is promoted to
    complex128.
    """
    v, phases, dtype = _prepare(v, phases)
    if out is None:
        out = np.zeros_like(v)
    elif out.dtype != dtype or not out.flags.c_contiguous:
        out = np.ascontiguousarray(out, dtype=dtype)
    xm = np.ascontiguousarray(xmasks, dtype=np.uint64)
    zm = np.ascontiguousarray(zmasks, dtype=np.uint64)
    backend_module(backend).apply_pauli_sum(v, xm, zm, phases, out)
    return out


def pauli_expectation(v, x, z, phase, backend=None):
    v, ph, dtype = _prepare(v, np.array([phase]))
    return complex(backend_module(backend).pauli_expectation(v, np.uint64(x), np.uint64(z), ph[0]))
