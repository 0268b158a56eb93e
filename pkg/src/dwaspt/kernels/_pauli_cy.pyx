# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Pauli-string kernels on dense statevectors.

A string is given in symplectic form: ``x`` and ``z`` bit masks over the
basis index plus a scalar ``phase``; it maps ``|i>`` to
``phase * (-1)^popcount(i & z) |i ^ x>``.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()

cdef extern from *:
    int __builtin_parityll(unsigned long long) nogil

ctypedef fused scalar_t:
    double
    double complex


def apply_pauli_sum(scalar_t[::1] v, uint64_t[::1] xmasks, uint64_t[::1] zmasks,
                    scalar_t[::1] phases, scalar_t[::1] out):
    """Accumulate ``out += sum_t P_t v`` in place."""
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t nt = xmasks.shape[0]
    cdef Py_ssize_t t, i
    cdef uint64_t x, z
    cdef scalar_t ph
    with nogil:
        for t in range(nt):
            x = xmasks[t]
            z = zmasks[t]
            ph = phases[t]
            for i in range(n):
                if __builtin_parityll(<uint64_t>i & z):
                    out[<Py_ssize_t>(<uint64_t>i ^ x)] -= ph * v[i]
                else:
                    out[<Py_ssize_t>(<uint64_t>i ^ x)] += ph * v[i]


def pauli_expectation(scalar_t[::1] v, uint64_t x, uint64_t z, scalar_t phase):
    """Return ``<v| P |v>`` without forming ``P v``."""
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef scalar_t acc = 0
    cdef scalar_t term
    with nogil:
        for i in range(n):
            if scalar_t is double:
                term = v[<Py_ssize_t>(<uint64_t>i ^ x)] * v[i]
            else:
                term = v[<Py_ssize_t>(<uint64_t>i ^ x)].conjugate() * v[i]
            if __builtin_parityll(<uint64_t>i & z):
                acc -= term
            else:
                acc += term
    return phase * acc
