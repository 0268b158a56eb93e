import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dwaspt.lattice import (
    LatticeLayout,
    PauliString,
    SizeGuardError,
    commutes,
    pauli_multiply,
    pauli_to_dense,
)


def test_flatten_examples():
    lay = LatticeLayout(4)
    assert lay.flatten("u", "sigma", 0) == 0
    assert lay.flatten("l", "sigma", 0) == 1
    assert lay.flatten("u", "tau", 1) == 6


@pytest.mark.parametrize("L", range(2, 17))
def test_flatten_bijection(L):
    lay = LatticeLayout(L)
    seen = set()
    for i in range(lay.n_sites):
        lab = lay.unflatten(i)
        assert lay.flatten(*lab) == i
        seen.add(lab)
    assert len(seen) == 4 * L


def test_translation_shifts_by_four():
    lay = LatticeLayout(5)
    for j in range(5):
        assert lay.sigma(j + 1, "l") == (lay.sigma(j, "l") + 4) % lay.n_sites
        assert lay.tau(j + 1) == (lay.tau(j) + 4) % lay.n_sites


def test_rungs_alternate_layers():
    lay = LatticeLayout(3)
    for r in range(lay.n_rungs):
        a, b = lay.rung_sites(r)
        assert lay.unflatten(a)[0] == "u" and lay.unflatten(b)[0] == "l"
        assert lay.unflatten(a)[1:] == lay.unflatten(b)[1:]


def test_flatten_out_of_range():
    with pytest.raises(IndexError):
        LatticeLayout(3).flatten("u", "sigma", 3)
    with pytest.raises(IndexError):
        LatticeLayout(3, "open").sigma(3)


def test_multiply_examples():
    x0 = PauliString(((0, "X"),))
    z0 = PauliString(((0, "Z"),))
    xz = pauli_multiply(x0, z0)
    assert xz.ops == ((0, "Y"),) and xz.coeff == -1j
    zz = PauliString.from_ops([(0, "Z"), (1, "Z")])
    sq = pauli_multiply(zz, zz)
    assert sq.is_identity and sq.coeff == 1
    z1 = PauliString(((1, "Z"),))
    p = pauli_multiply(x0, z1)
    assert p.ops == ((0, "X"), (1, "Z")) and p.coeff == 1
    assert commutes(x0, z1) and not commutes(x0, z0)


def test_dense_examples():
    assert np.array_equal(pauli_to_dense(PauliString(((0, "Z"),)), 1), np.diag([1, -1]))
    assert np.array_equal(pauli_to_dense(PauliString(((0, "X"),)), 1), [[0, 1], [1, 0]])
    zz = PauliString.from_ops([(0, "Z"), (1, "Z")])
    assert np.array_equal(pauli_to_dense(zz, 2), np.diag([1, -1, -1, 1]))


def test_dense_size_guard():
    with pytest.raises(SizeGuardError):
        pauli_to_dense(PauliString(((0, "Z"),)), 15)


pauli_strings = st.lists(
    st.tuples(st.integers(0, 5), st.sampled_from("XYZ")), max_size=6
).map(lambda ops: PauliString.from_ops(ops))


@settings(max_examples=60, deadline=None)
@given(pauli_strings, pauli_strings)
def test_multiply_matches_dense(a, b):
    da, db = pauli_to_dense(a, 6), pauli_to_dense(b, 6)
    assert np.array_equal(da @ db, pauli_to_dense(pauli_multiply(a, b), 6))
    anti = np.allclose(da @ db, -db @ da)
    assert commutes(a, b) == (not anti or np.allclose(da @ db, db @ da))


@settings(max_examples=30, deadline=None)
@given(pauli_strings)
def test_conjugate_matches_dense(a):
    assert np.array_equal(pauli_to_dense(a.conjugate(), 6), pauli_to_dense(a, 6).conj())
