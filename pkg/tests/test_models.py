import numpy as np
import pytest

from dwaspt.lattice import LatticeLayout, PauliString, pauli_to_dense
from dwaspt.models import (
    apply_u_dw_to_state,
    build_doubled_hamiltonian,
    build_h0,
    build_h0_dw,
    build_u_dw,
    circuit_to_dense,
    clifford_conjugate,
    cluster_stabilizers,
    conjugate_terms,
    symmetry_generators,
)
from dwaspt.ed import exact_ground_state

# H0 at L = 4, J_zz = 1: free taus (-4) plus the critical Ising ring, whose
# even-parity ground energy is -sum_k 2 cos(k/2) over k = (2n+1) pi / 4
E0_H0_L4_J1 = -4.0 - sum(2 * abs(np.cos((2 * n + 1) * np.pi / 8)) for n in range(4))


def _canon(terms):
    return sorted((t.ops, complex(t.coeff)) for t in terms)


@pytest.mark.parametrize("L", range(2, 9))
@pytest.mark.parametrize("J", [0.0, 0.6, 1.3])
def test_duality_term_for_term(L, J):
    circ = build_u_dw(L)
    assert len(circ) == 2 * L
    image = conjugate_terms(circ, build_h0(L, J))
    assert _canon(image.terms) == _canon(build_h0_dw(L, J).terms)


@pytest.mark.parametrize("L", [2, 3, 4])
def test_spectra_agree(L):
    a = np.linalg.eigvalsh(build_h0(L, 0.6).to_dense())
    b = np.linalg.eigvalsh(build_h0_dw(L, 0.6).to_dense())
    assert np.max(np.abs(a - b)) < 1e-12


def test_h0_examples():
    assert len(build_h0(4, 0.6)) == 12
    assert exact_ground_state(build_h0(2, 0.0)).energy == pytest.approx(-4.0, abs=1e-12)
    assert exact_ground_state(build_h0(4, 1.0)).energy == pytest.approx(E0_H0_L4_J1, abs=1e-10)
    with pytest.raises(ValueError):
        build_h0(1, 0.6)


def test_cluster_ground_state_stabilizers():
    gs = exact_ground_state(build_h0_dw(4, 0.0))
    for s in cluster_stabilizers(4):
        assert gs.state.expectation(s).real == pytest.approx(1.0, abs=1e-10)


def test_conjugation_rules():
    lay = LatticeLayout(4, doubled=False)
    circ = build_u_dw(4)
    zz = PauliString.from_ops([(lay.sigma(0), "Z"), (lay.sigma(1), "Z")])
    assert clifford_conjugate(circ, zz) == zz
    for j in range(4):
        sx = PauliString(((lay.sigma(j), "X"),))
        want = PauliString.from_ops([(lay.tau(j - 1), "Z"), (lay.sigma(j), "X"), (lay.tau(j), "Z")])
        assert clifford_conjugate(circ, sx) == want
        tx = PauliString(((lay.tau(j), "X"),))
        want = PauliString.from_ops([(lay.sigma(j), "Z"), (lay.tau(j), "X"), (lay.sigma(j + 1), "Z")])
        assert clifford_conjugate(circ, tx) == want


@pytest.mark.parametrize("L", [3, 4])
def test_global_flip_image_dense(L):
    lay = LatticeLayout(L, doubled=False)
    circ = build_u_dw(L)
    u = circuit_to_dense(circ)
    for g in symmetry_generators(lay).values():
        img = clifford_conjugate(circ, g)
        assert np.allclose(u @ pauli_to_dense(g, lay.n_sites) @ u.conj().T, pauli_to_dense(img, lay.n_sites))


def test_y_conjugation_dense():
    circ = build_u_dw(3)
    u = circuit_to_dense(circ)
    p = PauliString.from_ops([(0, "Y"), (3, "Y"), (4, "X")], 0.5)
    assert np.allclose(u @ pauli_to_dense(p, 6) @ u.conj().T, pauli_to_dense(clifford_conjugate(circ, p), 6))


def test_circuit_involution(rng):
    circ = build_u_dw(4)
    v = rng.standard_normal(2**8)
    w = apply_u_dw_to_state(circ, v)
    assert np.allclose(apply_u_dw_to_state(circ, w), v)
    assert abs(np.linalg.norm(w) - np.linalg.norm(v)) < 1e-15 * np.linalg.norm(v) * 10


def test_u_dw_maps_plus_to_cluster():
    L = 4
    plus = np.ones(2 ** (2 * L)) / 2**L
    c = apply_u_dw_to_state(build_u_dw(L), plus)
    for s in cluster_stabilizers(L):
        assert np.vdot(c, pauli_to_dense(s, 2 * L) @ c).real == pytest.approx(1.0, abs=1e-12)


def test_u_dw_maps_ground_states():
    L = 3
    a = exact_ground_state(build_h0(L, 0.6)).state.vector
    b = exact_ground_state(build_h0_dw(L, 0.6)).state.vector
    assert abs(np.vdot(b, apply_u_dw_to_state(build_u_dw(L), a))) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("builder,boundary", [(build_h0, "periodic"), (build_h0, "open"),
                                              (build_h0_dw, "periodic")])
def test_terms_commute_with_flips(builder, boundary):
    h = builder(5, 0.6, boundary)
    for g in symmetry_generators(h.layout).values():
        assert all(t.commutes_with(g) for t in h.terms)
    assert all(np.imag(t.coeff) == 0 for t in h.terms)


def test_open_dual_commutes_with_conjugated_flips():
    # the open circuit leaves dangling tau^z factors at the ends, so the
    # dual symmetry is the image of the flips rather than the flips
    h = build_h0_dw(5, 0.6, "open")
    circ = build_u_dw(5, "open")
    for g in symmetry_generators(h.layout).values():
        img = clifford_conjugate(circ, g)
        assert all(t.commutes_with(img) for t in h.terms)


def test_open_chain_duality():
    h = build_h0_dw(4, 0.6, "open")
    a = np.linalg.eigvalsh(build_h0(4, 0.6, "open").to_dense())
    b = np.linalg.eigvalsh(h.to_dense())
    assert np.max(np.abs(a - b)) < 1e-12


def test_doubled_hamiltonian():
    h = build_doubled_hamiltonian(2, 0.6)
    assert len(h) == 12
    for g in symmetry_generators(h.layout).values():
        assert all(t.commutes_with(g) for t in h.terms)
    e_single = np.linalg.eigvalsh(build_h0_dw(2, 0.6).to_dense())[0]
    e_double = np.linalg.eigvalsh(h.to_dense())[0]
    assert e_double == pytest.approx(2 * e_single, abs=1e-12)
