import math

import numpy as np
import pytest

from dwaspt.channels import (
    ChannelSpec,
    FilterGate,
    apply_channel_to_density_matrix,
    build_filter_gates,
    channel_operator,
    channel_specs,
    choi_devectorize,
    choi_vectorize,
    is_strong_symmetric_state,
    is_strongly_symmetric,
    is_weak_symmetric_state,
    kraus_operators,
    norm_constant,
    px_of_pzz,
    tau_weight,
)
from dwaspt.ed import DenseState
from dwaspt.lattice import LatticeLayout, PauliString, pauli_to_dense
from dwaspt.models import build_u_dw, circuit_to_dense, embed_string, symmetry_generators

from conftest import random_density_matrix

P_GRID = [0.0, 0.1, 0.25, 0.45, 0.5]


def raw_filter(vec, gates, layout):
    """Unnormalized product of ``(1-p) I + p h`` gates."""
    st = DenseState(np.asarray(vec, dtype=complex), layout)
    for g in gates:
        a, b = g.coefficients
        st.vector = a * st.vector + b * st.apply(g.h)
    return st.vector


def test_tau_weight():
    assert tau_weight(0.0) == 0.0
    assert tau_weight(0.25) == pytest.approx(0.5 * math.log(2), abs=1e-15)
    assert tau_weight(0.5) == "projective"
    with pytest.raises(ValueError):
        tau_weight(0.6)


def test_px_lock():
    assert px_of_pzz(0.0, 0.6) == 0.0
    assert px_of_pzz(0.5, 0.6) == 0.5
    for p in np.linspace(0, 0.5, 11):
        assert px_of_pzz(p, 1.0) == pytest.approx(p, abs=1e-15)
    vals = [px_of_pzz(p, 0.6) for p in np.linspace(0, 0.5, 21)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        px_of_pzz(0.1, 0.0)


def test_norm_constant():
    assert norm_constant(0, 0, 5) == 1.0
    assert norm_constant(0.5, 0.1, 3) == 0.0
    assert norm_constant(0.25, 0.25, 2) == pytest.approx(0.25)


@pytest.mark.parametrize("p", np.linspace(0, 0.49, 8))
def test_filter_matrix_identity(p):
    h = PauliString.from_ops([(0, "Z"), (1, "Z")])
    g = FilterGate(h, p)
    want = (1 - p) * np.eye(4) + p * pauli_to_dense(h, 2)
    assert np.max(np.abs(g.local_matrix() - want)) < 1e-14
    w = np.linalg.eigvalsh(g.local_matrix())
    assert np.all(w >= -1e-15)


def test_projective_gate():
    g = FilterGate(PauliString(((0, "X"),)), 0.5)
    assert g.projective
    m = g.local_matrix()
    assert np.allclose(m @ m, m)


def test_zz_gate_eigen_ratio():
    lay = LatticeLayout(3)
    gates = build_filter_gates(ChannelSpec("zz", 0.25), lay)
    assert len(gates) == 3
    w = np.linalg.eigvalsh(gates[0].local_matrix())
    assert w.max() / w.min() == pytest.approx(2.0)
    assert all(g.is_identity for g in build_filter_gates(ChannelSpec("zz", 0.0), lay))


def test_tzxtz_gate_support_and_duality():
    lay = LatticeLayout(3)
    gates = build_filter_gates(ChannelSpec("tzxtz", 0.2), lay)
    assert all(len(g.support) == 6 for g in gates)
    # conjugating the X gate by U_DW on both layers gives the tzxtz gate
    single = lay.single_layer()
    u = circuit_to_dense(build_u_dw(3))
    for j in range(3):
        gx = pauli_to_dense(channel_operator("x", j, single), 6)
        gt = pauli_to_dense(channel_operator("tzxtz", j, single), 6)
        assert np.allclose(u @ gx @ u.conj().T, gt)


def test_channel_examples():
    lay = LatticeLayout(2, doubled=False)
    rho = random_density_matrix(4, np.random.default_rng(3))
    assert np.allclose(apply_channel_to_density_matrix(rho, ChannelSpec("zz", 0.0), lay), rho)
    mm = np.eye(16) / 16
    for kind in ("zz", "x", "tzxtz"):
        assert np.allclose(apply_channel_to_density_matrix(mm, ChannelSpec(kind, 0.3), lay), mm)
    one = LatticeLayout(1, "open", doubled=False)
    plus = np.full((4, 4), 0.25)  # |+>|+> on (sigma, tau)
    assert np.allclose(apply_channel_to_density_matrix(plus, ChannelSpec("x", 0.3), one), plus)
    with pytest.raises(ValueError):
        apply_channel_to_density_matrix(np.triu(np.ones((16, 16))), ChannelSpec("x", 0.3), lay)


def test_channel_preserves_trace_and_positivity(rng):
    lay = LatticeLayout(2, doubled=False)
    rho = random_density_matrix(4, rng)
    for kind in ("zz", "x", "tzxtz"):
        out = apply_channel_to_density_matrix(rho, ChannelSpec(kind, 0.37), lay)
        assert np.trace(out) == pytest.approx(1.0, abs=1e-14)
        assert np.allclose(out, out.conj().T)
        assert np.linalg.eigvalsh(out).min() > -1e-12


def test_choi_examples():
    up = np.array([[1, 0], [0, 0]], dtype=complex)
    assert np.allclose(choi_vectorize(up), [1, 0, 0, 0])
    mm = np.eye(2) / 2
    v = choi_vectorize(mm)
    assert np.allclose(v, [0.5, 0, 0, 0.5])
    assert np.vdot(v, v).real == pytest.approx(0.5)


def test_choi_roundtrip_and_purity(rng):
    rho = random_density_matrix(3, rng)
    v = choi_vectorize(rho)
    assert np.allclose(choi_devectorize(v), rho)
    assert np.vdot(v, v).real == pytest.approx(np.trace(rho @ rho).real)
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    pure = choi_vectorize(np.outer(psi, psi.conj()))
    assert np.vdot(pure, pure).real == pytest.approx(1.0)
    # |psi^*>_u |psi>_l on the interleaved path
    t = np.einsum("a,b->ab", psi.conj(), psi).reshape((2,) * 6).transpose(0, 3, 1, 4, 2, 5)
    assert np.allclose(pure, t.reshape(-1))


def test_choi_swap_conjugation_symmetry(rng):
    rho = random_density_matrix(2, rng)
    v = choi_vectorize(rho).reshape((2,) * 4)
    swapped = v.transpose(1, 0, 3, 2).conj()
    assert np.allclose(swapped, v)


@pytest.mark.parametrize("L", [2, 3, 4])
@pytest.mark.parametrize("kind", ["zz", "x", "tzxtz"])
@pytest.mark.parametrize("p", P_GRID)
def test_kraus_equals_filter(L, kind, p):
    rng = np.random.default_rng(L * 100 + int(p * 100))
    single = LatticeLayout(L, doubled=False)
    doubled = LatticeLayout(L)
    rho = random_density_matrix(2 * L, rng)
    spec = ChannelSpec(kind, p)
    lhs = choi_vectorize(apply_channel_to_density_matrix(rho, spec, single))
    rhs = raw_filter(choi_vectorize(rho), build_filter_gates(spec, doubled), doubled)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_channels_commute(rng):
    lay = LatticeLayout(3, doubled=False)
    rho = random_density_matrix(6, rng)
    a, b = ChannelSpec("zz", 0.2), ChannelSpec("x", 0.35)
    ab = apply_channel_to_density_matrix(apply_channel_to_density_matrix(rho, a, lay), b, lay)
    ba = apply_channel_to_density_matrix(apply_channel_to_density_matrix(rho, b, lay), a, lay)
    assert np.allclose(ab, ba, atol=1e-14)


def test_strong_symmetry_predicates():
    lay = LatticeLayout(4, doubled=False)
    gens = symmetry_generators(lay)
    for kind in ("zz", "x", "tzxtz"):
        for g in gens.values():
            assert is_strongly_symmetric(ChannelSpec(kind, 0.3), g, lay)
    # a sigma^z channel breaks the strong sigma flip symmetry
    sz = PauliString(((lay.sigma(0), "Z"),))
    spec = ChannelSpec("x", 0.3)
    assert not is_strongly_symmetric(spec, sz, lay)


def test_state_symmetry_predicates():
    x = pauli_to_dense(PauliString(((0, "X"),)), 1)
    plus = np.full((2, 2), 0.5)
    assert is_strong_symmetric_state(plus, x)
    mixed = np.eye(2) / 2
    assert is_weak_symmetric_state(mixed, x) and not is_strong_symmetric_state(mixed, x)


def test_kraus_sets():
    lay = LatticeLayout(3, doubled=False)
    ks = kraus_operators(ChannelSpec("zz", 0.2), lay)
    assert len(ks) == 3
    for pair in ks:
        total = sum(pauli_to_dense(k, 6).conj().T @ pauli_to_dense(k, 6) for k in pair)
        assert np.allclose(total, np.eye(64))


def test_channel_specs_order():
    s = channel_specs(0.2, 0.6)
    assert [c.kind for c in s] == ["zz", "tzxtz"]
    assert s[1].p == pytest.approx(px_of_pzz(0.2, 0.6))
    assert [c.kind for c in channel_specs(0.2, 0.6, "simplified")] == ["zz"]


def test_filter_order_insensitive(rng):
    lay = LatticeLayout(3)
    v = rng.standard_normal(2**12)
    zz = build_filter_gates(ChannelSpec("zz", 0.3), lay)
    tx = build_filter_gates(ChannelSpec("tzxtz", 0.2), lay)
    a = raw_filter(v, zz + tx, lay)
    b = raw_filter(v, [g for pair in zip(tx, zz) for g in pair], lay)
    assert np.allclose(a, b, atol=1e-12)
