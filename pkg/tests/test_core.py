"""Circuit IR, Euler-angle gates, Pauli algebra and permutations."""
import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mirrorbench.circuit import (
    Circuit,
    GateOp,
    Layer,
    OracleLimitError,
    QubitPermutation,
    apply_permutation,
    circuit_from_gates,
    idle,
    layer_by_layer_inverse,
    sq,
    tq,
    u4,
    unitary_of,
)
from mirrorbench.gates import (
    CNOT,
    CPHASE,
    PAULI_MATRICES,
    SWAP,
    clifford_angles,
    equal_up_to_phase,
    euler_angles,
    euler_matrix,
    inverse_angles,
    merge_angles,
    pauli_left,
    pauli_right,
    phase_distance,
    rx,
    rz,
)
from mirrorbench.generators import CircuitShape, sample_haar_su2, sample_haar_su4, sample_qv_circuit
from mirrorbench.pauli import PauliString, compose_pauli, conjugate_pauli_by_clifford

from helpers import embed, random_clifford_tq_circuit

angle = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
angles3 = st.tuples(angle, angle, angle)
labels = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


# -- Euler angles -------------------------------------------------------------


def test_euler_matrix_is_zxz_product():
    a, b, c = 0.3, -1.1, 2.2
    assert np.allclose(euler_matrix((a, b, c)), rz(a) @ rx(b) @ rz(c))


@given(angles3)
def test_euler_round_trip(angs):
    m = euler_matrix(angs)
    assert equal_up_to_phase(euler_matrix(euler_angles(m)), m, 1e-9)


@given(angles3)
def test_inverse_angles(angs):
    assert equal_up_to_phase(euler_matrix(inverse_angles(angs)) @ euler_matrix(angs), np.eye(2), 1e-9)


@given(angles3, angles3)
def test_merge_angles_order(first, second):
    expect = euler_matrix(second) @ euler_matrix(first)
    assert equal_up_to_phase(euler_matrix(merge_angles(first, second)), expect, 1e-9)


@pytest.mark.parametrize("label", list("IXYZ"))
@given(angs=angles3)
def test_pauli_absorption_is_exact(label, angs):
    p = PAULI_MATRICES[label]
    g = euler_matrix(angs)
    assert equal_up_to_phase(euler_matrix(pauli_left(label, angs)), p @ g, 1e-9)
    assert equal_up_to_phase(euler_matrix(pauli_right(label, angs)), g @ p, 1e-9)


def test_haar_samples_are_special_unitary(rng):
    for _ in range(50):
        u = sample_haar_su4(rng)
        assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)
        assert abs(np.linalg.det(u) - 1) < 1e-12
        v = sample_haar_su2(rng)
        assert abs(np.linalg.det(v) - 1) < 1e-12


def test_haar_su4_second_moment(rng):
    # E|U_ij|^2 = 1/4 for Haar unitaries
    samples = np.stack([np.abs(sample_haar_su4(rng)) ** 2 for _ in range(10_000)])
    assert np.allclose(samples.mean(axis=0), 0.25, rtol=0.02, atol=0)


def test_clifford_group_has_24_distinct_elements():
    cl = clifford_angles()
    assert len(cl) == 24
    mats = [euler_matrix(a) for a in cl]
    for i, j in itertools.combinations(range(24), 2):
        assert not equal_up_to_phase(mats[i], mats[j])
    for m in mats:
        for p in "XYZ":
            conj = m @ PAULI_MATRICES[p] @ m.conj().T
            assert any(np.allclose(conj, s * PAULI_MATRICES[q]) for q in "XYZ" for s in (1, -1))


# -- Pauli algebra ------------------------------------------------------------


def test_compose_self_inverse():
    xi = PauliString.from_label("XI")
    assert compose_pauli(xi, xi) == PauliString.identity(2)


def test_compose_involution_chain():
    x, z = PauliString.from_label("X"), PauliString.from_label("Z")
    assert (x @ z @ z @ x).is_identity()
    assert (x @ z @ z @ x).phase == 0


def test_compose_sign_against_matrices():
    a, b = PauliString.from_label("XZ"), PauliString.from_label("ZZ")
    prod = compose_pauli(a, b)
    assert prod.label.endswith("YI")
    assert np.allclose(prod.to_matrix(), a.to_matrix() @ b.to_matrix())


def test_compose_width_mismatch():
    with pytest.raises(ValueError):
        compose_pauli(PauliString.identity(1), PauliString.identity(2))


@given(labels.flatmap(lambda s: st.tuples(st.just(s), st.text("IXYZ", min_size=len(s), max_size=len(s)))))
def test_compose_matches_dense(pair):
    a, b = (PauliString.from_label(s) for s in pair)
    assert np.allclose((a @ b).to_matrix(), a.to_matrix() @ b.to_matrix())


@given(labels, labels, labels)
def test_compose_associative(s1, s2, s3):
    n = min(len(s1), len(s2), len(s3))
    a, b, c = (PauliString.from_label(s[:n]) for s in (s1, s2, s3))
    assert (a @ b) @ c == a @ (b @ c)


@pytest.mark.parametrize(
    "kind, before, after",
    [("CNOT", "XI", "XX"), ("CNOT", "IZ", "ZZ"), ("CNOT", "IX", "IX"), ("CPHASE", "XI", "XZ"), ("SWAP", "XZ", "ZX")],
)
def test_conjugation_textbook(kind, before, after):
    out = conjugate_pauli_by_clifford(PauliString.from_label(before), kind, (0, 1))
    assert out.label[-2:] == after


@pytest.mark.parametrize("kind, mat", [("CNOT", CNOT), ("CPHASE", CPHASE), ("SWAP", SWAP)])
@given(st.text("IXYZ", min_size=2, max_size=2))
def test_conjugation_matches_dense(kind, mat, label):
    p = PauliString.from_label(label)
    out = conjugate_pauli_by_clifford(p, kind, (0, 1))
    assert np.allclose(out.to_matrix(), mat @ p.to_matrix() @ mat.conj().T)


def test_conjugation_rejects_non_clifford():
    with pytest.raises(ValueError):
        conjugate_pauli_by_clifford(PauliString.identity(2), "ISWAP", (0, 1))


def test_conjugation_through_clifford_circuits(rng):
    # 200 random Clifford TQ circuits on up to 3 qubits
    for _ in range(200):
        n = int(rng.integers(2, 4))
        gates = []
        for _ in range(int(rng.integers(1, 8))):
            a, b = rng.choice(n, 2, replace=False)
            gates.append(("CNOT CPHASE SWAP".split()[rng.integers(3)], (int(a), int(b))))
        p = PauliString.random(n, rng)
        dense = p.to_matrix()
        for kind, qs in gates:
            p = conjugate_pauli_by_clifford(p, kind, qs)
            g = embed({"CNOT": CNOT, "CPHASE": CPHASE, "SWAP": SWAP}[kind], qs, n)
            dense = g @ dense @ g.conj().T
        assert np.allclose(p.to_matrix(), dense)


def test_flip_bits_follow_x_mask():
    assert PauliString.from_label("XZY").flip_bits() == "101"


# -- Circuits -----------------------------------------------------------------


def test_layer_rejects_overlaps():
    with pytest.raises(ValueError):
        Layer.of(2, [tq("CNOT", 0, 1), sq(1, (0, 0, 0))])


def test_layer_fills_idles():
    layer = Layer.of(3, [tq("CNOT", 0, 2)])
    assert sorted(g.qubits[0] for g in layer.gates if g.kind == "IDLE") == [1]


def test_gate_rejects_repeated_qubit():
    with pytest.raises(ValueError):
        tq("CNOT", 1, 1)


def test_gate_rejects_unknown_clifford():
    with pytest.raises(ValueError):
        GateOp("TQ", (0, 1), name="ISWAP")


def test_unitary_of_idle_and_cnot():
    assert np.allclose(unitary_of(Circuit(3, (Layer.of(3, []),))), np.eye(8))
    assert np.allclose(unitary_of(circuit_from_gates(2, [tq("CNOT", 0, 1)])), CNOT)


def test_unitary_oracle_limit():
    with pytest.raises(OracleLimitError):
        unitary_of(Circuit(11, (Layer.of(11, []),)))


def test_qv_unitarity(rng):
    u = unitary_of(sample_qv_circuit(CircuitShape(3, 3), rng))
    assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-10)


def test_inverse_of_empty_and_cnot():
    assert layer_by_layer_inverse(Circuit(2, ())).depth == 0
    c = circuit_from_gates(2, [tq("CNOT", 0, 1)])
    assert layer_by_layer_inverse(c).layers == c.layers


@given(st.integers(1, 4), st.integers(0, 12), st.integers(0, 2**32 - 1))
def test_layer_by_layer_inverse_property(n, gates, seed):
    rng = np.random.default_rng(seed)
    c = random_clifford_tq_circuit(n, gates, rng)
    u = unitary_of(c)
    assert equal_up_to_phase(unitary_of(layer_by_layer_inverse(c)) @ u, np.eye(1 << n), 1e-9)


def test_inverse_handles_su4_blocks(rng):
    c = sample_qv_circuit(CircuitShape(4, 2), rng)
    assert np.allclose(unitary_of(layer_by_layer_inverse(c)) @ unitary_of(c), np.eye(16), atol=1e-9)


def test_json_round_trip_all_kinds(rng):
    c = circuit_from_gates(
        3,
        [sq(0, (0.1, 0.2, 0.3)), tq("CPHASE", 1, 2), u4(0, 2, sample_haar_su4(rng)), tq("SWAP", 0, 1)],
        {"family": "test", "shape": [3, 2], "seed": 17},
    )
    back = Circuit.from_json(json.loads(json.dumps(c.to_json())))
    assert back.layers == c.layers
    assert back.metadata == c.metadata
    assert np.allclose(unitary_of(back), unitary_of(c))


def test_json_layout():
    d = circuit_from_gates(1, [sq(0, (1.0, 2.0, 3.0))]).to_json()
    assert d["width"] == 1
    assert d["layers"][0][0] == {"kind": "SQ", "q": 0, "angles": [1.0, 2.0, 3.0]}


# -- permutations -------------------------------------------------------------


def test_permutation_bitstrings():
    assert apply_permutation("10", QubitPermutation.identity(2)) == "10"
    assert apply_permutation("10", QubitPermutation((1, 0))) == "01"


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        QubitPermutation((0, 0))


@given(st.permutations(range(4)))
def test_permutation_inverse_law(image):
    p = QubitPermutation(tuple(image))
    assert p.compose(p.inverse()).is_identity()
    c = circuit_from_gates(4, [tq("CNOT", 0, 3), sq(1, (0.4, 0.5, 0.6)), tq("CPHASE", 1, 2)])
    assert apply_permutation(apply_permutation(c, p), p.inverse()).layers == c.layers


@given(st.permutations(range(3)))
def test_permuted_circuit_is_conjugation(image):
    p = QubitPermutation(tuple(image))
    rng = np.random.default_rng(5)
    c = random_clifford_tq_circuit(3, 8, rng)
    m = p.to_matrix()
    assert np.allclose(unitary_of(apply_permutation(c, p)), m @ unitary_of(c) @ m.T)


def test_permutation_matrix_and_index_map_agree():
    p = QubitPermutation((2, 0, 1))
    m = p.to_matrix()
    im = p.index_map()
    for i in range(8):
        assert m[im[i], i] == 1.0


def test_phase_distance_ignores_global_phase():
    u = euler_matrix((0.2, 0.3, 0.4))
    assert phase_distance(u, np.exp(0.7j) * u) < 1e-12
    assert idle(0).unitary().shape == (2, 2)
