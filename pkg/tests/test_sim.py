"""Error models, kernels and the noisy simulator."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirrorbench.circuit import Circuit, Layer, OracleLimitError, circuit_from_gates, idle, sq, tq, unitary_of
from mirrorbench.compiler import ConnectivityGraph, compile_exact
from mirrorbench.gates import X_ANGLES
from mirrorbench.generators import CircuitShape, generate
from mirrorbench.sim import (
    ErrorModel,
    ErrorModelError,
    OutcomeCounts,
    apply_readout,
    available_backends,
    build_program,
    compose_pauli_channels,
    depolarizing_probs,
    exact_output_distribution,
    exact_polarization,
    final_density_matrix,
    get_backend,
    process_fidelity,
    simulate_counts,
    unravel,
)

H_LIKE = (0.0, math.pi / 2, 0.0)


def _noisy_model(**kw):
    base = dict(g1_pol=0.97, g2_pol=0.9, idle_z_rad=0.3, global_pol=0.95, readout_flip=0.02,
                pauli_1q=(0.01, 0.0, 0.02), pauli_2q={"ZI": 0.01, "XY": 0.02})
    base.update(kw)
    return ErrorModel(**base)


# -- error models -------------------------------------------------------------


def test_depolarizing_probs_normalized():
    p = depolarizing_probs(0.9, 2)
    assert p.sum() == pytest.approx(1.0)
    assert p[0] == pytest.approx(0.9 + 0.1 / 16)


def test_compose_depolarizing_multiplies():
    p = compose_pauli_channels(depolarizing_probs(0.9, 1), depolarizing_probs(0.8, 1))
    assert np.allclose(p, depolarizing_probs(0.72, 1))


@pytest.mark.parametrize(
    "kw",
    [{"g1_pol": 1.5}, {"g2_pol": -0.2}, {"readout_flip": 1.2}, {"pauli_1q": (0.6, 0.6, 0.0)},
     {"pauli_2q": {"II": 0.1}}, {"pauli_2q": {"XQ": 0.1}}, {"global_scope": "middle"}, {"idle_z_rad": math.inf}],
)
def test_error_model_rejects(kw):
    with pytest.raises(ErrorModelError):
        ErrorModel(**kw)


def test_error_model_lower_bounds_allowed():
    ErrorModel(g1_pol=-1 / 3, g2_pol=-1 / 15)


def test_error_model_json(tmp_path):
    em = _noisy_model()
    em.dump(tmp_path / "em.json")
    assert ErrorModel.load(tmp_path / "em.json") == em
    with pytest.raises(ErrorModelError):
        ErrorModel.from_json({"g1_pol": 0.9, "gamma": 1})


def test_without_resets_terms():
    em = _noisy_model().without("idle_z_rad", "readout_flip")
    assert em.idle_z_rad == 0.0 and em.readout_flip == 0.0 and em.g2_pol == 0.9
    assert ErrorModel().is_noiseless


# -- channel sanity -----------------------------------------------------------


def _choi(c, em, backend=None):
    n = c.width
    d = 1 << n
    phi = np.zeros(d * d, dtype=np.complex128)
    phi[np.arange(d) * d + np.arange(d)] = 1.0
    rho = np.outer(phi, phi.conj()) / d
    prog = build_program(c, em, nreg=2 * n)
    get_backend(backend).run_dm(prog.nreg, prog.ops, prog.params, prog.mats, prog.ptab, rho)
    return rho


@pytest.mark.parametrize(
    "circuit",
    [
        circuit_from_gates(1, [sq(0, (0.3, 1.1, -0.4))]),
        circuit_from_gates(2, [tq("CNOT", 0, 1)]),
        circuit_from_gates(2, [tq("CPHASE", 1, 0), sq(0, H_LIKE)]),
        Circuit(2, (Layer.of(2, [tq("SWAP", 0, 1)]), Layer.of(2, [sq(1, X_ANGLES)]))),
    ],
    ids=["sq", "cnot", "cz", "swap"],
)
@pytest.mark.parametrize(
    "em",
    [ErrorModel(), _noisy_model(), ErrorModel(g1_pol=-1 / 3, g2_pol=-1 / 15), ErrorModel(global_pol=-1 / 15)],
    ids=["ideal", "mixed", "extreme", "negglobal"],
)
def test_channels_are_cptp(circuit, em):
    choi = _choi(circuit, em.without("readout_flip"))
    d = 1 << circuit.width
    assert np.allclose(choi, choi.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(choi).min() > -1e-10
    # tracing out the system half leaves I/d on the reference half
    reduced = np.einsum("aiaj->ij", choi.reshape(d, d, d, d))
    assert np.allclose(reduced, np.eye(d) / d, atol=1e-10)


def test_global_polarization_below_cp_bound_rejected():
    c = circuit_from_gates(1, [sq(0, X_ANGLES)])
    with pytest.raises(ErrorModelError):
        final_density_matrix(c, ErrorModel(global_pol=-0.5))


def test_idle_z_is_unitary_on_idlers():
    c = circuit_from_gates(3, [tq("CNOT", 0, 1)])
    choi = _choi(c, ErrorModel(idle_z_rad=0.2))
    assert np.linalg.matrix_rank(choi, tol=1e-10) == 1


# -- kernels ------------------------------------------------------------------


@pytest.mark.skipif(len(available_backends()) < 2, reason="compiled kernels not built")
@given(st.integers(1, 4), st.integers(0, 2**31 - 1))
@settings(max_examples=20)
def test_backends_agree(n, seed):
    rng = np.random.default_rng(seed)
    c = generate("qv", CircuitShape(n, 2), seed) if n > 1 else circuit_from_gates(1, [sq(0, (0.1, 0.2, 0.3))])
    if n > 1:
        c = compile_exact(c, ConnectivityGraph.line(n)).circuit
    em = _noisy_model()
    rho = {b: final_density_matrix(c, em, backend=b) for b in available_backends()}
    assert np.abs(rho["cython"] - rho["python"]).max() < 1e-12
    prog, errors = unravel(build_program(c, em), 8, rng)
    out = {}
    for b in available_backends():
        psi = np.zeros((8, 1 << n), dtype=np.complex128)
        psi[:, 0] = 1.0
        get_backend(b).run_sv(prog.nreg, prog.ops, prog.params, prog.mats, errors, psi)
        out[b] = psi
    assert np.abs(out["cython"] - out["python"]).max() < 1e-12


def test_backend_env_override(monkeypatch):
    monkeypatch.setenv("MIRRORBENCH_BACKEND", "python")
    from mirrorbench.sim import _pykernels

    assert get_backend() is _pykernels
    with pytest.raises(ValueError):
        get_backend("fortran")


def test_noiseless_density_matches_statevector(rng):
    c = generate("qv", CircuitShape(3, 3), 11)
    rho = final_density_matrix(c)
    psi = unitary_of(c)[:, 0]
    assert np.allclose(rho, np.outer(psi, psi.conj()), atol=1e-12)


# -- exact outputs ------------------------------------------------------------


def test_identity_point_mass():
    p = exact_output_distribution(Circuit(3, (Layer.of(3, []),)))
    assert p[0] == pytest.approx(1.0) and p.sum() == pytest.approx(1.0)


def test_hadamard_like_uniform():
    p = exact_output_distribution(circuit_from_gates(1, [sq(0, H_LIKE)]))
    assert np.allclose(p, [0.5, 0.5], atol=1e-12)


def test_qv_distribution_normalized():
    p = exact_output_distribution(generate("qv", CircuitShape(3, 3), 5))
    assert abs(p.sum() - 1) < 1e-12


def test_readout_flip_matrix():
    p = apply_readout(np.array([1.0, 0, 0, 0]), 0.1, 2)
    assert np.allclose(p, [0.81, 0.09, 0.09, 0.01])


def test_idle_z_only_in_two_qubit_layers():
    # qubit 2 sits on the equator, so a Z rotation changes its final X-basis outcome
    prep = Layer.of(3, [sq(2, H_LIKE)])
    undo = Layer.of(3, [sq(2, (0.0, -math.pi / 2, 0.0))])
    em = ErrorModel(idle_z_rad=0.4)
    sq_only = Circuit(3, (prep, Layer.of(3, [sq(0, X_ANGLES)]), undo))
    with_tq = Circuit(3, (prep, Layer.of(3, [tq("CNOT", 0, 1)]), undo))
    assert exact_output_distribution(sq_only, em)[0b100] == pytest.approx(1.0, abs=1e-12)
    flipped = exact_output_distribution(with_tq, em)[1]
    assert flipped == pytest.approx(math.sin(0.2) ** 2, abs=1e-12)


def test_global_scope_compiled_marks():
    c = circuit_from_gates(2, [sq(0, X_ANGLES), tq("CNOT", 0, 1)])
    em = ErrorModel(global_pol=0.6, global_scope="compiled")
    end = exact_output_distribution(c, ErrorModel(global_pol=0.6))
    assert np.allclose(exact_output_distribution(c, em), end)
    m3 = c.with_metadata(mirror_kind="M3")
    assert exact_output_distribution(m3, em)[3] == pytest.approx(1.0)
    spanned = c.with_metadata(compiled_span=[0, 1])
    assert exact_output_distribution(spanned, em)[3] == pytest.approx(0.6 + 0.4 / 4)


# -- process fidelity oracle --------------------------------------------------


def test_noiseless_compilation_polarization_one():
    c = generate("qv", CircuitShape(3, 2), 8)
    cc = compile_exact(c, ConnectivityGraph.line(3))
    pol = exact_polarization(cc.circuit, ErrorModel(), cc.target_unitary(unitary_of(c)))
    assert pol == pytest.approx(1.0, abs=1e-9)


def test_global_depolarizing_polarization():
    c = circuit_from_gates(2, [tq("CNOT", 0, 1)])
    assert exact_polarization(c, ErrorModel(global_pol=0.9), unitary_of(c)) == pytest.approx(0.9, abs=1e-9)


def test_two_tq_events_compose():
    c = circuit_from_gates(2, [tq("CNOT", 0, 1), tq("CPHASE", 0, 1)])
    assert exact_polarization(c, ErrorModel(g2_pol=0.975), unitary_of(c)) == pytest.approx(0.975**2, abs=1e-6)


def test_local_depolarizing_product_three_qubits():
    # each two-qubit depolarizer on 2 of 3 qubits has process polarization (16 g + ... ) / 63 ; check via fidelity
    c = circuit_from_gates(3, [tq("CNOT", 0, 1)])
    g = 0.9
    f = process_fidelity(c, ErrorModel(g2_pol=g), unitary_of(c))
    assert f == pytest.approx(g + (1 - g) / 16, abs=1e-12)


def test_polarization_with_permutation():
    from mirrorbench.circuit import QubitPermutation

    c = circuit_from_gates(2, [tq("SWAP", 0, 1)])
    pol = exact_polarization(c, ErrorModel(), np.eye(4), perm=QubitPermutation((1, 0)))
    assert pol == pytest.approx(1.0, abs=1e-12)


def test_oracle_width_limit():
    c = Circuit(7, (Layer.of(7, []),))
    with pytest.raises(OracleLimitError):
        process_fidelity(c, ErrorModel(), np.eye(128))
    with pytest.raises(OracleLimitError):
        simulate_counts(Circuit(15, (Layer.of(15, []),)), None, 10, np.random.default_rng(0))


# -- sampling -----------------------------------------------------------------


@pytest.mark.parametrize("method", ["exact", "trajectory"])
def test_noiseless_identity_all_zero(method, rng):
    oc = simulate_counts(Circuit(3, (Layer.of(3, []),)), ErrorModel(), 1000, rng, method=method)
    assert oc.counts == {"000": 1000}


@pytest.mark.parametrize("method", ["exact", "trajectory"])
def test_readout_binomial(method, rng):
    shots = 100_000
    oc = simulate_counts(circuit_from_gates(1, [sq(0, X_ANGLES)]), ErrorModel(readout_flip=0.1), shots, rng, method=method)
    sigma = math.sqrt(shots * 0.1 * 0.9)
    assert abs(oc.counts.get("0", 0) - 0.1 * shots) < 3 * sigma


@pytest.mark.parametrize("n", [2, 3, 4])
def test_trajectories_converge_to_exact(n, rng):
    c = compile_exact(generate("qv", CircuitShape(n, 2), n), ConnectivityGraph.line(n)).circuit
    em = _noisy_model(g2_pol=0.85)
    exact = exact_output_distribution(c, em)
    shots = 100_000
    oc = simulate_counts(c, em, shots, rng, method="trajectory", max_trajectories=shots)
    tv = 0.5 * np.abs(oc.probabilities() - exact).sum()
    assert tv < 0.01


def test_simulation_deterministic():
    c = generate("hamsim", CircuitShape(3, 1), 4)
    c = compile_exact(c, ConnectivityGraph.line(3)).circuit
    em = _noisy_model()
    for method in ("exact", "trajectory"):
        a = simulate_counts(c, em, 500, np.random.default_rng(3), method=method)
        b = simulate_counts(c, em, 500, np.random.default_rng(3), method=method)
        assert a.counts == b.counts


def test_outcome_counts_validation(tmp_path):
    with pytest.raises(ValueError):
        OutcomeCounts({"0": 3}, 4)
    oc = OutcomeCounts({"01": 3, "10": 1}, 4, "01")
    oc.dump(tmp_path / "c.json")
    assert OutcomeCounts.load(tmp_path / "c.json") == oc
    assert np.allclose(oc.probabilities(), [0, 0.75, 0.25, 0])


def test_simulate_rejects_bad_args(rng):
    c = Circuit(1, (Layer.of(1, [idle(0)]),))
    with pytest.raises(ValueError):
        simulate_counts(c, None, 0, rng)
    with pytest.raises(ValueError):
        simulate_counts(c, None, 10, rng, method="magic")
