"""Circuit-family samplers and the single-qubit Clifford layer."""
import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mirrorbench.circuit import SQ, U4, unitary_of
from mirrorbench.gates import clifford_angles, euler_matrix, rx, rz
from mirrorbench.generators import (
    CircuitShape,
    GeometrySpec,
    HamSimParams,
    build_hamsim_circuit,
    clifford_index_of,
    generate,
    keep_probability,
    sample_2design_layer,
    sample_geometry_circuit,
    sample_geometry_layer,
    sample_qv_circuit,
)

from helpers import embed


def _blocks(layer):
    return [g for g in layer.gates if g.kind == U4]


@pytest.mark.parametrize("n, d", [(4, 4), (5, 3), (6, 2), (2, 1)])
def test_qv_structure(n, d, rng):
    c = sample_qv_circuit(CircuitShape(n, d), rng)
    assert c.depth == d
    for layer in c.layers:
        assert len(_blocks(layer)) == n // 2
        assert sum(g.kind == "IDLE" for g in layer.gates) == n % 2


def test_qv_single_qubit_is_all_idle(rng):
    c = sample_qv_circuit(CircuitShape(1, 1), rng)
    assert c.layers[0].is_idle


def test_shape_validation():
    with pytest.raises(ValueError):
        CircuitShape(0, 3)


def test_qv_pairings_uniform(rng):
    # chi-square over the 6 unordered pairs of 4 qubits (5 dof, 1% critical value 15.086)
    tally = Counter()
    for _ in range(3000):
        for g in _blocks(sample_qv_circuit(CircuitShape(4, 1), rng).layers[0]):
            tally[tuple(sorted(g.qubits))] += 1
    pairs = list(itertools.combinations(range(4), 2))
    obs = np.array([tally[p] for p in pairs], dtype=float)
    exp = obs.sum() / len(pairs)
    assert ((obs - exp) ** 2 / exp).sum() < 15.086


def test_line_two_qubit_expectation():
    assert keep_probability(GeometrySpec("line"), 2) == pytest.approx(0.5)


@pytest.mark.parametrize("geom, n", [(GeometrySpec.grid_for(8), 8), (GeometrySpec("line"), 6), (GeometrySpec.grid_for(5), 5)])
def test_geometry_block_rate(geom, n, rng):
    counts = [len(_blocks(sample_geometry_layer(n, geom, rng))) for _ in range(10_000)]
    assert abs(np.mean(counts) - n / 4) < 0.05


@given(st.integers(2, 9), st.sampled_from(["grid", "line"]), st.integers(0, 2**32 - 1))
def test_geometry_edges_disjoint_and_valid(n, kind, seed):
    geom = GeometrySpec.grid_for(n) if kind == "grid" else GeometrySpec("line")
    edges = set(geom.edges(n))
    c = sample_geometry_circuit(CircuitShape(n, 3), geom, np.random.default_rng(seed))
    for layer in c.layers:
        used = [q for g in _blocks(layer) for q in g.qubits]
        assert len(used) == len(set(used))
        assert all(tuple(sorted(g.qubits)) in edges for g in _blocks(layer))


def test_geometry_rejects_all_to_all(rng):
    with pytest.raises(ValueError):
        sample_geometry_circuit(CircuitShape(3, 1), GeometrySpec("all-to-all"), rng)


def test_line_geometry_edge_count():
    assert len(GeometrySpec("line").edges(7)) == 6


def test_hamsim_repeats_one_step():
    p1 = HamSimParams(0.2, -0.4, 1)
    p2 = HamSimParams(0.2, -0.4, 2)
    c1, c2 = build_hamsim_circuit(4, p1), build_hamsim_circuit(4, p2)
    assert c2.depth == 2 * c1.depth
    assert c2.layers == c1.layers + c1.layers


def test_hamsim_zero_fields_diagonal():
    u = unitary_of(build_hamsim_circuit(3, HamSimParams(0.0, 0.0, 2, tau=0.37)))
    assert np.allclose(u, np.diag(np.diag(u)), atol=1e-12)


def test_hamsim_matches_explicit_factors():
    n, tau, hx, hz = 3, 0.1, 0.5, -0.3
    c = build_hamsim_circuit(n, HamSimParams(hz, hx, 1, tau=tau))
    zz = np.diag(np.exp(-1j * tau * np.array([1, -1, -1, 1])))
    u = np.eye(8, dtype=complex)
    for q in range(n):
        u = embed(rz(2 * tau * hz), [q], n) @ u
    for q in range(n):
        u = embed(rx(2 * tau * hx), [q], n) @ u
    for a in (0, 1):
        u = embed(zz, [a, a + 1], n) @ u
    got = unitary_of(c)
    k = np.vdot(u.ravel(), got.ravel())
    assert np.allclose(got, k / abs(k) * u, atol=1e-12)


def test_hamsim_validation():
    with pytest.raises(ValueError):
        build_hamsim_circuit(1, HamSimParams(0, 0, 1))
    with pytest.raises(ValueError):
        HamSimParams(1.5, 0, 1)


def test_hamsim_deterministic():
    p = HamSimParams(0.3, 0.7, 3)
    assert build_hamsim_circuit(5, p).layers == build_hamsim_circuit(5, p).layers


def test_two_design_layer_is_clifford(rng):
    layer = sample_2design_layer(6, rng)
    assert all(g.kind == SQ for g in layer.gates)
    assert all(clifford_index_of(g.angles) >= 0 for g in layer.gates)


def test_two_design_frequencies_uniform(rng):
    draws = 100_000
    table = clifford_angles()
    picks = Counter()
    for _ in range(draws // 50):
        for g in sample_2design_layer(50, rng).gates:
            picks[table.index(g.angles)] += 1
    p = 1 / 24
    sigma = math.sqrt(draws * p * (1 - p))
    assert len(picks) == 24
    assert all(abs(v - draws * p) < 3.5 * sigma for v in picks.values())


def _haar_twirl(x: np.ndarray) -> np.ndarray:
    d = 2
    f = np.eye(4)[[0, 2, 1, 3]]
    tr, trf = np.trace(x), np.trace(x @ f)
    a = (tr - trf / d) / (d * d - 1)
    b = (trf - tr / d) / (d * d - 1)
    return a * np.eye(4) + b * f


def test_two_design_second_moment(rng):
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    mats = [euler_matrix(a) for a in clifford_angles()]
    twirls = np.stack([np.kron(u, u) @ x @ np.kron(u, u).conj().T for u in mats])
    assert np.allclose(twirls.mean(axis=0), _haar_twirl(x), atol=1e-12)
    freq = np.bincount(rng.integers(0, 24, size=100_000), minlength=24) / 100_000
    sampled = np.tensordot(freq, twirls, axes=1)
    assert np.abs(sampled - _haar_twirl(x)).max() < 5e-3 * np.abs(x).max()


@pytest.mark.parametrize("family", ["qv", "grid", "line", "hamsim"])
def test_generate_reproducible(family):
    a = generate(family, CircuitShape(4, 2), 123)
    b = generate(family, CircuitShape(4, 2), 123)
    assert a.to_json() == b.to_json()
    assert a.metadata["seed"] == 123


def test_generate_unknown_family():
    with pytest.raises(ValueError):
        generate("qft", CircuitShape(3, 3), 1)
