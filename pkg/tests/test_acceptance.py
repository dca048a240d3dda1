"""Acceptance suite: one test per criterion, each recorded as a PASS/FAIL line.

The QV (criteria 1 and 2) and HamSim (criterion 10) campaigns are the slow
parts; together they take roughly a quarter of an hour on one core.
"""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mirrorbench.analysis import (
    PORTER_THOMAS_HOP,
    QV_THRESHOLD,
    PolarizationEstimate,
    classical_fidelity_bound,
    estimate_fidelity,
    heavy_output_probability,
    heavy_output_set,
    mcfe_polarization,
    qv_decision,
)
from mirrorbench.campaign import CampaignConfig, run_campaign
from mirrorbench.circuit import statevector_of, unitary_of
from mirrorbench.compiler import ConnectivityGraph, compile_exact, kak_decompose_su4
from mirrorbench.gates import phase_distance
from mirrorbench.generators import CircuitShape, generate, sample_haar_su4
from mirrorbench.mirror import build_suite, make_reference
from mirrorbench.sim import ErrorModel, exact_output_distribution, process_fidelity

from helpers import target_probability

LN2 = math.log(2.0)


# -- 1, 2: MCFE accuracy and heavy-output overestimation ----------------------


@pytest.fixture(scope="module")
def mqv_results(tmp_path_factory):
    cfg = CampaignConfig(
        family="qv",
        shapes=tuple((n, d) for n in (3, 4, 5) for d in (3, 4, 5)),
        circuits_per_shape=50,
        k=(50, 50, 50),
        shots=1000,
        error_model={"g1_pol": 0.9999, "g2_pol": 0.975},
        graph="heavy-hexagon",
        seed=2024,
        bootstrap_resamples=1000,
    )
    return run_campaign(cfg, tmp_path_factory.mktemp("mqv"))


def test_criterion_01_mcfe_accuracy(mqv_results, acceptance):
    shapes = mqv_results["shapes"]
    assert all(e["unavailable"] == 0 for e in shapes)
    mad = float(np.mean([e["mean_abs_deviation"] for e in shapes]))
    worst = max(e["mean_abs_deviation"] for e in shapes)
    # per shape, the exact mean must sit inside the bootstrap interval of the MCFE mean
    biased = [
        (e["n"], e["d"])
        for e in shapes
        if not e["mcfe_pol"]["ci_low"] <= e["exact_pol_mean"] <= e["mcfe_pol"]["ci_high"]
    ]
    ok = mad < 0.03 and worst < 0.03 and not biased
    acceptance(1, "MCFE accuracy", ok, f"MAD {mad:.4f}, worst shape {worst:.4f}, biased shapes {biased}")
    assert ok


def test_criterion_02_heavy_output_overestimates(mqv_results, acceptance):
    gaps = {}
    for n in (4, 5):
        rows = [e for e in mqv_results["shapes"] if e["n"] == n]
        hop = np.mean([e["hop_rescaled"]["point"] for e in rows])
        mcfe = np.mean([e["mcfe_pol"]["point"] for e in rows])
        gaps[n] = float(hop - mcfe)
    ok = gaps[4] >= 0 and gaps[5] >= 0 and gaps[5] > gaps[4]
    acceptance(2, "heavy-output overestimation", ok, f"gap n=4 {gaps[4]:.4f}, n=5 {gaps[5]:.4f}")
    assert ok


# -- 3, 4: Porter-Thomas limit and global depolarizing ------------------------


@pytest.fixture(scope="module")
def deep_qv():
    return [generate("qv", CircuitShape(5, 16), seed) for seed in range(300)]


def test_criterion_03_porter_thomas(deep_qv, acceptance):
    hops = [heavy_output_set(np.abs(statevector_of(c)) ** 2).ideal_hop for c in deep_qv]
    mean = float(np.mean(hops))
    ok = 0.826 <= mean <= 0.866
    acceptance(3, "Porter-Thomas limit", ok, f"mean p_H {mean:.4f}, target {PORTER_THOMAS_HOP:.4f}")
    assert ok


_criterion_04_state: dict = {}


@pytest.mark.parametrize("gamma", [0.3, 0.6, 0.9])
def test_criterion_04_global_depolarizing(deep_qv, gamma, acceptance):
    em = ErrorModel(global_pol=gamma)
    hops = []
    for c in deep_qv[:100]:
        heavy = heavy_output_set(np.abs(statevector_of(c)) ** 2)
        hops.append(heavy_output_probability(heavy, exact_output_distribution(c, em)))
    mean = float(np.mean(hops))
    expect = (1 + gamma * LN2) / 2
    ok = abs(mean - expect) < 0.02
    prev = _criterion_04_state.setdefault("ok", True)
    _criterion_04_state["ok"] = prev and ok
    _criterion_04_state.setdefault("detail", []).append(f"g={gamma}: {mean:.4f} vs {expect:.4f}")
    acceptance(4, "global depolarizing heavy-output law", _criterion_04_state["ok"], "; ".join(_criterion_04_state["detail"]))
    assert ok


# -- 5: QV decision -----------------------------------------------------------


def test_criterion_05_qv_decision(acceptance):
    rng = np.random.default_rng(5)
    correct = 0
    for _ in range(100):
        widths = range(2, int(rng.integers(4, 10)))
        estimates, expected = {}, None
        for n in widths:
            lb = QV_THRESHOLD + rng.choice([-1, 1]) * rng.uniform(1e-6, 0.05)
            if rng.random() < 0.1:
                estimates[n] = PolarizationEstimate.unavailable("engineered")
                continue
            estimates[n] = PolarizationEstimate(lb + 0.02, lb, lb + 0.04, shape=(n, n))
            if lb > QV_THRESHOLD:
                expected = n
        if qv_decision(estimates).largest_passing == expected:
            correct += 1
    ok = correct == 100
    acceptance(5, "QV decision logic", ok, f"{correct}/100 correct")
    assert ok


# -- 6: classical-fidelity closed forms --------------------------------------


def test_criterion_06_classical_bound(acceptance):
    worst = math.inf
    for n in range(1, 9):
        for gamma in np.round(np.arange(0.0, 1.0 + 1e-9, 0.05), 10):
            r = classical_fidelity_bound(n, float(gamma))
            assert math.isclose(r.classical, ((1 + gamma) ** n - 1) / (2**n - 1), abs_tol=1e-12)
            assert math.isclose(r.polarization, ((1 + 3 * gamma) ** n - 1) / (4**n - 1), abs_tol=1e-12)
            worst = min(worst, r.gap)
    r = classical_fidelity_bound(2, 0.9)
    ok = (
        worst >= -1e-12
        and abs(r.classical - 0.870) < 1e-9
        and abs(r.polarization - (13.69 - 1) / 15) < 1e-3
    )
    acceptance(6, "classical-fidelity closed forms", ok, f"min gap {worst:.3e}, n=2 g=0.9: {r.classical:.6f} / {r.polarization:.6f}")
    assert ok


# -- 7: noiseless-target property ---------------------------------------------


def test_criterion_07_noiseless_targets(acceptance):
    families = ("qv", "grid", "line", "hamsim")
    worst, count = 0.0, 0
    for j in range(100):
        family = families[j % 4]
        n = 2 + j % 5
        d = 1 + (j // 5) % 4
        rng = np.random.default_rng(7000 + j)
        graph = ConnectivityGraph.from_name("heavy-hexagon" if j % 2 else "line", n)
        c = generate(family, CircuitShape(n, d), 7000 + j)
        comp = compile_exact(c, graph, rng, random_placement=j % 3 == 0)
        ref = make_reference(c, comp, graph, perm_trick=j % 4 != 1)
        suite = build_suite(comp, ref, 4, 3, 3, rng)
        for mc in suite.m1 + suite.m2 + suite.m3:
            worst = max(worst, 1.0 - target_probability(mc))
            count += 1
    ok = count == 1000 and worst < 1e-9
    acceptance(7, "noiseless-target property", ok, f"{count} mirrors, worst 1-p {worst:.2e}")
    assert ok


# -- 8: KAK -------------------------------------------------------------------


def test_criterion_08_kak(acceptance):
    rng = np.random.default_rng(8)
    worst, cnots = 0.0, set()
    for _ in range(500):
        u = sample_haar_su4(rng)
        c = kak_decompose_su4(u)
        cnots.add(sum(1 for g in c.gates() if g.name == "CNOT"))
        worst = max(worst, phase_distance(unitary_of(c), u))
    ok = cnots == {3} and worst < 1e-9
    acceptance(8, "KAK decomposition", ok, f"CNOT counts {sorted(cnots)}, worst error {worst:.2e}")
    assert ok


# -- 9: compiler correctness ----------------------------------------------------


def test_criterion_09_compiler(acceptance):
    families = ("qv", "grid", "line", "hamsim")
    worst = 0.0
    for j in range(100):
        family = families[(j // 4) % 4]
        n = 1 + j % 4 if family != "hamsim" else 2 + j % 3
        graph = ConnectivityGraph.from_name("heavy-hexagon" if j % 2 else "line", n)
        rng = np.random.default_rng(900 + j)
        c = generate(family, CircuitShape(n, 1 + j % 5), 900 + j)
        cc = compile_exact(c, graph, rng, random_placement=j % 3 == 0)
        f = process_fidelity(cc.circuit, None, cc.target_unitary(unitary_of(c)))
        worst = max(worst, abs(1.0 - f))
    ok = worst < 1e-8
    acceptance(9, "compiler correctness", ok, f"worst |1-F| {worst:.2e}")
    assert ok


# -- 10: HamSim sensitivity -----------------------------------------------------


def _hamsim_gap(tmp_path, idle_z):
    cfg = CampaignConfig(
        family="hamsim",
        shapes=((3, 1), (3, 2), (4, 1), (4, 2)),
        circuits_per_shape=20,
        k=(20, 20, 20),
        shots=1000,
        error_model={"g1_pol": 0.999, "g2_pol": 0.99, "idle_z_rad": idle_z},
        seed=10,
        bootstrap_resamples=200,
    )
    res = run_campaign(cfg, tmp_path)
    cf = np.mean([e["classical_fid"]["point"] for e in res["shapes"]])
    mcfe = np.mean([e["mcfe_pol"]["point"] for e in res["shapes"]])
    return float(cf), float(mcfe)


def test_criterion_10_hamsim_sensitivity(tmp_path, acceptance):
    cf_z, mcfe_z = _hamsim_gap(tmp_path / "z", 0.08)
    cf_0, mcfe_0 = _hamsim_gap(tmp_path / "noz", 0.0)
    gap_z, gap_0 = cf_z - mcfe_z, cf_0 - mcfe_0
    ok = gap_z > 0 and gap_z > gap_0
    acceptance(
        10,
        "HamSim classical fidelity sensitivity",
        ok,
        f"with Z: {cf_z:.4f} vs {mcfe_z:.4f}; without: {cf_0:.4f} vs {mcfe_0:.4f}",
    )
    assert ok


# -- 11: denominator guard ------------------------------------------------------

_nonzero = st.floats(0.01, 1.0)


@given(
    m1=st.lists(st.floats(-1, 1), min_size=1, max_size=8),
    m2=st.lists(_nonzero, min_size=1, max_size=8),
    m3=st.lists(_nonzero, min_size=1, max_size=8),
    flip=st.sampled_from(["m2", "m3", "zero"]),
)
def test_denominator_guard_property(m1, m2, m3, flip):
    if flip == "m2":
        m2 = [-v for v in m2]
    elif flip == "m3":
        m3 = [-v for v in m3]
    else:
        m2 = [0.0] * len(m2)
    est = estimate_fidelity(m1, m2, m3, 3, np.random.default_rng(0), 50)
    assert not est.available and est.point is None and est.fidelity is None


def test_criterion_11_denominator_guard(acceptance):
    rng = np.random.default_rng(11)
    cases = [
        ([0.5, 0.4], [-0.2, 0.1], [0.6, 0.7]),
        ([0.5], [0.3, 0.2], [-0.1, -0.3]),
        ([0.2, 0.3], [0.0, 0.0], [0.5]),
        ([0.1], [0.4, -0.4], [0.9]),
    ]
    results = [estimate_fidelity(a, b, c, 4, rng, 200) for a, b, c in cases]
    flagged = [not r.available and r.point is None and r.to_json()["point"] is None and r.reason for r in results]
    raw = [mcfe_polarization(np.mean(a), np.mean(b), np.mean(c)) for a, b, c in cases]
    ok = all(flagged) and all(v is None for v in raw)
    acceptance(11, "estimator denominator guard", ok, f"{sum(map(bool, flagged))}/{len(cases)} flagged")
    assert ok
