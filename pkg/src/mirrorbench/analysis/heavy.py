"""Heavy-output statistics, their rescalings, and the quantum-volume rule."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .estimators import PolarizationEstimate

QV_THRESHOLD = 1.0 / (3.0 * math.log(2.0))
PORTER_THOMAS_HOP = (1.0 + math.log(2.0)) / 2.0


class UndefinedRescaling(ValueError):
    pass


@dataclass(frozen=True)
class HeavyOutputResult:
    heavy: frozenset[int]
    ideal_hop: float
    observed_hop: float | None = None
    rescaled: float | None = None

    @property
    def size(self) -> int:
        return len(self.heavy)


def heavy_output_set(dist: np.ndarray, atol: float = 1e-9) -> HeavyOutputResult:
    """Outcomes with ideal probability strictly above the median."""
    p = np.asarray(dist, dtype=float)
    if abs(p.sum() - 1.0) > atol:
        raise ValueError(f"distribution sums to {p.sum()}, not 1")
    med = np.median(p)
    heavy = np.flatnonzero(p > med)
    return HeavyOutputResult(frozenset(int(i) for i in heavy), float(p[heavy].sum()))


def heavy_output_probability(heavy: frozenset[int] | HeavyOutputResult, observed: np.ndarray) -> float:
    """Probability mass of ``observed`` on the heavy set."""
    h = heavy.heavy if isinstance(heavy, HeavyOutputResult) else heavy
    idx = np.fromiter(h, dtype=np.int64, count=len(h))
    return float(np.asarray(observed, dtype=float)[idx].sum()) if idx.size else 0.0


def rescale_hop_standard(p_obs: float) -> float:
    """Polarization implied by a heavy-output probability in the Porter-Thomas limit."""
    return (2.0 * p_obs - 1.0) / math.log(2.0)


def expected_hop_global_depolarizing(gamma: float) -> float:
    return (1.0 + gamma * math.log(2.0)) / 2.0


def rescale_hop_per_circuit(p_obs: float, p_ideal: float, atol: float = 1e-12) -> float:
    """Rescale by the circuit's own ideal heavy-output probability."""
    if abs(p_ideal - 0.5) <= atol:
        raise UndefinedRescaling("ideal heavy-output probability is 1/2; rescaling undefined")
    return (p_obs - 0.5) / (p_ideal - 0.5)


@dataclass(frozen=True)
class QVDecision:
    largest_passing: int | None
    passing: tuple[int, ...]
    threshold: float = QV_THRESHOLD

    @property
    def quantum_volume(self) -> int | None:
        return None if self.largest_passing is None else 2**self.largest_passing

    def describe(self) -> str:
        if self.largest_passing is None:
            return "none passing"
        return f"QV = 2^{self.largest_passing} = {self.quantum_volume}"


def qv_decision(
    estimates: Mapping[int, PolarizationEstimate | float],
    threshold: float = QV_THRESHOLD,
) -> QVDecision:
    """Largest square width whose lower confidence bound strictly exceeds ``threshold``.

    Values may be estimates (their ``lower_bound`` is used) or lower bounds.
    """
    passing = []
    for n, est in estimates.items():
        if isinstance(est, PolarizationEstimate):
            if not est.available:
                continue
            lb = est.lower_bound
        else:
            lb = float(est)
        if lb is not None and lb > threshold:
            passing.append(int(n))
    passing.sort()
    return QVDecision(passing[-1] if passing else None, tuple(passing), threshold)
