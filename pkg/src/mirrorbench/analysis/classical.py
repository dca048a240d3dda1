"""Normalized classical fidelity and its relation to process fidelity."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..metrics import polarization_from_fidelity


class IllConditionedError(ValueError):
    """The ideal distribution is too close to uniform for normalization."""


def classical_fidelity(p: np.ndarray, q: np.ndarray) -> float:
    """``(sum_x sqrt(p(x) q(x)))**2``."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    q = np.clip(np.asarray(q, dtype=float), 0.0, None)
    return float(np.sum(np.sqrt(p * q)) ** 2)


def normalized_classical_fidelity(
    p_ideal: np.ndarray,
    p_observed: np.ndarray,
    atol: float = 1e-9,
    min_gap: float = 1e-6,
) -> float:
    """Classical fidelity rescaled so the uniform distribution scores 0.

    The baseline is the classical fidelity between the ideal and the
    uniform distribution.
    """
    p = np.asarray(p_ideal, dtype=float)
    q = np.asarray(p_observed, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions differ in size")
    if abs(p.sum() - 1) > atol or abs(q.sum() - 1) > atol:
        raise ValueError("distributions must be normalized")
    base = classical_fidelity(p, np.full(p.shape, 1.0 / p.size))
    if 1.0 - base < min_gap:
        raise IllConditionedError("ideal distribution is (nearly) uniform")
    return (classical_fidelity(p, q) - base) / (1.0 - base)


def depolarizing_classical_fidelity(n: int, gamma: float) -> float:
    """Normalized classical fidelity of tensor depolarizing noise on a definite-outcome circuit."""
    return ((1.0 + gamma) ** n - 1.0) / (2.0**n - 1.0)


def depolarizing_polarization(n: int, gamma: float) -> float:
    """Polarization of the tensor product of ``n`` depolarizing channels."""
    return ((1.0 + 3.0 * gamma) ** n - 1.0) / (4.0**n - 1.0)


def depolarizing_process_fidelity(n: int, gamma: float) -> float:
    return ((1.0 + 3.0 * gamma) / 4.0) ** n


@dataclass(frozen=True)
class ClassicalBoundResult:
    classical: float
    polarization: float
    process_fidelity: float
    bound_holds: bool
    z_condition: bool | None = None

    @property
    def gap(self) -> float:
        return self.classical - self.polarization


def _is_z_type(label: str) -> bool:
    return set(label) <= {"I", "Z"} and set(label) != {"I"}


def classical_fidelity_bound(
    n: int,
    gamma: float | None = None,
    pauli_rates: Mapping[str, float] | None = None,
    atol: float = 1e-12,
) -> ClassicalBoundResult:
    """Closed forms for a definite-outcome circuit followed by one error channel.

    Give ``gamma`` for tensor-product depolarizing noise, or ``pauli_rates``
    (labels of length ``n``, identity rate implied) for a stochastic Pauli
    channel.  ``z_condition`` reports whether the Z-type rates reach
    ``(2^n - 1)/(4^n - 1) (1 - rate_I)``, which is equivalent to the bound.
    """
    if (gamma is None) == (pauli_rates is None):
        raise ValueError("give exactly one of gamma or pauli_rates")
    if gamma is not None:
        if not -1.0 / 3.0 - atol <= gamma <= 1.0:
            raise ValueError("single-qubit polarization outside [-1/3, 1]")
        ft = depolarizing_classical_fidelity(n, gamma)
        pol = depolarizing_polarization(n, gamma)
        return ClassicalBoundResult(ft, pol, depolarizing_process_fidelity(n, gamma), ft - pol >= -atol)
    rates = dict(pauli_rates)
    for label, v in rates.items():
        if len(label) != n or set(label) - set("IXYZ"):
            raise ValueError(f"bad Pauli label {label!r}")
        if v < 0:
            raise ValueError("rates must be nonnegative")
    ident = "I" * n
    total = sum(v for k, v in rates.items() if k != ident)
    if total > 1 + atol:
        raise ValueError("Pauli rates exceed 1")
    r_id = rates.get(ident, 1.0 - total)
    if abs(r_id + total - 1.0) > 1e-9:
        raise ValueError("rates must sum to 1")
    z_sum = sum(v for k, v in rates.items() if _is_z_type(k))
    d = 2.0**n
    ft = d / (d - 1) * (r_id + z_sum - 1.0 / d)
    pol = float(polarization_from_fidelity(r_id, n))
    cond = z_sum >= (d - 1) / (d * d - 1) * (1 - r_id) - atol
    return ClassicalBoundResult(ft, pol, r_id, ft - pol >= -atol, cond)
