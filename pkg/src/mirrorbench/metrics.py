"""Conversions between process fidelity and polarization."""
from __future__ import annotations

import numpy as np


def polarization_from_fidelity(f, n: int):
    d2 = 4.0**n
    return (d2 * np.asarray(f) - 1.0) / (d2 - 1.0)


def fidelity_from_polarization(gamma, n: int):
    d2 = 4.0**n
    return 1.0 - (d2 - 1.0) / d2 * (1.0 - np.asarray(gamma))


def process_fidelity_unitaries(u: np.ndarray, v: np.ndarray) -> float:
    """``|Tr(u^dagger v)|^2 / d^2`` for two unitaries."""
    d = u.shape[0]
    return float(abs(np.vdot(u.ravel(), v.ravel())) ** 2 / d**2)
