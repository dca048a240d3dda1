"""Noisy execution and exact channel oracles."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..circuit import Circuit, OracleLimitError, QubitPermutation, bitstring
from ..metrics import polarization_from_fidelity
from .backend import get_backend
from .noise import ErrorModel
from .program import Program, build_program, unravel

SIMULATOR_LIMIT = 14
DENSITY_LIMIT = 10
EXACT_SAMPLING_LIMIT = 8
POLARIZATION_ORACLE_LIMIT = 6


@dataclass
class OutcomeCounts:
    counts: dict[str, int]
    shots: int
    target: str | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        total = sum(self.counts.values())
        if total != self.shots:
            raise ValueError(f"counts sum to {total}, expected {self.shots}")
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("counts must be nonnegative")

    @property
    def width(self) -> int:
        if self.target is not None:
            return len(self.target)
        return len(next(iter(self.counts)))

    def probabilities(self) -> np.ndarray:
        n = self.width
        p = np.zeros(1 << n)
        for s, v in self.counts.items():
            p[int(s, 2)] += v
        return p / self.shots

    def to_json(self) -> dict[str, Any]:
        return {"counts": dict(sorted(self.counts.items())), "shots": self.shots, "target": self.target, "metadata": self.metadata}

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> OutcomeCounts:
        return cls({k: int(v) for k, v in d["counts"].items()}, int(d["shots"]), d.get("target"), d.get("metadata", {}))

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> OutcomeCounts:
        return cls.from_json(json.loads(Path(path).read_text()))


def apply_readout(probs: np.ndarray, flip: float, n: int) -> np.ndarray:
    """Independent bit flips with probability ``flip`` on every qubit.

    ``probs`` may carry leading batch axes.
    """
    if flip == 0.0:
        return probs
    lead = probs.shape[:-1]
    t = probs.reshape(lead + (2,) * n)
    off = len(lead)
    for q in range(n):
        t = (1.0 - flip) * t + flip * np.flip(t, axis=off + q)
    return t.reshape(probs.shape)


def _check_width(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise OracleLimitError(f"width {n} exceeds {what} limit {limit}")


def _density_matrix(prog: Program, rho: np.ndarray, backend: str | None) -> np.ndarray:
    kern = get_backend(backend)
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    kern.run_dm(prog.nreg, prog.ops, prog.params, prog.mats, prog.ptab, rho)
    return rho


def final_density_matrix(c: Circuit, em: ErrorModel | None = None, backend: str | None = None) -> np.ndarray:
    _check_width(c.width, DENSITY_LIMIT, "density-matrix")
    d = 1 << c.width
    rho = np.zeros((d, d), dtype=np.complex128)
    rho[0, 0] = 1.0
    return _density_matrix(build_program(c, em), rho, backend)


def exact_output_distribution(
    c: Circuit, em: ErrorModel | None = None, backend: str | None = None
) -> np.ndarray:
    """Outcome probabilities indexed by basis integer (qubit 0 most significant)."""
    em = em or ErrorModel()
    rho = final_density_matrix(c, em, backend)
    p = np.clip(np.real(np.diag(rho)), 0.0, None)
    p = p / p.sum()
    return apply_readout(p, em.readout_flip, c.width)


def _to_counts(tally: np.ndarray, n: int) -> dict[str, int]:
    return {bitstring(int(i), n): int(tally[i]) for i in np.flatnonzero(tally)}


def simulate_counts(
    c: Circuit,
    em: ErrorModel | None,
    shots: int,
    rng: np.random.Generator,
    target: str | None = None,
    method: str = "auto",
    max_trajectories: int = 256,
    backend: str | None = None,
) -> OutcomeCounts:
    """Sample ``shots`` measurement outcomes of ``c`` under ``em``.

    ``method="exact"`` samples from the exact noisy distribution;
    ``"trajectory"`` unravels every channel into sampled Pauli errors, one
    noise realization per batch of shots.  ``"auto"`` uses the exact path
    for small registers.
    """
    em = em or ErrorModel()
    n = c.width
    if shots < 1:
        raise ValueError("shots must be positive")
    _check_width(n, SIMULATOR_LIMIT, "simulator")
    if method == "auto":
        method = "exact" if n <= EXACT_SAMPLING_LIMIT else "trajectory"
    if method == "exact":
        p = exact_output_distribution(c, em, backend)
        tally = rng.multinomial(shots, p)
    elif method == "trajectory":
        tally = _trajectory_tally(c, em, shots, rng, max_trajectories, backend)
    else:
        raise ValueError(f"unknown method {method!r}")
    return OutcomeCounts(_to_counts(tally, n), shots, target, {"method": method})


def _trajectory_tally(c, em, shots, rng, max_trajectories, backend) -> np.ndarray:
    n = c.width
    T = int(min(shots, max_trajectories))
    per = np.full(T, shots // T)
    per[: shots % T] += 1
    prog, errors = unravel(build_program(c, em), T, rng)
    psi = np.zeros((T, 1 << n), dtype=np.complex128)
    psi[:, 0] = 1.0
    kern = get_backend(backend)
    kern.run_sv(prog.nreg, prog.ops, prog.params, prog.mats, errors, psi)
    probs = np.abs(psi) ** 2
    probs /= probs.sum(axis=1, keepdims=True)
    probs = apply_readout(probs, em.readout_flip, n)
    tally = np.zeros(1 << n, dtype=np.int64)
    for t in range(T):
        tally += rng.multinomial(per[t], probs[t])
    return tally


def process_fidelity(
    c: Circuit,
    em: ErrorModel | None,
    target: np.ndarray,
    limit: int = POLARIZATION_ORACLE_LIMIT,
    backend: str | None = None,
) -> float:
    """Process fidelity between the noisy channel of ``c`` and unitary ``target``.

    Computed from the Choi state: ``c`` acts on the system half of a
    maximally entangled pair, and the overlap with ``(target (x) I)|Phi>``
    is the fidelity.
    """
    n = c.width
    _check_width(n, limit, "process-fidelity oracle")
    d = 1 << n
    if target.shape != (d, d):
        raise ValueError(f"target must be {d}x{d}")
    phi = np.zeros(d * d, dtype=np.complex128)
    phi[np.arange(d) * d + np.arange(d)] = 1.0 / np.sqrt(d)
    rho = np.outer(phi, phi.conj())
    prog = build_program(c, em, nreg=2 * n)
    rho = _density_matrix(prog, rho, backend)
    v = (np.asarray(target, dtype=np.complex128) / np.sqrt(d)).ravel()
    return float(np.real(np.vdot(v, rho @ v)))


def exact_polarization(
    c: Circuit,
    em: ErrorModel | None,
    target: np.ndarray,
    perm: QubitPermutation | None = None,
    limit: int = POLARIZATION_ORACLE_LIMIT,
    backend: str | None = None,
) -> float:
    """Polarization of the noisy ``c`` against ``P @ target``."""
    if perm is not None:
        target = perm.to_matrix() @ target
    return float(polarization_from_fidelity(process_fidelity(c, em, target, limit, backend), c.width))
