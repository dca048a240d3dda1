"""Mirror-circuit polarization and process-fidelity estimators."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..metrics import fidelity_from_polarization
from ..sim.simulator import OutcomeCounts

DEFAULT_RESAMPLES = 1000
DEFAULT_CONFIDENCE = 0.95


def hamming_distribution(oc: OutcomeCounts) -> np.ndarray:
    """``h[k]``: fraction of shots at Hamming distance ``k`` from the target."""
    if oc.shots <= 0 or not oc.counts:
        raise ValueError("no shots recorded")
    if oc.target is None:
        raise ValueError("counts carry no target bitstring")
    n = len(oc.target)
    t = int(oc.target, 2)
    h = np.zeros(n + 1)
    for s, v in oc.counts.items():
        h[(int(s, 2) ^ t).bit_count()] += v
    return h / oc.shots


def polarization_from_hamming(h: np.ndarray) -> float:
    n = len(h) - 1
    d2 = 4.0**n
    weights = (-0.5) ** np.arange(n + 1)
    return float(d2 / (d2 - 1) * np.dot(weights, h) - 1.0 / (d2 - 1))


def observed_polarization(oc: OutcomeCounts) -> float:
    """Hamming-weighted success statistic of one mirror circuit."""
    return polarization_from_hamming(hamming_distribution(oc))


@dataclass(frozen=True)
class PolarizationEstimate:
    """Point estimate with a percentile-bootstrap interval.

    ``available`` is False when the estimator is undefined; the numeric
    fields are then ``None``.
    """

    point: float | None
    ci_low: float | None
    ci_high: float | None
    confidence: float = DEFAULT_CONFIDENCE
    shape: tuple[int, int] | None = None
    samples: tuple[int, ...] = ()
    fidelity: float | None = None
    fidelity_ci: tuple[float, float] | None = None
    available: bool = True
    reason: str = ""
    extra: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.available:
            if self.point is None or self.ci_low is None or self.ci_high is None:
                raise ValueError("available estimates need numeric fields")
            if not self.ci_low <= self.point <= self.ci_high:
                raise ValueError("interval must contain the point estimate")
        elif self.point is not None:
            raise ValueError("unavailable estimates carry no number")

    @property
    def lower_bound(self) -> float | None:
        """One-sided bound at ``(1 + confidence) / 2``."""
        return self.ci_low

    @classmethod
    def unavailable(cls, reason: str, **kw: Any) -> PolarizationEstimate:
        return cls(None, None, None, available=False, reason=reason, **kw)

    def to_json(self) -> dict[str, Any]:
        return {
            "point": self.point,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "confidence": self.confidence,
            "shape": list(self.shape) if self.shape else None,
            "samples": list(self.samples),
            "fidelity": self.fidelity,
            "fidelity_ci": list(self.fidelity_ci) if self.fidelity_ci else None,
            "available": self.available,
            "reason": self.reason,
        }


def mcfe_polarization(m1: float, m2: float, m3: float) -> float | None:
    """``m1 / sqrt(m2 m3)``, or ``None`` when the denominator is not positive."""
    den = m2 * m3
    if not den > 0:
        return None
    return m1 / np.sqrt(den)


def _percentile_interval(samples: np.ndarray, point: float, confidence: float) -> tuple[float, float]:
    alpha = (1.0 - confidence) / 2.0
    finite = samples[np.isfinite(samples)]
    if finite.size == 0:
        return point, point
    lo, hi = np.quantile(finite, [alpha, 1.0 - alpha])
    return float(min(lo, point)), float(max(hi, point))


def estimate_fidelity(
    pol_m1: Sequence[float],
    pol_m2: Sequence[float],
    pol_m3: Sequence[float],
    n: int,
    rng: np.random.Generator | None = None,
    resamples: int = DEFAULT_RESAMPLES,
    confidence: float = DEFAULT_CONFIDENCE,
    shape: tuple[int, int] | None = None,
) -> PolarizationEstimate:
    """Process-fidelity estimate from per-circuit observed polarizations.

    The polarization estimate is ``mean(M1) / sqrt(mean(M2) mean(M3))``;
    intervals come from resampling each mirror kind with replacement.
    """
    a = np.asarray(pol_m1, dtype=float)
    b = np.asarray(pol_m2, dtype=float)
    c = np.asarray(pol_m3, dtype=float)
    if min(a.size, b.size, c.size) == 0:
        raise ValueError("each mirror kind needs at least one polarization")
    samples = (a.size, b.size, c.size)
    point = mcfe_polarization(a.mean(), b.mean(), c.mean())
    if point is None:
        return PolarizationEstimate.unavailable(
            "mean M2 x mean M3 polarization is not positive", shape=shape, samples=samples, confidence=confidence
        )
    rng = rng if rng is not None else np.random.default_rng(0)
    boot = np.full(resamples, np.nan)
    if resamples:
        ma = a[rng.integers(0, a.size, size=(resamples, a.size))].mean(axis=1)
        mb = b[rng.integers(0, b.size, size=(resamples, b.size))].mean(axis=1)
        mc = c[rng.integers(0, c.size, size=(resamples, c.size))].mean(axis=1)
        den = mb * mc
        ok = den > 0
        boot[ok] = ma[ok] / np.sqrt(den[ok])
    lo, hi = _percentile_interval(boot, float(point), confidence)
    fid = float(fidelity_from_polarization(point, n))
    fid_ci = (float(fidelity_from_polarization(lo, n)), float(fidelity_from_polarization(hi, n)))
    return PolarizationEstimate(
        float(point),
        lo,
        hi,
        confidence,
        shape,
        samples,
        fid,
        fid_ci,
        extra={"invalid_resamples": int(np.sum(~np.isfinite(boot)))},
    )


def average_polarization(
    values: Sequence[float],
    rng: np.random.Generator | None = None,
    resamples: int = DEFAULT_RESAMPLES,
    confidence: float = DEFAULT_CONFIDENCE,
    shape: tuple[int, int] | None = None,
) -> PolarizationEstimate:
    """Mean over circuits with a percentile-bootstrap interval."""
    v = np.asarray([x for x in values if x is not None], dtype=float)
    if v.size == 0:
        return PolarizationEstimate.unavailable("no per-circuit estimates", shape=shape, confidence=confidence)
    rng = rng if rng is not None else np.random.default_rng(0)
    point = float(v.mean())
    boot = v[rng.integers(0, v.size, size=(resamples, v.size))].mean(axis=1) if resamples else np.array([])
    lo, hi = _percentile_interval(boot, point, confidence)
    return PolarizationEstimate(point, lo, hi, confidence, shape, (int(v.size),))
