"""Estimators, rescalings, pass conditions and fits."""
from .classical import (
    ClassicalBoundResult,
    IllConditionedError,
    classical_fidelity_bound,
    classical_fidelity,
    depolarizing_classical_fidelity,
    depolarizing_polarization,
    depolarizing_process_fidelity,
    normalized_classical_fidelity,
)
from .estimators import (
    PolarizationEstimate,
    average_polarization,
    estimate_fidelity,
    hamming_distribution,
    mcfe_polarization,
    observed_polarization,
    polarization_from_hamming,
)
from .heavy import (
    PORTER_THOMAS_HOP,
    QV_THRESHOLD,
    HeavyOutputResult,
    QVDecision,
    UndefinedRescaling,
    expected_hop_global_depolarizing,
    heavy_output_probability,
    heavy_output_set,
    qv_decision,
    rescale_hop_per_circuit,
    rescale_hop_standard,
)
from .volumetric import CSV_COLUMNS, ExpFit, GridCell, VolumetricGrid, fit_exponential, volumetric_fit, write_volumetric_csv

__all__ = [
    "ClassicalBoundResult",
    "CSV_COLUMNS",
    "ExpFit",
    "GridCell",
    "HeavyOutputResult",
    "IllConditionedError",
    "PORTER_THOMAS_HOP",
    "PolarizationEstimate",
    "QVDecision",
    "QV_THRESHOLD",
    "UndefinedRescaling",
    "VolumetricGrid",
    "classical_fidelity_bound",
    "average_polarization",
    "classical_fidelity",
    "depolarizing_classical_fidelity",
    "depolarizing_polarization",
    "depolarizing_process_fidelity",
    "estimate_fidelity",
    "expected_hop_global_depolarizing",
    "fit_exponential",
    "hamming_distribution",
    "heavy_output_probability",
    "heavy_output_set",
    "mcfe_polarization",
    "normalized_classical_fidelity",
    "observed_polarization",
    "polarization_from_hamming",
    "qv_decision",
    "rescale_hop_per_circuit",
    "rescale_hop_standard",
    "volumetric_fit",
    "write_volumetric_csv",
]
