"""Simultaneous estimation of two phases in a Mach-Zehnder interferometer with homodyne detection."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    EstimatorError,
    IndeterminatePhaseError,
    MZIError,
    PhysicalityError,
    SingularFisherError,
    StructuralError,
)
from .estimation import (
    EstimateRecord,
    SampleBatch,
    closed_form_estimate,
    mle_numeric,
    mle_phi_d,
    mle_phi_s,
    sample,
    statistics,
)
from .fisher import (
    FisherMatrix,
    crb,
    crb_pseudo,
    fim_exact,
    fim_noise_asymptotic,
    fim_signal_asymptotic,
    fim_total_asymptotic,
)
from .gaussian import GaussianState, ProbeState, apply_network, make_probe, mean_photon_number
from .homodyne import HomodyneDistribution, LoSetting, output_distribution, resolve_lo
from .interferometer import PhasePair, decompose, mzi_unitary

__all__ = [
    "ConfigurationError",
    "EstimateRecord",
    "EstimatorError",
    "FisherMatrix",
    "GaussianState",
    "HomodyneDistribution",
    "IndeterminatePhaseError",
    "LoSetting",
    "MZIError",
    "PhasePair",
    "PhysicalityError",
    "ProbeState",
    "SampleBatch",
    "SingularFisherError",
    "StructuralError",
    "apply_network",
    "closed_form_estimate",
    "crb",
    "crb_pseudo",
    "decompose",
    "fim_exact",
    "fim_noise_asymptotic",
    "fim_signal_asymptotic",
    "fim_total_asymptotic",
    "make_probe",
    "mean_photon_number",
    "mle_numeric",
    "mle_phi_d",
    "mle_phi_s",
    "mzi_unitary",
    "output_distribution",
    "resolve_lo",
    "sample",
    "statistics",
]
