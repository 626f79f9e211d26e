"""Optimal phase estimation with two live control qubits.

The sine state is built one qubit at a time and consumed by a
semiclassical inverse-QFT measurement as it is built.
"""
from .analysis import (
    ErrorStats,
    min_holevo_variance,
    pdf_optimal,
    pdf_uniform,
    sharpness_canonical,
    stats_from_distribution,
    stats_from_errors,
    stats_from_samples,
)
from .protocol import (
    MeasurementRecord,
    OutcomeDistribution,
    ProtocolConfig,
    canonical_distribution,
    enumerate_branches,
    inverse_qft_reference,
    prepare_full,
    run_streaming,
    sample_trials,
)
from .sinestate import SineStateParams, amplitudes, mu_coeffs, preparation_plan
from .statevec import Gate, StateVector

__version__ = "0.1.0"
