"""Simulator for complete Bell-state analysis of photon pairs hyperentangled
in polarization and spatial mode."""

from .analyzer import (
    BellStateAnalyzer,
    DetectorLabel,
    DetectorSignature,
    build_momentum_bsa,
    build_polarization_bsa,
    classify,
    decode,
    outcome_distribution,
)
from .elements import (
    CircuitDescription,
    ElementOp,
    apply,
    beamsplitter,
    compose,
    hwp,
    mode_phase,
    pa_45,
    pbs,
    qwp,
)
from .hilbert import (
    BellLabel,
    basis_ket,
    bell_state,
    density_matrix,
    hyper_product,
    partial_trace_photon1,
    trace_distance,
)
from .measurement import SampleReport, sample
from .protocols import (
    dense_code_roundtrip,
    encode,
    nonlocal_bsm,
    nonlocal_label_law,
    run_dense_coding,
    security_check,
)

__version__ = "0.1.0"
