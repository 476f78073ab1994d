"""Exact simulation of heralded polarization entanglement from pair sources and a linear-optics CNOT."""

from .detection import DetectionPattern, DetectorModel, Measurement, Requirement, herald_accept, measure, pattern, single
from .fock import (
    BELL,
    CapacityError,
    Channel,
    ChannelRegistry,
    FockState,
    InvalidStateError,
    ModeTransform,
    apply_transform,
    create,
    fidelity_to_bell,
    inner,
    project_counts,
    reduce_two_qubit,
    tensor,
    vacuum,
)
from .memory import MemoryParams, bitflip_cancellation_check, memory_evolve, relative_phase_state
from .protocol import (
    HeraldResult,
    build_main_circuit,
    gate_truth_table,
    qubit_oracle_eq1,
    qubit_oracle_swap,
    run_herald,
    run_sliwa,
    sector_breakdown,
)
from .sources import SourceSpec, bell_pair, spdc_state, spdc_state_distinguishable

__all__ = [
    "BELL",
    "CapacityError",
    "Channel",
    "ChannelRegistry",
    "DetectionPattern",
    "DetectorModel",
    "FockState",
    "HeraldResult",
    "InvalidStateError",
    "Measurement",
    "MemoryParams",
    "ModeTransform",
    "Requirement",
    "SourceSpec",
    "apply_transform",
    "bell_pair",
    "bitflip_cancellation_check",
    "build_main_circuit",
    "create",
    "fidelity_to_bell",
    "gate_truth_table",
    "herald_accept",
    "inner",
    "measure",
    "memory_evolve",
    "pattern",
    "project_counts",
    "qubit_oracle_eq1",
    "qubit_oracle_swap",
    "reduce_two_qubit",
    "relative_phase_state",
    "run_herald",
    "run_sliwa",
    "sector_breakdown",
    "single",
    "spdc_state",
    "spdc_state_distinguishable",
    "tensor",
    "vacuum",
]
