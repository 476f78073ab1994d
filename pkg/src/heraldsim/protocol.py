"""Heralded Bell-pair protocol built from a linear-optics CNOT.

Port map of the main circuit::

    source A -> ports 1, 2     source B -> ports 3, 4     ancilla C -> ports 5, 6

    upper PBS (H/V)  : inputs 2, 5 -> outputs d5, o2
    lower PBS (+/-)  : inputs 4, 6 -> outputs d6, o4

``d5`` is read in the +/- basis and ``d6`` in H/V; one photon in each signals
the gate. ``o2`` (+/- basis) and ``o4`` (H/V) then project the CNOT outputs so
that the remaining photons in ports 1 and 3 are left in a Bell state.

The Sliwa-Banaszek style variant drops sources A and B and taps modes 5 and 6
with beamsplitters into the heralded output ports 7 and 8.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .detection import IDEAL, DetectionPattern, DetectorModel, HeraldBranch, herald_accept, pattern, single
from .elements import beamsplitter, pbs_computational, pbs_diagonal
from .fock import (
    DEFAULT_MAX_PHOTONS,
    CapacityError,
    FockState,
    ModeTransform,
    apply_all,
    fidelity_to_bell,
    qubit_amplitudes,
    reduce_two_qubit,
    tensor_all,
)
from .sources import SourceSpec, bell_pair, bins_needed, sectors, single_photon, source_state, truncation_weight

GATE_PORTS = ("d5", "o2", "d6", "o4")
GATE_FRAME = {"d5": ("o2", "Z"), "d6": ("o4", "X")}


@dataclass(frozen=True)
class Circuit:
    ports: tuple[str, ...]
    transforms: tuple[ModeTransform, ...]
    gate_pattern: DetectionPattern
    output_pattern: DetectionPattern
    survivors: tuple[str, ...]
    consumed: tuple[str, ...]
    frame: Mapping[str, tuple[str, str]] = field(default_factory=dict)
    base_correction: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        known = set(self.ports)
        for t in self.transforms:
            if not set(t.ports) <= known:
                raise ValueError(f"transform uses unknown ports {sorted(set(t.ports) - known)}")
        detected = set(self.gate_pattern.ports) | set(self.output_pattern.ports)
        if not detected <= known or not set(self.survivors) <= known:
            raise ValueError("detector or surviving ports missing from the circuit")
        if detected & set(self.consumed):
            raise ValueError("detector ports must be terminal")

    def prepare(self, *states: FockState) -> FockState:
        """Tensor the given inputs and fill every other circuit port with vacuum."""
        state = tensor_all(states)
        missing = [p for p in self.ports if p not in state.registry.ports]
        return state.extended(missing) if missing else state

    def run(self, state: FockState) -> FockState:
        return apply_all(state, self.transforms).discard_vacuum(self.consumed)

    def herald(self, state: FockState, mode: str = "pauli_frame", model: DetectorModel = IDEAL) -> list[HeraldBranch]:
        return herald_accept(
            self.run(state), self.gate_pattern, self.output_pattern, mode, model, self.frame, self.base_correction
        )


def _gate_transforms() -> tuple[ModeTransform, ...]:
    return (pbs_computational("2", "5", "d5", "o2"), pbs_diagonal("4", "6", "d6", "o4"))


def _gate_pattern() -> DetectionPattern:
    return pattern(single("d5", "diagonal"), single("d6", "computational"))


def build_main_circuit() -> Circuit:
    return Circuit(
        ports=("1", "2", "3", "4", "5", "6") + GATE_PORTS,
        transforms=_gate_transforms(),
        gate_pattern=_gate_pattern(),
        output_pattern=pattern(single("o2", "diagonal"), single("o4", "computational")),
        survivors=("1", "3"),
        consumed=("2", "4", "5", "6"),
        frame={"d5": ("1", "Z"), "o2": ("1", "Z"), "d6": ("3", "X"), "o4": ("3", "X")},
    )


def build_gate_circuit(keep: Sequence[str] = ()) -> Circuit:
    """The CNOT alone: only ``d5`` and ``d6`` are detected, ``o2``/``o4`` survive.

    ``keep`` lists extra undetected ports (e.g. the idler ports 1 and 3).
    """
    return Circuit(
        ports=tuple(keep) + ("2", "4", "5", "6") + GATE_PORTS,
        transforms=_gate_transforms(),
        gate_pattern=_gate_pattern(),
        output_pattern=pattern(),
        survivors=tuple(keep) + ("o2", "o4"),
        consumed=("2", "4", "5", "6"),
        frame=GATE_FRAME,
    )


def build_sliwa_circuit(routing: float) -> Circuit:
    """Single-source variant: modes 5 and 6 continue to the gate with probability ``routing``.

    The remainder of each beam is tapped into the heralded output ports 7 and
    8. Every accepted branch heralds the singlet, which the fixed correction
    Z on 7 and X on 8 maps to phi+.
    """
    if not 0.0 < routing < 1.0:
        raise ValueError(f"routing must lie in (0, 1), got {routing}")
    return Circuit(
        ports=("2", "4", "5", "6", "7", "8") + GATE_PORTS,
        transforms=(beamsplitter("5", "7", routing), beamsplitter("6", "8", routing)) + _gate_transforms(),
        gate_pattern=_gate_pattern(),
        output_pattern=pattern(single("o2", "diagonal"), single("o4", "computational")),
        survivors=("7", "8"),
        consumed=("2", "4", "5", "6"),
        base_correction={"7": "Z", "8": "X"},
    )


# Results ---------------------------------------------------------------------


@dataclass(frozen=True)
class SectorRow:
    probability: float
    fidelity: float


@dataclass
class HeraldResult:
    """Per-pulse herald statistics for the surviving pair.

    ``fidelity`` is the overlap of the full heralded state of the surviving
    ports with phi+, counting components outside the one-photon-per-port
    subspace as failures; ``qubit_fidelity`` is the overlap of ``dm`` alone.
    """

    probability: float
    qubit_weight: float
    dm: np.ndarray
    fidelity: float
    qubit_fidelity: float
    sectors: dict[tuple[int, int, int], SectorRow] = field(default_factory=dict)
    truncation_weight: float = 0.0
    branches: list[HeraldBranch] = field(default_factory=list, repr=False)

    @property
    def infidelity(self) -> float:
        return 1.0 - self.fidelity


def summarize(branches: Sequence[HeraldBranch], survivors: Sequence[str]) -> HeraldResult:
    """Fold corrected herald branches into one result.

    The fidelity is NaN only when nothing is heralded.
    """
    prob = 0.0
    qubit_mass = 0.0
    dm = np.zeros((4, 4), dtype=complex)
    for b in branches:
        for w, s in b.corrected():
            qw, rho = reduce_two_qubit(s, *survivors)
            mass = b.probability * w * qw
            qubit_mass += mass
            dm += mass * rho
        prob += b.probability
    if qubit_mass > 0:
        dm /= qubit_mass
    qubit_weight = qubit_mass / prob if prob > 0 else 0.0
    qubit_fid = fidelity_to_bell(dm) if qubit_mass > 0 else math.nan
    if prob == 0:
        fid = math.nan
    else:
        fid = qubit_weight * qubit_fid if qubit_mass > 0 else 0.0
    return HeraldResult(prob, qubit_weight, dm, fid, qubit_fid, branches=list(branches))


def sector_breakdown(result: HeraldResult) -> list[tuple[int, int, int, float, float]]:
    return [(*k, row.probability, row.fidelity) for k, row in sorted(result.sectors.items())]


# Main protocol -----------------------------------------------------------------


def default_sources(
    strength_a: float = 0.1,
    strength_b: float = 0.1,
    strength_c: float = 0.1,
    cutoff: int = 2,
    overlap_c: float = 1.0,
) -> tuple[SourceSpec, SourceSpec, SourceSpec]:
    return (
        SourceSpec("1", "2", strength_a, cutoff),
        SourceSpec("3", "4", strength_b, cutoff),
        SourceSpec("5", "6", strength_c, cutoff, overlap_c),
    )


def _check_specs(specs: Sequence[SourceSpec], ports: Sequence[tuple[str, str]], max_photons: int) -> None:
    for spec, expected in zip(specs, ports):
        if (spec.port_x, spec.port_y) != expected:
            raise ValueError(f"source on ports {(spec.port_x, spec.port_y)} must use ports {expected}")
    needed = 2 * sum(s.cutoff for s in specs)
    if needed > max_photons:
        raise CapacityError(f"cutoffs need up to {needed} photons, bound is {max_photons}")


def _run_sectors(
    circuit: Circuit,
    states: Sequence[FockState],
    specs: Sequence[SourceSpec],
    labels: Sequence[int],
    mode: str,
    model: DetectorModel,
) -> dict[tuple[int, int, int], SectorRow]:
    """Herald statistics for each emission sector run on its own.

    Sectors are orthogonal on the undetected ports, so their probabilities add.
    ``labels`` places each source in the (n_A, n_B, n_C) key.
    """
    parts = [sectors(s, spec.port_x) for s, spec in zip(states, specs)]
    table = {}
    for combo in itertools.product(*(p.items() for p in parts)):
        key = [0, 0, 0]
        for slot, (n, _) in zip(labels, combo):
            key[slot] = n
        component = tensor_all(c for _, c in combo)
        weight = component.norm_sq
        res = summarize(circuit.herald(circuit.prepare(component.normalized()), mode, model), circuit.survivors)
        table[tuple(key)] = SectorRow(res.probability * weight, res.fidelity)
    return table


def run_herald(
    spec_a: SourceSpec,
    spec_b: SourceSpec,
    spec_c: SourceSpec,
    model: DetectorModel = IDEAL,
    mode: str = "pauli_frame",
    with_sectors: bool = True,
    max_photons: int = DEFAULT_MAX_PHOTONS,
) -> HeraldResult:
    """Run the three-source protocol; source C may use the distinguishability model."""
    specs = (spec_a, spec_b, spec_c)
    _check_specs(specs, [("1", "2"), ("3", "4"), ("5", "6")], max_photons)
    circuit = build_main_circuit()
    bins = max(bins_needed(s) for s in specs)
    states = [source_state(s, bins, max_photons) for s in specs]
    result = summarize(circuit.herald(circuit.prepare(*states), mode, model), circuit.survivors)
    if with_sectors:
        result.sectors = _run_sectors(circuit, states, specs, (0, 1, 2), mode, model)
    result.truncation_weight = max(truncation_weight(s) for s in specs)
    return result


def run_bell_inputs(model: DetectorModel = IDEAL, mode: str = "pauli_frame") -> HeraldResult:
    """Protocol with exactly one ideal Bell pair from each source."""
    circuit = build_main_circuit()
    state = circuit.prepare(bell_pair("1", "2"), bell_pair("3", "4"), bell_pair("5", "6"))
    return summarize(circuit.herald(state, mode, model), circuit.survivors)


def run_sliwa(
    strength: float,
    routing: float,
    model: DetectorModel = IDEAL,
    mode: str = "pauli_frame",
    cutoff: int = 3,
    with_sectors: bool = True,
    max_photons: int = DEFAULT_MAX_PHOTONS,
) -> HeraldResult:
    """Single-source variant; sector keys are ``(0, 0, n_C)``."""
    spec = SourceSpec("5", "6", strength, cutoff)
    _check_specs([spec], [("5", "6")], max_photons)
    circuit = build_sliwa_circuit(routing)
    state = source_state(spec, 1, max_photons)
    result = summarize(circuit.herald(circuit.prepare(state), mode, model), circuit.survivors)
    if with_sectors:
        result.sectors = _run_sectors(circuit, [state], [spec], (2,), mode, model)
    result.truncation_weight = truncation_weight(spec)
    return result


def sweep_sliwa(
    strength: float, routings: Sequence[float], model: DetectorModel = IDEAL, mode: str = "pauli_frame"
) -> list[tuple[float, float, float]]:
    """``(routing, herald probability, fidelity)`` for each routing value."""
    rows = []
    for r in routings:
        res = run_sliwa(strength, r, model, mode, with_sectors=False)
        rows.append((r, res.probability, res.fidelity))
    return rows


def sweep_strength(
    strengths: Sequence[float], model: DetectorModel = IDEAL, mode: str = "pauli_frame", cutoff: int = 2
) -> list[tuple[float, float, float]]:
    """Equal strength on all three sources: ``(strength, herald probability, fidelity)``."""
    rows = []
    for lam in strengths:
        res = run_herald(*default_sources(lam, lam, lam, cutoff), model, mode, with_sectors=False)
        rows.append((lam, res.probability, res.fidelity))
    return rows


# Qubit-level reference ----------------------------------------------------------


def _cnot(n: int, control: int, target: int) -> np.ndarray:
    dim = 2**n
    u = np.zeros((dim, dim))
    for i in range(dim):
        bits = [(i >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[control]:
            bits[target] ^= 1
        u[int("".join(map(str, bits)), 2), i] = 1
    return u


def qubit_oracle_eq1() -> np.ndarray:
    """Ideal CNOT (control qubit 2, target qubit 4) on phi+_12 x phi+_34.

    Amplitudes are indexed by the bit string ``q1 q2 q3 q4``.
    """
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    # kron(phi_12, phi_34) is already ordered q1 q2 q3 q4
    return _cnot(4, 1, 3) @ np.kron(phi, phi)


_PLUS = np.array([1, 1]) / math.sqrt(2)
_MINUS = np.array([1, -1]) / math.sqrt(2)
_ZERO = np.array([1, 0])
_ONE = np.array([0, 1])


def qubit_oracle_swap(q4: int = 0, q2: str = "+") -> tuple[float, np.ndarray]:
    """Project qubit 4 on ``|q4>`` and qubit 2 on ``|q2>``; return qubits 1, 3."""
    psi = qubit_oracle_eq1().reshape(2, 2, 2, 2)
    b4 = _ZERO if q4 == 0 else _ONE
    b2 = _PLUS if q2 == "+" else _MINUS
    out = np.einsum("abcd,b,d->ac", psi, b2.conj(), b4.conj()).reshape(4)
    prob = float(np.vdot(out, out).real)
    return prob, out / math.sqrt(prob)


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vec) > 1e-9))
    return vec * (abs(vec[k]) / vec[k])


def optical_cnot_branches(model: DetectorModel = IDEAL) -> list[tuple[dict[str, str], float, np.ndarray]]:
    """Four-qubit state of ports (1, o2, 3, o4) after the optical gate, per gate outcome.

    Each entry is ``(outcome, probability, corrected amplitudes)`` with the
    global phase fixed so the first non-zero amplitude is real positive.
    """
    circuit = build_gate_circuit(keep=("1", "3"))
    state = circuit.prepare(bell_pair("1", "2"), bell_pair("3", "4"), bell_pair("5", "6"))
    rows = []
    for b in circuit.herald(state, "pauli_frame", model):
        ((_, s),) = b.corrected()
        _, amps = qubit_amplitudes(s, ["1", "o2", "3", "o4"])
        rows.append((b.outcome, b.probability, _fix_phase(amps)))
    return rows


def run_gate(
    control: Sequence[complex], target: Sequence[complex], model: DetectorModel = IDEAL, mode: str = "pauli_frame"
) -> tuple[float, np.ndarray]:
    """Optical CNOT on single-photon polarization qubits.

    Returns the success probability and the corrected two-qubit density
    matrix of the outputs (o2, o4).
    """
    circuit = build_gate_circuit()
    state = circuit.prepare(single_photon("2", control), single_photon("4", target), bell_pair("5", "6"))
    branches = circuit.herald(state, mode, model)
    res = summarize(branches, circuit.survivors)
    return res.probability, res.dm


def gate_truth_table(model: DetectorModel = IDEAL, mode: str = "pauli_frame") -> list[tuple[int, int, float, int, int, float]]:
    """Rows ``(control, target, success probability, out control, out target, weight)``.

    The output bits are the most likely computational outcome of the
    corrected output state and ``weight`` is its probability.
    """
    rows = []
    for c, t in itertools.product((0, 1), repeat=2):
        prob, dm = run_gate(np.eye(2)[c], np.eye(2)[t], model, mode)
        diag = np.real(np.diag(dm))
        k = int(np.argmax(diag))
        rows.append((c, t, prob, k >> 1, k & 1, float(diag[k])))
    return rows
