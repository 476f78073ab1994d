"""Storage-loop memories holding the two halves of a heralded pair.

Each loop applies, once per round trip, a birefringent phase ``diag(1, e^{i theta})``,
an optional bit flip, and a polarization-independent phase. Loss is a
per-cycle survival probability that discards events rather than degrading the
stored qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import BELL, check_two_qubit_dm, fidelity_to_bell, pure_dm

_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class MemoryParams:
    cycles: int = 0
    survival: tuple[float, float] | float = (1.0, 1.0)
    birefringence: tuple[float, float] = (0.0, 0.0)
    common_phase: tuple[float, float] = (0.0, 0.0)
    bitflip: bool = False

    def __post_init__(self) -> None:
        if int(self.cycles) != self.cycles or self.cycles < 0:
            raise ValueError(f"cycles must be a non-negative integer, got {self.cycles}")
        survival = self.survival
        if isinstance(survival, (int, float)):
            survival = (float(survival), float(survival))
        object.__setattr__(self, "survival", tuple(survival))
        if any(not 0.0 <= s <= 1.0 for s in self.survival):
            raise ValueError(f"survival must lie in [0, 1], got {self.survival}")


def _loop_cycle(theta: float, common: float, bitflip: bool) -> np.ndarray:
    u = np.diag([1.0, np.exp(1j * theta)])
    if bitflip:
        u = _X @ u
    return np.exp(1j * common) * u


def memory_evolve(dm: np.ndarray, params: MemoryParams) -> tuple[float, np.ndarray]:
    """Store both photons for ``params.cycles`` round trips.

    Returns the joint survival probability and the renormalized output state.
    """
    dm = check_two_qubit_dm(dm)
    k = params.cycles
    ops = [
        np.linalg.matrix_power(_loop_cycle(theta, common, params.bitflip), k)
        for theta, common in zip(params.birefringence, params.common_phase)
    ]
    u = np.kron(ops[0], ops[1])
    out = u @ dm @ u.conj().T
    out = (out + out.conj().T) / 2
    out /= np.trace(out).real
    survival = math.prod(s**k for s in params.survival)
    return survival, out


def relative_phase_state(phi: float) -> np.ndarray:
    """Density matrix of ``(|00> + e^{i phi} |11>) / sqrt(2)``."""
    return pure_dm(np.array([1, 0, 0, np.exp(1j * phi)]) / math.sqrt(2))


def bitflip_cancellation_check(theta: float, cycles: int, bitflip: bool = True) -> float:
    """Fidelity to phi+ after storing phi+ with birefringence ``theta`` in the first loop.

    With bit flips every cycle, an even number of cycles cancels the phase.
    """
    if cycles % 2:
        raise ValueError("bit-flip cancellation needs an even number of cycles")
    params = MemoryParams(cycles=cycles, birefringence=(theta, 0.0), bitflip=bitflip)
    _, out = memory_evolve(pure_dm(BELL["phi+"]), params)
    return fidelity_to_bell(out)
