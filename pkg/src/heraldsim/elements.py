"""Passive linear-optical elements as :class:`~heraldsim.fock.ModeTransform` values.

Conventions used throughout the package:

* A polarizing beamsplitter (PBS) carries no phase on reflection.
* The non-polarizing beamsplitter is symmetric, with a factor ``i`` on
  reflection.
* Angles are in radians.
"""

from __future__ import annotations

import math

import numpy as np

from .fock import ModeTransform

H_PROJ = np.array([[1, 0], [0, 0]], dtype=complex)
V_PROJ = np.array([[0, 0], [0, 1]], dtype=complex)
PLUS_PROJ = np.full((2, 2), 0.5, dtype=complex)
MINUS_PROJ = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)


def _pol_modes(*ports: str) -> tuple[tuple[str, str], ...]:
    return tuple((str(p), pol) for p in ports for pol in ("H", "V"))


def _distinct(*ports: str) -> None:
    if len(set(map(str, ports))) != len(ports):
        raise ValueError(f"ports must be distinct, got {ports}")


def _pbs(in1: str, in2: str, out1: str, out2: str, transmit: np.ndarray, reflect: np.ndarray) -> ModeTransform:
    _distinct(in1, in2, out1, out2)
    # forward block maps input ports (in1, in2) onto output ports (out1, out2)
    fwd = np.block([[transmit, reflect], [reflect, transmit]])
    zero = np.zeros((4, 4), dtype=complex)
    # the output ports start empty; the reverse block only completes the unitary
    full = np.block([[zero, fwd.conj().T], [fwd, zero]])
    return ModeTransform(_pol_modes(in1, in2, out1, out2), full)


def pbs_computational(in1: str, in2: str, out1: str, out2: str) -> ModeTransform:
    """PBS transmitting H and reflecting V.

    ``in1`` H exits at ``out1`` and ``in1`` V at ``out2``; ``in2`` is the
    mirror image.
    """
    return _pbs(in1, in2, out1, out2, H_PROJ, V_PROJ)


def pbs_diagonal(in1: str, in2: str, out1: str, out2: str) -> ModeTransform:
    """PBS rotated by 45 degrees: transmits ``|+>`` and reflects ``|->``."""
    return _pbs(in1, in2, out1, out2, PLUS_PROJ, MINUS_PROJ)


def rotation(port: str, angle: float) -> ModeTransform:
    """Rotate the polarization basis of ``port``: H -> cos H + sin V."""
    c, s = math.cos(angle), math.sin(angle)
    return ModeTransform(_pol_modes(port), np.array([[c, -s], [s, c]], dtype=complex))


def hadamard(port: str) -> ModeTransform:
    r = 1 / math.sqrt(2)
    return ModeTransform(_pol_modes(port), np.array([[r, r], [r, -r]], dtype=complex))


def beamsplitter(port1: str, port2: str, transmissivity: float) -> ModeTransform:
    """Polarization-independent beamsplitter with ``i`` on reflection."""
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {transmissivity}")
    _distinct(port1, port2)
    t = math.sqrt(transmissivity)
    r = 1j * math.sqrt(1.0 - transmissivity)
    eye = np.eye(2, dtype=complex)
    return ModeTransform(_pol_modes(port1, port2), np.block([[t * eye, r * eye], [r * eye, t * eye]]))


def phase_shift(port: str, pol: str, theta: float) -> ModeTransform:
    if pol not in ("H", "V"):
        raise ValueError(f"unknown polarization {pol!r}")
    return ModeTransform(((str(port), pol),), np.array([[np.exp(1j * theta)]]))


def pauli(port: str, which: str) -> ModeTransform:
    """Single-qubit Pauli correction on a polarization qubit (``I``, ``X``, ``Y`` or ``Z``)."""
    mats = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.diag([1, -1]),
    }
    try:
        return ModeTransform(_pol_modes(port), mats[which])
    except KeyError:
        raise ValueError(f"unknown Pauli {which!r}") from None
