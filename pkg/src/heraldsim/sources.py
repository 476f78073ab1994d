"""Polarization-entangled photon-pair sources.

The down-conversion state is the truncated two-mode squeezer expansion

    sum_n (lam**n / n!) (a_H^dag b_H^dag + a_V^dag b_V^dag)**n |0>

so the n-pair sector has unnormalized squared weight ``lam**(2n) * (n+1)``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .fock import DEFAULT_MAX_PHOTONS, CapacityError, Channel, ChannelRegistry, FockState, create, vacuum


@dataclass(frozen=True)
class SourceSpec:
    port_x: str
    port_y: str
    strength: float = 0.1
    cutoff: int = 2
    overlap: float = 1.0

    def __post_init__(self) -> None:
        if self.port_x == self.port_y:
            raise ValueError("source ports must be distinct")
        if not self.strength >= 0:
            raise ValueError(f"strength must be >= 0, got {self.strength}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError(f"cutoff must be an integer >= 1, got {self.cutoff}")
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError(f"overlap must lie in [0, 1], got {self.overlap}")


def _registry(x: str, y: str, bins: int) -> ChannelRegistry:
    return ChannelRegistry.from_ports((x, y), bins=bins)


def bell_pair(port_x: str, port_y: str, max_photons: int = DEFAULT_MAX_PHOTONS) -> FockState:
    """``(|H>_x |H>_y + |V>_x |V>_y) / sqrt(2)``."""
    if port_x == port_y:
        raise ValueError("Bell pair ports must be distinct")
    reg = _registry(port_x, port_y, 1)
    r = 1 / math.sqrt(2)
    # channel order: xH, xV, yH, yV
    return FockState(reg, {(1, 0, 1, 0): r, (0, 1, 0, 1): r}, max_photons)


def _sector_terms(spec: SourceSpec, n: int, bins: int) -> dict[tuple[int, ...], complex]:
    width = 4 * bins
    terms = {}
    for k in range(n + 1):
        occ = [0] * width
        occ[0], occ[1] = k, n - k
        occ[2 * bins], occ[2 * bins + 1] = k, n - k
        terms[tuple(occ)] = spec.strength**n
    return terms


def _check_capacity(spec: SourceSpec, max_photons: int) -> None:
    if 2 * spec.cutoff > max_photons:
        raise CapacityError(f"cutoff {spec.cutoff} needs {2 * spec.cutoff} photons, bound is {max_photons}")


def spdc_state(spec: SourceSpec, bins: int = 1, max_photons: int = DEFAULT_MAX_PHOTONS) -> FockState:
    """Normalized multi-pair state with all pairs in temporal bin 0."""
    _check_capacity(spec, max_photons)
    amplitudes: dict[tuple[int, ...], complex] = {}
    for n in range(spec.cutoff + 1):
        amplitudes.update(_sector_terms(spec, n, bins))
    return FockState(_registry(spec.port_x, spec.port_y, bins), amplitudes, max_photons).normalized()


def _pair_creation(state: FockState, x: str, y: str, weights: dict[int, float]) -> FockState:
    out = None
    for b, w in weights.items():
        if w == 0:
            continue
        for pol in ("H", "V"):
            term = create(create(state, Channel(x, pol, b)), Channel(y, pol, b)) * w
            out = term if out is None else out + term
    return out


def spdc_state_distinguishable(
    spec: SourceSpec, bins: int | None = None, max_photons: int = DEFAULT_MAX_PHOTONS
) -> FockState:
    """Multi-pair state with partially distinguishable pairs.

    The first pair is emitted into bin 0. Pair ``m >= 2`` is emitted jointly
    into ``overlap * bin 0 + sqrt(1 - overlap**2) * bin m-1``. The registry
    carries at least ``cutoff`` bins; ``overlap = 1`` reproduces
    :func:`spdc_state` on the same registry.
    """
    _check_capacity(spec, max_photons)
    bins = max(bins or 0, spec.cutoff)
    v = spec.overlap
    total = None
    for n in range(spec.cutoff + 1):
        sector = vacuum(_registry(spec.port_x, spec.port_y, bins), max_photons)
        for m in range(1, n + 1):
            weights = {0: 1.0} if m == 1 else {0: v, m - 1: math.sqrt(1 - v * v)}
            sector = _pair_creation(sector, spec.port_x, spec.port_y, weights)
        sector = sector * (spec.strength**n / math.factorial(n))
        total = sector if total is None else total + sector
    return total.normalized()


def source_state(spec: SourceSpec, bins: int = 1, max_photons: int = DEFAULT_MAX_PHOTONS) -> FockState:
    """:func:`spdc_state` for ideal overlap, else the distinguishable model."""
    if spec.overlap == 1.0:
        return spdc_state(spec, bins, max_photons)
    return spdc_state_distinguishable(spec, bins, max_photons)


def bins_needed(spec: SourceSpec) -> int:
    return 1 if spec.overlap == 1.0 else spec.cutoff


def sectors(state: FockState, port_x: str) -> dict[int, FockState]:
    """Split a pair-source state into its n-pair components (unnormalized)."""
    idx = state.registry.port_indices(port_x)
    parts: dict[int, dict] = {}
    for occ, amp in state.amplitudes.items():
        parts.setdefault(sum(occ[i] for i in idx), {})[occ] = amp
    return {n: FockState(state.registry, terms, state.max_photons) for n, terms in sorted(parts.items())}


def truncation_weight(spec: SourceSpec) -> float:
    """Probability carried by the highest kept pair sector."""
    weights = [spec.strength ** (2 * n) * (n + 1) for n in range(spec.cutoff + 1)]
    return weights[-1] / sum(weights)


def single_photon(port: str, polarization: Sequence[complex], max_photons: int = DEFAULT_MAX_PHOTONS) -> FockState:
    """One photon at ``port`` with polarization amplitudes ``(H, V)``, normalized."""
    h, v = polarization
    return FockState(ChannelRegistry.from_ports([port]), {(1, 0): h, (0, 1): v}, max_photons).normalized()
