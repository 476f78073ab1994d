"""Detector models and post-selection on detection patterns.

Each detector port resolves polarization in a chosen basis: a diagonal-basis
requirement rotates the port with a half-wave (Hadamard) element and then
counts H/V, so the two count slots always mean ``(H, V)`` or ``(+, -)``.
Detectors are blind to temporal bins.

An efficiency below one places a beamsplitter of transmissivity ``eta`` into
an unobserved loss mode in front of every detected channel. The conditioned
output is then an ensemble over the unobserved outcomes.
"""

from __future__ import annotations

import functools
import itertools
import math
from collections import defaultdict
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .elements import hadamard, pauli
from .fock import FockState, InvalidStateError, apply_transform, split

BASES = ("computational", "diagonal")
LABELS = {"computational": ("H", "V"), "diagonal": ("+", "-")}


@dataclass(frozen=True)
class DetectorModel:
    kind: str = "pnr"
    efficiency: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("pnr", "bucket"):
            raise ValueError(f"detector kind must be 'pnr' or 'bucket', got {self.kind!r}")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"efficiency must lie in [0, 1], got {self.efficiency}")

    def accepts(self, required: int, observed: int) -> bool:
        if self.kind == "pnr" or required == 0:
            return observed == required
        return observed >= 1


IDEAL = DetectorModel()


@dataclass(frozen=True)
class Requirement:
    """Required photon counts ``(first, second)`` at one port in one basis.

    For bucket detectors a non-zero requirement means "at least one".
    """

    port: str
    basis: str = "computational"
    counts: tuple[int, int] = (1, 0)

    def __post_init__(self) -> None:
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        if len(self.counts) != 2 or min(self.counts) < 0:
            raise ValueError(f"counts must be two non-negative integers, got {self.counts}")
        object.__setattr__(self, "port", str(self.port))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    def flipped(self) -> Requirement:
        return Requirement(self.port, self.basis, self.counts[::-1])

    @property
    def label(self) -> str:
        first, second = LABELS[self.basis]
        a, b = self.counts
        if (a, b) == (1, 0):
            return first
        if (a, b) == (0, 1):
            return second
        return f"{first}{a}{second}{b}"


def single(port: str, basis: str = "computational", outcome: str | None = None) -> Requirement:
    """One photon at ``port`` with the given outcome label (first basis state by default)."""
    first, second = LABELS[basis]
    if outcome in (None, first):
        return Requirement(port, basis, (1, 0))
    if outcome == second:
        return Requirement(port, basis, (0, 1))
    raise ValueError(f"outcome {outcome!r} is not in the {basis} basis")


@dataclass(frozen=True)
class DetectionPattern:
    requirements: tuple[Requirement, ...]

    def __post_init__(self) -> None:
        reqs = tuple(self.requirements)
        object.__setattr__(self, "requirements", reqs)
        ports = [r.port for r in reqs]
        if len(set(ports)) != len(ports):
            raise ValueError("detection pattern ports must be distinct")

    def __iter__(self):
        return iter(self.requirements)

    def __len__(self) -> int:
        return len(self.requirements)

    @property
    def ports(self) -> tuple[str, ...]:
        return tuple(r.port for r in self.requirements)

    def __add__(self, other: DetectionPattern) -> DetectionPattern:
        return DetectionPattern(self.requirements + other.requirements)


def pattern(*requirements: Requirement) -> DetectionPattern:
    return DetectionPattern(requirements)


@dataclass
class Measurement:
    """Outcome of conditioning on a detection pattern.

    ``branches`` is an ensemble of ``(weight, normalized state)`` with weights
    summing to one; it holds a single pure state for ideal PNR detection of
    single-bin light.
    """

    probability: float
    branches: list[tuple[float, FockState]] = field(default_factory=list)

    @property
    def state(self) -> FockState:
        if len(self.branches) != 1:
            raise InvalidStateError(f"conditioned output is a mixture of {len(self.branches)} branches")
        return self.branches[0][1]


def _prepare(state: FockState, reqs: Sequence[Requirement]) -> tuple[FockState, list[int], list[tuple[int, int]]]:
    """Rotate diagonal-basis ports and list the measured channels.

    Each measured channel gets a slot ``(requirement index, 0 for H / 1 for V)``.
    """
    ports = set(state.registry.ports)
    for r in reqs:
        if r.port not in ports:
            raise InvalidStateError(f"port {r.port!r} is not available for detection")
    for r in reqs:
        if r.basis == "diagonal":
            state = apply_transform(state, hadamard(r.port))
    measured: list[int] = []
    slots: list[tuple[int, int]] = []
    for k, r in enumerate(reqs):
        for i in state.registry.port_indices(r.port):
            measured.append(i)
            slots.append((k, 0 if state.registry.channels[i].pol == "H" else 1))
    return state, measured, slots


def _tally(key: Sequence[int], slots: list[tuple[int, int]], n: int) -> list[list[int]]:
    counts = [[0, 0] for _ in range(n)]
    for value, (k, pol) in zip(key, slots):
        counts[k][pol] += value
    return counts


def _lossy_split(
    state: FockState, measured: Sequence[int], efficiency: float, accept: Callable[[tuple[int, ...]], bool]
) -> dict:
    """Split with every measured channel seen through a beamsplitter of transmissivity ``efficiency``.

    This is the loss-channel model with the loss modes traced out: a channel
    holding ``n`` photons shows ``m`` of them with amplitude
    ``sqrt(C(n, m) eta^m (1 - eta)^(n - m))``. Groups are keyed by the
    detected and lost counts; the reflection phase ``i^lost`` is constant
    within a group and dropped.
    """
    measured = list(measured)
    gone = set(measured)
    keep = [i for i in range(len(state.registry)) if i not in gone]
    registry = state.registry.without(measured)
    weight = {}
    groups: dict[tuple, dict] = defaultdict(lambda: defaultdict(complex))
    for occ, amp in state.amplitudes.items():
        ns = [occ[i] for i in measured]
        rest = tuple(occ[i] for i in keep)
        for ms in itertools.product(*(range(n + 1) for n in ns)):
            if not accept(ms):
                continue
            w = 1.0
            for n, m in zip(ns, ms):
                if (n, m) not in weight:
                    weight[n, m] = math.sqrt(math.comb(n, m) * efficiency**m * (1 - efficiency) ** (n - m))
                w *= weight[n, m]
            lost = tuple(n - m for n, m in zip(ns, ms))
            groups[ms, lost][rest] += amp * w
    total = state.norm_sq
    out = {}
    for key in sorted(groups):
        branch = FockState._trusted(registry, groups[key], state.max_photons)
        if branch.norm_sq > 0:
            out[key] = (branch.norm_sq / total, branch.normalized())
    return out


def _detect(state: FockState, measured: Sequence[int], model: DetectorModel, accept) -> dict:
    """Accepted measurement groups; keys start with the detected counts."""
    if model.efficiency < 1.0:
        return _lossy_split(state, measured, model.efficiency, accept)
    return {(key, ()): value for key, value in split(state, measured, accept).items()}


def _satisfies(model: DetectorModel, req: Requirement, observed: Sequence[int]) -> bool:
    return all(model.accepts(want, got) for want, got in zip(req.counts, observed))


def _ensemble(groups: Mapping, keys: Iterable) -> tuple[float, list[tuple[float, FockState]]]:
    chosen = [groups[k] for k in keys]
    prob = sum(p for p, _ in chosen)
    if prob == 0:
        return 0.0, []
    return prob, [(p / prob, s) for p, s in chosen]


def measure(state: FockState, detection: DetectionPattern, model: DetectorModel = IDEAL) -> Measurement:
    """Condition ``state`` on ``detection``; detected ports are consumed."""
    reqs = list(detection)
    prepared, measured, slots = _prepare(state, reqs)

    @functools.cache
    def accept(key: tuple[int, ...]) -> bool:
        counts = _tally(key, slots, len(reqs))
        return all(_satisfies(model, r, c) for r, c in zip(reqs, counts))

    groups = _detect(prepared, measured, model, accept)
    prob, branches = _ensemble(groups, groups)
    return Measurement(prob, branches)


@dataclass
class HeraldBranch:
    outcome: dict[str, str]
    probability: float
    branches: list[tuple[float, FockState]]
    correction: dict[str, str]

    def corrected(self) -> list[tuple[float, FockState]]:
        """Ensemble with the feed-forward Pauli corrections applied."""
        out = []
        for w, s in self.branches:
            for port, ops in self.correction.items():
                for op in ops:
                    s = apply_transform(s, pauli(port, op))
            out.append((w, s))
        return out


def _correction(
    flipped: Iterable[str], frame: Mapping[str, tuple[str, str]], base: Mapping[str, str]
) -> dict[str, str]:
    toggles: dict[str, dict[str, int]] = {}
    moves = [(target, op) for target, ops in base.items() for op in ops]
    moves += [frame[port] for port in flipped if port in frame]
    for target, op in moves:
        t = toggles.setdefault(target, {"X": 0, "Z": 0})
        t[op] ^= 1
    out = {}
    for target in sorted(toggles):
        ops = "".join(op for op in ("X", "Z") if toggles[target][op])
        if ops:
            out[target] = ops
    return out


def herald_accept(
    state: FockState,
    gate_pattern: DetectionPattern,
    output_pattern: DetectionPattern,
    mode: str = "strict",
    model: DetectorModel = IDEAL,
    frame: Mapping[str, tuple[str, str]] | None = None,
    base_correction: Mapping[str, str] | None = None,
) -> list[HeraldBranch]:
    """Enumerate accepted herald branches.

    ``strict`` keeps only the reference outcome given by the two patterns.
    ``pauli_frame`` keeps every combination of reference and flipped
    single-photon outcomes; ``frame`` maps a detector port to the
    ``(surviving port, Pauli)`` correction toggled when that detector reports
    its flipped outcome. ``base_correction`` is applied on every branch. X is
    applied before Z when both act on one port.
    """
    if mode not in ("strict", "pauli_frame"):
        raise ValueError(f"unknown herald mode {mode!r}")
    frame = dict(frame or {})
    reqs = list(gate_pattern + output_pattern)
    prepared, measured, slots = _prepare(state, reqs)
    flips = [r.flipped() for r in reqs]

    @functools.cache
    def classify(key: tuple[int, ...]) -> tuple[int, ...] | None:
        counts = _tally(key, slots, len(reqs))
        bits = []
        for r, f, c in zip(reqs, flips, counts):
            if _satisfies(model, r, c):
                bits.append(0)
            elif mode == "pauli_frame" and _satisfies(model, f, c):
                bits.append(1)
            else:
                return None
        return tuple(bits)

    groups = _detect(prepared, measured, model, lambda key: classify(key) is not None)
    by_outcome: dict[tuple[int, ...], list] = {}
    for key in groups:
        by_outcome.setdefault(classify(key[0]), []).append(key)

    outcomes = [(0,) * len(reqs)] if mode == "strict" else list(itertools.product((0, 1), repeat=len(reqs)))
    result = []
    for bits in outcomes:
        prob, branches = _ensemble(groups, by_outcome.get(bits, []))
        flipped = [r.port for r, b in zip(reqs, bits) if b]
        correction = _correction(flipped, frame, base_correction or {})
        labels = {r.port: (r.flipped() if b else r).label for r, b in zip(reqs, bits)}
        result.append(HeraldBranch(labels, prob, branches, correction))
    return result
