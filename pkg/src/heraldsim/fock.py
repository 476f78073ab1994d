"""Sparse multi-mode bosonic Fock states over polarization-resolved channels.

A channel is a (port, polarization, temporal bin) triple. A :class:`FockState`
maps occupation vectors over an ordered :class:`ChannelRegistry` to complex
amplitudes; only non-negligible amplitudes are stored.

Optical elements act on creation operators through a :class:`ModeTransform`,
``a_i^dagger -> sum_j U[j, i] b_j^dagger``, and are applied to a state by
substituting and re-expanding every basis term (:func:`apply_transform`).
"""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

PRUNE = 1e-15
DEFAULT_MAX_PHOTONS = 12
POLARIZATIONS = ("H", "V")


class CapacityError(RuntimeError):
    """Raised when a state would exceed the configured photon bound."""


class InvalidStateError(RuntimeError):
    """Raised when an operation's state precondition is not met."""


class Channel(NamedTuple):
    port: str
    pol: str
    bin: int = 0


@dataclass(frozen=True)
class ChannelRegistry:
    channels: tuple[Channel, ...]

    def __post_init__(self) -> None:
        chans = tuple(Channel(*c) for c in self.channels)
        object.__setattr__(self, "channels", chans)
        if len(set(chans)) != len(chans):
            raise ValueError("channel labels must be unique")
        for c in chans:
            if c.pol not in POLARIZATIONS:
                raise ValueError(f"unknown polarization {c.pol!r}")
            if c.bin < 0:
                raise ValueError("temporal bin must be non-negative")

    @classmethod
    def from_ports(cls, ports: Iterable[str], bins: int = 1) -> ChannelRegistry:
        """Registry with H and V channels for every port and every bin in ``range(bins)``."""
        return cls(tuple(Channel(str(p), pol, b) for p in ports for b in range(bins) for pol in POLARIZATIONS))

    @cached_property
    def index(self) -> dict[Channel, int]:
        return {c: i for i, c in enumerate(self.channels)}

    @cached_property
    def ports(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(c.port for c in self.channels))

    @cached_property
    def bins(self) -> tuple[int, ...]:
        return tuple(sorted({c.bin for c in self.channels}))

    def __len__(self) -> int:
        return len(self.channels)

    def __contains__(self, channel: object) -> bool:
        return channel in self.index

    def locate(self, channel: Channel | tuple) -> int:
        try:
            return self.index[Channel(*channel)]
        except (KeyError, TypeError):
            raise ValueError(f"unknown channel {channel!r}") from None

    def port_indices(self, port: str) -> list[int]:
        return [i for i, c in enumerate(self.channels) if c.port == port]

    def without(self, indices: Iterable[int]) -> ChannelRegistry:
        drop = set(indices)
        return ChannelRegistry(tuple(c for i, c in enumerate(self.channels) if i not in drop))


@dataclass(frozen=True)
class ModeTransform:
    """Unitary acting on creation operators of (port, polarization) modes.

    ``matrix[j, i]`` is the amplitude for input mode ``i`` to leave in mode
    ``j``. The transform is bin-blind: it is applied identically to every
    temporal bin present in a state.
    """

    modes: tuple[tuple[str, str], ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        modes = tuple((str(p), pol) for p, pol in self.modes)
        object.__setattr__(self, "modes", modes)
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if len(set(modes)) != len(modes):
            raise ValueError("transform modes must be distinct")
        if m.shape != (len(modes), len(modes)):
            raise ValueError("matrix shape does not match the mode list")
        if not np.allclose(m @ m.conj().T, np.eye(len(modes)), rtol=0, atol=1e-12):
            raise ValueError("transform matrix is not unitary")

    @property
    def ports(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(p for p, _ in self.modes))


def embed(t: ModeTransform, modes: Sequence[tuple[str, str]]) -> ModeTransform:
    """Extend ``t`` by identity to the ordered mode list ``modes``."""
    modes = [(str(p), pol) for p, pol in modes]
    pos = {m: i for i, m in enumerate(modes)}
    full = np.eye(len(modes), dtype=complex)
    idx = [pos[m] for m in t.modes]
    full[np.ix_(idx, idx)] = t.matrix
    return ModeTransform(tuple(modes), full)


def compose(*transforms: ModeTransform) -> ModeTransform:
    """Single transform equal to applying ``transforms`` left to right."""
    modes = list(dict.fromkeys(m for t in transforms for m in t.modes))
    total = np.eye(len(modes), dtype=complex)
    for t in transforms:
        total = embed(t, modes).matrix @ total
    return ModeTransform(tuple(modes), total)


def _factorial_weight(occ: Sequence[int]) -> float:
    return math.prod(math.factorial(n) for n in occ)


@dataclass(frozen=True)
class FockState:
    registry: ChannelRegistry
    amplitudes: Mapping[tuple[int, ...], complex]
    max_photons: int = DEFAULT_MAX_PHOTONS

    def __post_init__(self) -> None:
        n = len(self.registry)
        clean: dict[tuple[int, ...], complex] = {}
        for occ, amp in self.amplitudes.items():
            occ = tuple(int(x) for x in occ)
            if len(occ) != n:
                raise ValueError("occupation length does not match registry")
            if min(occ, default=0) < 0:
                raise ValueError("occupations must be non-negative")
            if sum(occ) > self.max_photons:
                raise CapacityError(f"{sum(occ)} photons exceeds the bound of {self.max_photons}")
            if abs(amp) >= PRUNE:
                clean[occ] = complex(amp)
        object.__setattr__(self, "amplitudes", clean)

    @cached_property
    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm_sq - 1.0) <= 1e-12

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __getitem__(self, occ: tuple[int, ...]) -> complex:
        return self.amplitudes.get(tuple(occ), 0j)

    def __add__(self, other: FockState) -> FockState:
        _same_registry(self, other)
        out = defaultdict(complex, self.amplitudes)
        for occ, amp in other.amplitudes.items():
            out[occ] += amp
        return self._replace(out)

    def __mul__(self, scalar: complex) -> FockState:
        return self._replace({o: a * scalar for o, a in self.amplitudes.items()})

    __rmul__ = __mul__

    @classmethod
    def _trusted(cls, registry: ChannelRegistry, amplitudes: Mapping, max_photons: int) -> FockState:
        # skips validation: callers guarantee well-formed, in-bound occupations
        state = object.__new__(cls)
        object.__setattr__(state, "registry", registry)
        object.__setattr__(state, "amplitudes", {o: complex(a) for o, a in amplitudes.items() if abs(a) >= PRUNE})
        object.__setattr__(state, "max_photons", max_photons)
        return state

    def _replace(self, amplitudes: Mapping[tuple[int, ...], complex], registry: ChannelRegistry | None = None) -> FockState:
        return FockState._trusted(self.registry if registry is None else registry, amplitudes, self.max_photons)

    def normalized(self) -> FockState:
        if self.norm_sq == 0:
            raise InvalidStateError("cannot normalize a zero state")
        return self * (1 / self.norm)

    def photon_numbers(self) -> set[int]:
        return {sum(o) for o in self.amplitudes}

    def port_counts(self, occ: tuple[int, ...], port: str) -> int:
        return sum(occ[i] for i in self.registry.port_indices(port))

    def with_max_photons(self, bound: int) -> FockState:
        return FockState(self.registry, self.amplitudes, bound)

    def extended(self, ports: Iterable[str]) -> FockState:
        """Append vacuum ports, using the same temporal bins as this state."""
        return tensor(self, vacuum(ChannelRegistry.from_ports(ports, bins=max(self.registry.bins) + 1), self.max_photons))

    def discard_vacuum(self, ports: Iterable[str]) -> FockState:
        """Drop ports that carry no photons in any term."""
        idx = [i for p in ports for i in self.registry.port_indices(p)]
        if any(occ[i] for occ in self.amplitudes for i in idx):
            raise InvalidStateError("cannot discard occupied ports")
        keep = [i for i in range(len(self.registry)) if i not in set(idx)]
        return self._replace(
            {tuple(occ[i] for i in keep): a for occ, a in self.amplitudes.items()}, self.registry.without(idx)
        )

    def __repr__(self) -> str:
        return f"FockState({len(self)} terms, norm_sq={self.norm_sq:.6g}, ports={self.registry.ports})"


def _same_registry(a: FockState, b: FockState) -> None:
    if a.registry != b.registry:
        raise ValueError("states live on different registries")


def vacuum(registry: ChannelRegistry, max_photons: int = DEFAULT_MAX_PHOTONS) -> FockState:
    if len(registry) == 0:
        raise ValueError("registry must be non-empty")
    return FockState(registry, {(0,) * len(registry): 1.0}, max_photons)


def create(state: FockState, channel: Channel | tuple) -> FockState:
    i = state.registry.locate(channel)
    out: dict[tuple[int, ...], complex] = defaultdict(complex)
    for occ, amp in state.amplitudes.items():
        new = list(occ)
        new[i] += 1
        if sum(new) > state.max_photons:
            raise CapacityError(f"creating a photon exceeds the bound of {state.max_photons}")
        out[tuple(new)] += amp * math.sqrt(new[i])
    return state._replace(out)


def tensor(a: FockState, b: FockState) -> FockState:
    if set(a.registry.ports) & set(b.registry.ports):
        raise ValueError("tensor factors must use disjoint ports")
    registry = ChannelRegistry(a.registry.channels + b.registry.channels)
    bound = max(a.max_photons, b.max_photons)
    out = {oa + ob: xa * xb for oa, xa in a.amplitudes.items() for ob, xb in b.amplitudes.items()}
    return FockState(registry, out, bound)


def tensor_all(states: Iterable[FockState]) -> FockState:
    states = list(states)
    result = states[0]
    for s in states[1:]:
        result = tensor(result, s)
    return result


def inner(a: FockState, b: FockState) -> complex:
    """``<a|b>``."""
    _same_registry(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for occ in small.amplitudes:
        if occ in large.amplitudes:
            total += a.amplitudes[occ].conjugate() * b.amplitudes[occ]
    return total


def _substitute(matrix: np.ndarray, sub: tuple[int, ...]) -> dict[tuple[int, ...], complex]:
    """Expand prod_i (sum_j U[j,i] b_j^dag)^n_i |0> / sqrt(prod n_i!) into Fock kets."""
    k = len(sub)
    poly: dict[tuple[int, ...], complex] = {(0,) * k: 1.0 + 0j}
    for i, n_i in enumerate(sub):
        column = [(j, matrix[j, i]) for j in range(k) if matrix[j, i] != 0]
        for _ in range(n_i):
            nxt: dict[tuple[int, ...], complex] = defaultdict(complex)
            for mono, c in poly.items():
                for j, u in column:
                    m = list(mono)
                    m[j] += 1
                    nxt[tuple(m)] += c * u
            poly = nxt
    scale = _factorial_weight(sub)
    return {m: c * math.sqrt(_factorial_weight(m) / scale) for m, c in poly.items() if c != 0}


def apply_transform(state: FockState, t: ModeTransform) -> FockState:
    if not np.allclose(t.matrix @ t.matrix.conj().T, np.eye(len(t.modes)), rtol=0, atol=1e-12):
        raise ValueError("transform matrix is not unitary")
    reg = state.registry
    amplitudes = dict(state.amplitudes)
    for b in reg.bins:
        chans = [Channel(p, pol, b) for p, pol in t.modes]
        present = [c in reg for c in chans]
        if not any(present):
            continue
        if not all(present):
            missing = [c for c, ok in zip(chans, present) if not ok]
            raise ValueError(f"transform channels missing from registry: {missing}")
        idx = [reg.index[c] for c in chans]
        cache: dict[tuple[int, ...], dict[tuple[int, ...], complex]] = {}
        out: dict[tuple[int, ...], complex] = defaultdict(complex)
        for occ, amp in amplitudes.items():
            sub = tuple(occ[i] for i in idx)
            if not any(sub):
                out[occ] += amp
                continue
            if sub not in cache:
                cache[sub] = _substitute(t.matrix, sub)
            base = list(occ)
            for new_sub, c in cache[sub].items():
                for i, n in zip(idx, new_sub):
                    base[i] = n
                out[tuple(base)] += amp * c
        amplitudes = out
    return state._replace(amplitudes)


def apply_all(state: FockState, transforms: Iterable[ModeTransform]) -> FockState:
    for t in transforms:
        state = apply_transform(state, t)
    return state


def split(
    state: FockState, measured: Sequence[int], accept: Callable[[tuple[int, ...]], bool] | None = None
) -> dict[tuple[int, ...], tuple[float, FockState]]:
    """Partition ``state`` by the occupations of the ``measured`` channel indices.

    Returns one entry per accepted measured occupation pattern, mapping it to
    ``(probability, normalized remainder)``. Distinct patterns are mutually
    incoherent since the measured modes are destroyed; the remainder lives on
    the registry with the measured channels removed.
    """
    measured = list(measured)
    gone = set(measured)
    keep = [i for i in range(len(state.registry)) if i not in gone]
    registry = state.registry.without(measured)
    total = state.norm_sq
    groups: dict[tuple[int, ...], dict[tuple[int, ...], complex]] = defaultdict(dict)
    for occ, amp in state.amplitudes.items():
        key = tuple(occ[i] for i in measured)
        if accept is not None and not accept(key):
            continue
        groups[key][tuple(occ[i] for i in keep)] = amp
    out = {}
    for key in sorted(groups):
        branch = FockState._trusted(registry, groups[key], state.max_photons)
        if branch.norm_sq > 0:
            out[key] = (branch.norm_sq / total, branch.normalized())
    return out


def project_counts(state: FockState, assignments: Sequence[tuple[Channel | tuple, int]]) -> tuple[float, FockState]:
    """Project onto exact photon counts on individual channels.

    The measured channels are removed from the conditioned state. A zero
    probability yields an empty state on the reduced registry.
    """
    idx = [state.registry.locate(c) for c, _ in assignments]
    want = tuple(int(n) for _, n in assignments)
    groups = split(state, idx, lambda key: key == want)
    if not groups:
        return 0.0, FockState(state.registry.without(idx), {}, state.max_photons)
    return groups[want]


# Two-qubit polarization states ------------------------------------------------

BELL = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2),
    "phi-": np.array([1, 0, 0, -1], dtype=complex) / math.sqrt(2),
    "psi+": np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2),
    "psi-": np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2),
}

_POL_BIT = {"H": 0, "V": 1}


def check_two_qubit_dm(dm: np.ndarray, normalized: bool = True) -> np.ndarray:
    dm = np.asarray(dm, dtype=complex)
    if dm.shape != (4, 4):
        raise ValueError("two-qubit density matrix must be 4x4")
    if not np.allclose(dm, dm.conj().T, rtol=0, atol=1e-12):
        raise ValueError("density matrix is not Hermitian")
    if normalized and abs(np.trace(dm) - 1) > 1e-12:
        raise ValueError("density matrix trace is not 1")
    if np.linalg.eigvalsh(dm).min() < -1e-10:
        raise ValueError("density matrix is not positive semidefinite")
    return dm


def pure_dm(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def qubit_amplitudes(state: FockState, ports: Sequence[str]) -> tuple[float, np.ndarray]:
    """Pure-state amplitudes on the one-photon-per-port subspace of ``ports``.

    Returns ``(qubit_weight, amplitudes)`` with amplitudes normalized, indexed
    by the big-endian bit string of polarizations (H=0, V=1). Every registry
    port must be listed and temporal bins must not be occupied beyond bin 0.
    """
    reg = state.registry
    if set(reg.ports) != set(ports):
        raise InvalidStateError(f"unmeasured ports remain: {sorted(set(reg.ports) - set(ports))}")
    n = len(ports)
    vec = np.zeros(2**n, dtype=complex)
    inside = 0.0
    for occ, amp in state.amplitudes.items():
        bits = []
        for p in ports:
            hits = [(reg.channels[i], occ[i]) for i in reg.port_indices(p) if occ[i]]
            if len(hits) != 1 or hits[0][1] != 1:
                break
            chan = hits[0][0]
            if chan.bin != 0:
                raise InvalidStateError("qubit amplitudes require a single temporal bin; use reduce_two_qubit")
            bits.append(_POL_BIT[chan.pol])
        else:
            vec[int("".join(map(str, bits)), 2)] += amp
            inside += abs(amp) ** 2
    if inside == 0:
        return 0.0, vec
    return inside / state.norm_sq, vec / math.sqrt(inside)


def reduce_two_qubit(state: FockState, port_a: str, port_b: str) -> tuple[float, np.ndarray]:
    """Two-qubit polarization density matrix of the one-photon-per-port component.

    Temporal bin labels are traced out. Components outside the subspace are
    excluded from the matrix and reported through the returned qubit weight.
    """
    reg = state.registry
    extra = set(reg.ports) - {port_a, port_b}
    if extra:
        raise InvalidStateError(f"unmeasured ports remain: {sorted(extra)}")
    ia, ib = reg.port_indices(port_a), reg.port_indices(port_b)
    by_bins: dict[tuple[int, int], np.ndarray] = defaultdict(lambda: np.zeros(4, dtype=complex))
    inside = 0.0
    for occ, amp in state.amplitudes.items():
        ha = [i for i in ia if occ[i]]
        hb = [i for i in ib if occ[i]]
        if len(ha) != 1 or len(hb) != 1 or occ[ha[0]] != 1 or occ[hb[0]] != 1:
            continue
        ca, cb = reg.channels[ha[0]], reg.channels[hb[0]]
        by_bins[(ca.bin, cb.bin)][2 * _POL_BIT[ca.pol] + _POL_BIT[cb.pol]] += amp
        inside += abs(amp) ** 2
    dm = np.zeros((4, 4), dtype=complex)
    if inside == 0:
        return 0.0, dm
    for key in sorted(by_bins):
        dm += pure_dm(by_bins[key])
    dm /= inside
    return inside / state.norm_sq, (dm + dm.conj().T) / 2


def fidelity_to_bell(dm: np.ndarray, which: str = "phi+") -> float:
    vec = BELL[which]
    return float(np.real(vec.conj() @ np.asarray(dm) @ vec))


def from_qubits(ports: Sequence[str], amplitudes: Sequence[complex], max_photons: int = DEFAULT_MAX_PHOTONS) -> FockState:
    """Encode polarization qubits (H=0, V=1), one photon per port, big-endian over ``ports``."""
    n = len(ports)
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if amplitudes.shape != (2**n,):
        raise ValueError(f"expected {2**n} amplitudes for {n} qubits")
    registry = ChannelRegistry.from_ports(ports)
    terms = {}
    for idx, amp in enumerate(amplitudes):
        if amp == 0:
            continue
        occ = [0] * (2 * n)
        for q in range(n):
            bit = (idx >> (n - 1 - q)) & 1
            occ[2 * q + bit] = 1
        terms[tuple(occ)] = amp
    return FockState(registry, terms, max_photons)
