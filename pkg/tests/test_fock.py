import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fock_transition, random_state, random_unitary
from heraldsim.elements import beamsplitter, pbs_computational
from heraldsim.fock import (
    BELL,
    CapacityError,
    Channel,
    ChannelRegistry,
    FockState,
    InvalidStateError,
    ModeTransform,
    apply_transform,
    compose,
    create,
    fidelity_to_bell,
    from_qubits,
    inner,
    project_counts,
    pure_dm,
    qubit_amplitudes,
    reduce_two_qubit,
    split,
    tensor,
    vacuum,
)


def reg(*ports, bins=1):
    return ChannelRegistry.from_ports(ports, bins=bins)


def basis(registry, occ, amp=1.0):
    return FockState(registry, {tuple(occ): amp})


class TestRegistry:
    def test_duplicate_channels_rejected(self):
        with pytest.raises(ValueError):
            ChannelRegistry((Channel("a", "H"), Channel("a", "H")))

    def test_unknown_polarization(self):
        with pytest.raises(ValueError):
            ChannelRegistry((Channel("a", "D"),))

    def test_locate_unknown(self):
        with pytest.raises(ValueError):
            reg("a").locate(("b", "H"))

    def test_order(self):
        r = reg("a", "b", bins=2)
        assert r.channels[:4] == (("a", "H", 0), ("a", "V", 0), ("a", "H", 1), ("a", "V", 1))
        assert r.ports == ("a", "b")
        assert r.bins == (0, 1)


class TestVacuumCreate:
    def test_vacuum(self):
        v = vacuum(reg("a"))
        assert v.amplitudes == {(0, 0): 1.0}
        assert v.norm == 1.0

    def test_empty_registry(self):
        with pytest.raises(ValueError):
            vacuum(ChannelRegistry(()))

    def test_vacuum_projection_zero(self):
        prob, cond = project_counts(vacuum(reg("a")), [(("a", "H"), 1)])
        assert prob == 0.0
        assert len(cond) == 0

    def test_create_twice(self):
        v = vacuum(reg("a"))
        one = create(v, ("a", "H"))
        two = create(one, ("a", "H"))
        assert one[(1, 0)] == 1
        assert two[(2, 0)] == pytest.approx(math.sqrt(2), abs=1e-15)

    def test_create_linear(self):
        r = reg("a")
        s = FockState(r, {(0, 0): 0.6, (1, 0): 0.8j})
        out = create(s, ("a", "H"))
        assert out[(1, 0)] == pytest.approx(0.6)
        assert out[(2, 0)] == pytest.approx(math.sqrt(2) * 0.8j)

    def test_create_unknown_channel(self):
        with pytest.raises(ValueError):
            create(vacuum(reg("a")), ("z", "H"))

    def test_create_capacity(self):
        s = FockState(reg("a"), {(2, 0): 1.0}, max_photons=2)
        with pytest.raises(CapacityError):
            create(s, ("a", "V"))

    def test_constructor_capacity(self):
        with pytest.raises(CapacityError):
            FockState(reg("a"), {(3, 0): 1.0}, max_photons=2)

    def test_pruning(self):
        s = FockState(reg("a"), {(0, 0): 1.0, (1, 0): 1e-16})
        assert len(s) == 1

    @pytest.mark.parametrize("c1,c2", [(("a", "H"), ("b", "V")), (("a", "H"), ("a", "V")), (("b", "H"), ("a", "H"))])
    def test_creation_commutes(self, c1, c2, rng):
        s = random_state(reg("a", "b"), rng)
        ab = create(create(s, c1), c2)
        ba = create(create(s, c2), c1)
        assert ab.amplitudes.keys() == ba.amplitudes.keys()
        for k in ab.amplitudes:
            assert ab[k] == pytest.approx(ba[k], abs=1e-14)


class TestTensorInner:
    def test_tensor_vacua(self):
        t = tensor(vacuum(reg("a")), vacuum(reg("b")))
        assert t.registry == reg("a", "b")
        assert t.amplitudes == {(0, 0, 0, 0): 1}

    def test_tensor_bell_pairs(self):
        phi12 = from_qubits(["1", "2"], BELL["phi+"])
        phi34 = from_qubits(["3", "4"], BELL["phi+"])
        t = tensor(phi12, phi34)
        assert len(t) == 4
        assert all(abs(a - 0.5) < 1e-15 for a in t.amplitudes.values())

    def test_tensor_overlap_rejected(self):
        with pytest.raises(ValueError):
            tensor(vacuum(reg("a")), vacuum(reg("a")))

    def test_tensor_norm_multiplies(self, rng):
        for _ in range(10):
            a = random_state(reg("a"), rng)
            b = random_state(reg("b", "c"), rng)
            assert tensor(a, b).norm == pytest.approx(a.norm * b.norm, rel=1e-12)

    def test_inner_self(self, rng):
        s = random_state(reg("a", "b"), rng).normalized()
        assert inner(s, s) == pytest.approx(1.0, abs=1e-12)

    def test_inner_orthogonal(self):
        r = reg("a")
        assert inner(basis(r, (1, 0)), basis(r, (0, 1))) == 0

    def test_inner_conjugates_first(self):
        r = reg("a")
        assert inner(basis(r, (1, 0), 1j), basis(r, (1, 0))) == pytest.approx(-1j)

    def test_inner_phi_plus_uniform(self):
        phi = from_qubits(["1", "2"], BELL["phi+"])
        uniform = from_qubits(["1", "2"], np.full(4, 0.5))
        assert inner(phi, uniform) == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_inner_registry_mismatch(self):
        with pytest.raises(ValueError):
            inner(vacuum(reg("a")), vacuum(reg("b")))


def _all_occupations(n_modes, total):
    for occ in itertools.product(range(total + 1), repeat=n_modes):
        if sum(occ) == total:
            yield occ


class TestApplyTransform:
    def test_identity(self, rng):
        s = random_state(reg("a", "b"), rng)
        ident = ModeTransform((("a", "H"), ("a", "V")), np.eye(2))
        out = apply_transform(s, ident)
        assert out.amplitudes.keys() == s.amplitudes.keys()
        for k in s.amplitudes:
            assert out[k] == pytest.approx(s[k], abs=1e-15)

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            ModeTransform((("a", "H"), ("a", "V")), np.array([[1, 0], [0, 0.5]]))

    def test_hong_ou_mandel(self):
        r = reg("a", "b")
        s = basis(r, (1, 0, 1, 0))
        out = apply_transform(s, beamsplitter("a", "b", 0.5))
        assert abs(out[(1, 0, 1, 0)]) < 1e-15
        assert out[(2, 0, 0, 0)] == pytest.approx(1j / math.sqrt(2), abs=1e-15)
        assert out[(0, 0, 2, 0)] == pytest.approx(1j / math.sqrt(2), abs=1e-15)

    def test_pbs_transmits_h(self):
        r = reg("i1", "i2", "o1", "o2")
        s = basis(r, (1, 0) + (0,) * 6)
        out = apply_transform(s, pbs_computational("i1", "i2", "o1", "o2"))
        assert out[(0, 0, 0, 0, 1, 0, 0, 0)] == pytest.approx(1.0)

    @pytest.mark.parametrize("total", [1, 2, 3])
    def test_matches_permanent_oracle(self, total, rng):
        # Two ports, both polarizations: a random 4x4 unitary over every mode.
        r = reg("a", "b")
        modes = [(c.port, c.pol) for c in r.channels]
        u = random_unitary(4, rng)
        t = ModeTransform(tuple(modes), u)
        for n_in in _all_occupations(4, total):
            out = apply_transform(basis(r, n_in), t)
            for n_out in _all_occupations(4, total):
                assert out[n_out] == pytest.approx(fock_transition(u, n_in, n_out), abs=1e-12)

    def test_transform_on_subset_with_bins(self, rng):
        # Bin-blind: the same matrix acts independently in each bin.
        r = reg("a", "b", bins=2)
        s = random_state(r, rng, max_total=2).normalized()
        bs = beamsplitter("a", "b", 0.3)
        out = apply_transform(apply_transform(s, bs), beamsplitter("a", "b", 0.3))
        direct = apply_transform(s, compose(bs, bs))
        for k in set(out.amplitudes) | set(direct.amplitudes):
            assert out[k] == pytest.approx(direct[k], abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), total=st.integers(1, 4))
    def test_norm_and_number_preserved(self, seed, total):
        rng = np.random.default_rng(seed)
        r = reg("a", "b", "c")
        modes = [(c.port, c.pol) for c in r.channels]
        t = ModeTransform(tuple(modes), random_unitary(6, rng))
        s = random_state(r, rng, terms=5, max_total=total)
        out = apply_transform(s, t)
        assert abs(out.norm - s.norm) <= 1e-10
        assert out.photon_numbers() <= s.photon_numbers()

    def test_sparsity_bound(self, rng):
        r = reg("a", "b", "c")
        modes = [(c.port, c.pol) for c in r.channels]
        t = ModeTransform(tuple(modes), random_unitary(6, rng))
        s = random_state(r, rng, terms=6, max_total=3)
        out = apply_transform(s, t)
        assert len(out) <= sum(math.comb(n + 5, 5) for n in range(4))


class TestProjection:
    def test_bell_marginal(self):
        phi = from_qubits(["1", "2"], BELL["phi+"])
        prob, cond = project_counts(phi, [(("2", "H"), 1), (("2", "V"), 0)])
        assert prob == pytest.approx(0.5)
        assert cond.registry.ports == ("1",)
        assert cond.amplitudes == {(1, 0): pytest.approx(1.0)}

    def test_cnot_output_projection(self):
        amps = np.zeros(16)
        for bits in ("0000", "0011", "1101", "1110"):
            amps[int(bits, 2)] = 0.5
        s = from_qubits(["1", "2", "3", "4"], amps)
        prob, cond = project_counts(s, [(("4", "H"), 1), (("4", "V"), 0)])
        assert prob == pytest.approx(0.5, abs=1e-12)
        _, vec = qubit_amplitudes(cond, ["1", "2", "3"])
        expected = np.zeros(8)
        expected[0] = expected[7] = 1 / math.sqrt(2)
        np.testing.assert_allclose(vec, expected, atol=1e-12)

    def test_completeness(self, rng):
        s = random_state(reg("a", "b"), rng, terms=8, max_total=4).normalized()
        total = sum(project_counts(s, [(("a", "H"), n)])[0] for n in range(13))
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_split_probabilities_sum(self, rng):
        s = random_state(reg("a", "b"), rng, terms=8).normalized()
        parts = split(s, [0, 1])
        assert sum(p for p, _ in parts.values()) == pytest.approx(1.0, abs=1e-12)
        assert all(c.is_normalized for _, c in parts.values())


class TestTwoQubit:
    def test_product(self):
        s = from_qubits(["A", "B"], [0, 1, 0, 0])
        w, dm = reduce_two_qubit(s, "A", "B")
        assert w == 1.0
        np.testing.assert_allclose(dm, pure_dm([0, 1, 0, 0]), atol=1e-15)

    def test_outside_subspace(self):
        s = FockState(reg("A", "B"), {(2, 0, 0, 0): 1.0})
        w, _ = reduce_two_qubit(s, "A", "B")
        assert w == 0.0

    def test_phi_plus(self):
        w, dm = reduce_two_qubit(from_qubits(["A", "B"], BELL["phi+"]), "A", "B")
        assert w == pytest.approx(1.0)
        assert fidelity_to_bell(dm) == pytest.approx(1.0, abs=1e-12)

    def test_partial_weight(self):
        r = reg("A", "B")
        s = FockState(r, {(1, 0, 1, 0): 1.0, (2, 0, 0, 0): 1.0})
        w, dm = reduce_two_qubit(s, "A", "B")
        assert w == pytest.approx(0.5)
        assert np.trace(dm).real == pytest.approx(1.0)

    def test_bins_traced(self):
        # Distinct bins on the same polarization pattern add incoherently.
        r = reg("A", "B", bins=2)
        hh0 = [0] * 8
        hh0[0] = hh0[4] = 1
        vv1 = [0] * 8
        vv1[3] = vv1[7] = 1
        s = FockState(r, {tuple(hh0): 1.0, tuple(vv1): 1.0})
        _, dm = reduce_two_qubit(s, "A", "B")
        np.testing.assert_allclose(dm, np.diag([0.5, 0, 0, 0.5]), atol=1e-15)

    def test_extra_ports(self):
        with pytest.raises(InvalidStateError):
            reduce_two_qubit(from_qubits(["A", "B", "C"], np.eye(8)[0]), "A", "B")

    def test_fidelity_examples(self):
        assert fidelity_to_bell(np.eye(4) / 4, "psi-") == pytest.approx(0.25)
        vec = np.array([1, 0, 0, np.exp(0.3j)]) / math.sqrt(2)
        assert fidelity_to_bell(pure_dm(vec)) == pytest.approx(math.cos(0.15) ** 2, abs=1e-15)
        assert math.cos(0.15) ** 2 == pytest.approx(0.97767, abs=1e-5)
