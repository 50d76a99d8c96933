import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lindirr import LindbladSystem, preset
from lindirr.channel_markov import (
    ChannelAuditError,
    QuantumChannel,
    StochasticMatrix,
    adapted_basis,
    basis_probe,
    channel_from_liouvillian,
    choi_matrix,
    classical_transition_matrix,
    export_dot,
    haar_unitary,
    is_irreducible_markov,
    kraus_from_choi,
    kraus_to_superoperator,
)
from lindirr.operator_core import P_UP, SX, dagger

from random_systems import generic_system, random_density

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_channels_are_cptp_and_form_a_semigroup(seed, d, n_l):
    rng = np.random.default_rng(seed)
    sys = generic_system(rng, d, n_l)
    a, b = channel_from_liouvillian(sys, 0.3), channel_from_liouvillian(sys, 0.5)
    ab = a.compose(b)
    np.testing.assert_allclose(ab.matrix, channel_from_liouvillian(sys, 0.8).matrix, atol=1e-9)
    assert np.isclose(ab.time_tag, 0.8)
    rho = random_density(rng, d)
    out = a(rho)
    assert np.isclose(np.trace(out), 1)
    assert np.linalg.eigvalsh((out + dagger(out)) / 2)[0] >= -1e-12
    np.testing.assert_allclose(a.adjoint(np.eye(d)), np.eye(d), atol=1e-10)
    assert np.linalg.eigvalsh(choi_matrix(a))[0] >= -1e-10


def test_choi_of_identity_channel_is_unnormalized_bell_projector():
    ch = QuantumChannel(2, np.eye(4))
    omega = np.zeros(4)
    omega[[0, 3]] = 1
    np.testing.assert_allclose(choi_matrix(ch), np.outer(omega, omega))


def test_choi_output_factor_first():
    # the reset channel rho -> |up><up| Tr(rho) has Choi = |up><up| (output) x 1 (input)
    reset = kraus_to_superoperator([np.array([[1, 0], [0, 0]]), np.array([[0, 1], [0, 0]])])
    np.testing.assert_allclose(choi_matrix(QuantumChannel(2, reset)), np.kron(P_UP, np.eye(2)), atol=1e-14)


def test_audit_rejects_non_channels():
    with pytest.raises(ValueError):
        channel_from_liouvillian(preset("lind1101"), 0.0)
    with pytest.raises(ChannelAuditError):
        kraus_from_choi(np.diag([1.0, -0.5, 0.2, 0.3]))
    with pytest.raises(ValueError):
        kraus_from_choi(np.eye(3))


def test_kraus_round_trip_and_minimal_count():
    ch = channel_from_liouvillian(preset("sp-driven"), 1.0)
    ks = kraus_from_choi(choi_matrix(ch))
    assert len(ks) == 2  # amplitude damping has Kraus rank 2
    np.testing.assert_allclose(ks.superoperator(), ch.matrix, atol=1e-12)
    assert ks.completeness_residual() <= 1e-12


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 6))
def test_haar_unitary(seed, d):
    u = haar_unitary(d, np.random.default_rng(seed))
    np.testing.assert_allclose(dagger(u) @ u, np.eye(d), atol=1e-12)
    np.testing.assert_array_equal(u, haar_unitary(d, np.random.default_rng(seed)))


def test_haar_phases_are_uniform():
    # with the phase fix, tr U averages to zero; without it QR is biased
    rng = np.random.default_rng(0)
    mean = np.mean([np.trace(haar_unitary(3, rng)) for _ in range(4000)])
    assert abs(mean) < 0.06


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(2, 4))
def test_transition_matrix_is_column_stochastic(seed, d):
    rng = np.random.default_rng(seed)
    ch = channel_from_liouvillian(generic_system(rng, d, 2), 1.0)
    p = classical_transition_matrix(ch, haar_unitary(d, rng)).entries
    assert p.min() >= 0
    np.testing.assert_allclose(p.sum(axis=0), 1, atol=1e-10)


def test_transition_matrix_rejects_non_unitary_basis():
    ch = channel_from_liouvillian(preset("loss-gain"), 1.0)
    with pytest.raises(ValueError):
        classical_transition_matrix(ch, 2 * np.eye(2))


def reachable(adj, i):
    seen, stack = {i}, [i]
    while stack:
        j = stack.pop()
        for k in np.flatnonzero(adj[j]):
            if k not in seen:
                seen.add(int(k))
                stack.append(int(k))
    return seen


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 7), st.floats(0.0, 0.9))
def test_strong_connectivity_matches_reachability_oracle(seed, n, sparsity):
    rng = np.random.default_rng(seed)
    w = rng.random((n, n)) * (rng.random((n, n)) > sparsity)
    w[:, w.sum(axis=0) == 0] = np.eye(n)[:, w.sum(axis=0) == 0]
    p = StochasticMatrix(w / w.sum(axis=0))
    mv = is_irreducible_markov(p)
    adj = p.entries.T > 1e-10
    reach = [reachable(adj, i) for i in range(n)]
    assert mv.irreducible == all(len(r) == n for r in reach)
    for comp in mv.components:
        for i in comp:
            assert {j for j in reach[i] if i in reach[j]} == set(comp)
    for comp in mv.closed_classes:
        assert reach[comp[0]] == set(comp)


def test_stochastic_matrix_validation():
    with pytest.raises(ValueError):
        StochasticMatrix(np.ones((2, 3)))
    with pytest.raises(ValueError):
        StochasticMatrix(np.eye(2), ("a",))


def test_adapted_basis_starts_with_projection_range():
    u = adapted_basis(P_UP)
    assert abs(u[0, 0]) == pytest.approx(1)
    np.testing.assert_allclose(dagger(u) @ u, np.eye(2), atol=1e-12)


def test_basis_probe():
    rep = basis_probe(preset("sp-driven"), t=1.0, trials=3, seed=11)
    assert rep.verdict == "reducible" and rep.witness_basis_index == 0
    rep = basis_probe(preset("loss-gain"), trials=4, seed=2)
    assert rep.verdict == "no witness" and rep.witness_basis_index is None
    assert len(rep.outcomes) == 5
    # the probe is one-sided: a reducible system hidden in a rotated frame needs the adapted basis
    u = haar_unitary(2, np.random.default_rng(5))
    hidden = LindbladSystem(np.zeros((2, 2)), (u @ np.array([[0, 1], [0, 0]]) @ dagger(u),))
    p = u @ P_UP @ dagger(u)
    rep = basis_probe(hidden, trials=2, seed=0, reducing_projection=p)
    assert rep.verdict == "reducible" and rep.outcomes[-1] is False
    assert json.loads(rep.to_json())["verdict"] == "reducible"
    assert rep.to_json() == basis_probe(hidden, trials=2, seed=0, reducing_projection=p).to_json()
    with pytest.raises(ValueError):
        basis_probe(hidden, trials=0)


def test_dot_export():
    p = StochasticMatrix(np.array([[0.75, 0.0], [0.25, 1.0]]), ("a", 'q"x'))
    dot = export_dot(p, name="g")
    assert dot.startswith("digraph g {")
    assert '"a" -> "a" [label="0.75"];' in dot
    assert '"a" -> "q\\"x" [label="0.25"];' in dot
    assert '"q\\"x" -> "a"' not in dot
    assert dot.rstrip().endswith("}")
    assert export_dot(StochasticMatrix(np.eye(2))).count("->") == 2


def test_rotated_basis_of_pauli_channel():
    # dephasing in the x basis flips |+> <-> |-> with probability (1 - e^{-2 t})/2
    t = 0.4
    ch = channel_from_liouvillian(preset("dephase"), t)
    xb = np.linalg.eigh(SX)[1]
    p = classical_transition_matrix(ch, xb).entries
    flip = (1 - np.exp(-2 * t)) / 2
    np.testing.assert_allclose(p, [[1 - flip, flip], [flip, 1 - flip]], atol=1e-12)
