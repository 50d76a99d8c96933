"""Acceptance criteria 1-10 at their stated tolerances and time limits.

A pass/fail line per criterion is printed in the terminal summary.
"""
import numpy as np
import pytest

from lindirr import (
    EvansVerdict,
    Verdict,
    adjoint_superoperator,
    analyze,
    build_superoperator,
    channel_from_liouvillian,
    check_davies_algebra,
    check_davies_steady,
    check_evans,
    choi_matrix,
    classical_transition_matrix,
    commutant,
    find_dark_states,
    generate_algebra,
    is_irreducible_markov,
    kraus_from_choi,
    preset,
    spectrum,
    steady_states,
    verify_reducing_projection,
)
from lindirr.irreducibility import check_frigerio2
from lindirr.operator_core import DOWN, UP, dagger, null_space, unvec

from random_systems import ensemble, random_density

UPUP, DNDN = np.kron(UP, UP), np.kron(DOWN, DOWN)


def both_routes(sys):
    a, s = check_davies_algebra(sys), check_davies_steady(sys)
    assert a.verdict == s.verdict, (sys.name, a, s)
    return a, s


# ---------------------------------------------------------------- 1
@pytest.mark.criterion(1)
def test_exact_steady_states(stopwatch):
    with stopwatch(1.0):
        rho = steady_states(preset("lind1101")).max_support_state
        np.testing.assert_allclose(rho, np.array([[2, -1], [-1, 1]]) / 3, atol=1e-9, rtol=0)

        rho = steady_states(preset("lindsphsx", h=1)).max_support_state
        a, b = rho[1, 1], rho[0, 1]
        assert abs(a - 4 / 9) <= 1e-9
        assert abs(b - 2j / 9) <= 1e-9
        assert abs(rho[0, 0] - 5 / 9) <= 1e-9


# ---------------------------------------------------------------- 2
@pytest.mark.criterion(2)
def test_two_level_verdict_table(stopwatch):
    with stopwatch(5.0):
        a, s = both_routes(preset("lind1101"))
        assert a.verdict is Verdict.IRREDUCIBLE

        a, s = both_routes(preset("lind0101-lind0102"))
        assert a.verdict is Verdict.REDUCIBLE
        assert s.null_dim == 1 and s.support_rank == 1
        np.testing.assert_allclose(s.steady.max_support_state, np.outer(UP, UP), atol=1e-9)

        a, s = both_routes(preset("lind1101hsy"))
        assert a.verdict is Verdict.REDUCIBLE and a.algebra_dim == 3

        a, s = both_routes(preset("lind1101-lind1m101"))
        assert a.verdict is Verdict.REDUCIBLE
        np.testing.assert_allclose(s.steady.max_support_state, np.outer(UP, UP), atol=1e-9)

        a, s = both_routes(preset("lindsphsx", h=0))
        assert a.verdict is Verdict.REDUCIBLE
        for h in (0.5, 1.0, 2.0):
            a, s = both_routes(preset("lindsphsx", h=h))
            assert a.verdict is Verdict.IRREDUCIBLE, h


# ---------------------------------------------------------------- 3
@pytest.mark.criterion(3)
def test_ferromagnet_counter_example(stopwatch):
    with stopwatch(2.0):
        sys = preset("ferromagnet2")
        lv = build_superoperator(sys)
        assert np.linalg.norm(lv(np.outer(UPUP, UPUP))) <= 1e-10
        assert np.linalg.norm(lv(np.outer(DNDN, DNDN))) <= 1e-10

        rep = analyze(sys)
        assert rep.null_dim >= 2
        assert rep.evans_verdict is EvansVerdict.IRREDUCIBLE
        ls = list(sys.lindblads)
        assert commutant(ls + [dagger(l) for l in ls]).dim == 1
        assert rep.davies_algebra_verdict is Verdict.REDUCIBLE
        assert rep.davies_steady_verdict is Verdict.REDUCIBLE
        check = verify_reducing_projection(sys, rep.reducing_projection)
        assert check.ok and not check.trivial
        assert check.max_residual <= 1e-8


# ---------------------------------------------------------------- 4
@pytest.mark.criterion(4)
def test_markov_chains(stopwatch):
    with stopwatch(2.0):
        t = 0.5 * np.log(2)
        p = classical_transition_matrix(channel_from_liouvillian(preset("ferromagnet2"), t)).entries
        # computational order: up-up, up-down, down-up, down-down
        expected = np.array([[1, .25, .25, 0],
                             [0, .5, 0, 0],
                             [0, 0, .5, 0],
                             [0, .25, .25, 1]])
        np.testing.assert_allclose(p, expected, atol=1e-9, rtol=0)
        mv = is_irreducible_markov(classical_transition_matrix(
            channel_from_liouvillian(preset("ferromagnet2"), t)))
        assert not mv.irreducible
        assert mv.closed_classes == ((0,), (3,))

        sys = preset("sp-driven")
        for t in (0.3, 1.0, 2.5):
            ch = channel_from_liouvillian(sys, t)
            comp = classical_transition_matrix(ch)
            np.testing.assert_allclose(comp.entries, [[1, 1 - np.exp(-t)], [0, np.exp(-t)]],
                                       atol=1e-9, rtol=0)
            assert not is_irreducible_markov(comp).irreducible
            rot = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
            pr = classical_transition_matrix(ch, rot).entries
            hi, lo = (1 + np.exp(-t / 2)) / 2, (1 - np.exp(-t / 2)) / 2
            np.testing.assert_allclose(pr, [[hi, lo], [lo, hi]], atol=1e-9, rtol=0)
            assert is_irreducible_markov(classical_transition_matrix(ch, rot)).irreducible


# ---------------------------------------------------------------- 5
@pytest.mark.criterion(5)
def test_loss_gain_spectrum(stopwatch):
    with stopwatch(1.0):
        sys = preset("loss_gain", gp=1, gm=1)
        ev = spectrum(sys).eigenvalues
        np.testing.assert_allclose(np.sort(ev.real), [-2, -1, -1, 0], atol=1e-9)
        assert np.max(np.abs(ev.imag)) <= 1e-9
        # population block [[-gm, gp], [gm, -gp]] and coherences decaying at (gp+gm)/2
        m = build_superoperator(sys).matrix
        pop = m[np.ix_([0, 3], [0, 3])]
        np.testing.assert_allclose(pop, [[-1, 1], [1, -1]], atol=1e-12)
        np.testing.assert_allclose(np.diag(m)[[1, 2]], [-1, -1], atol=1e-12)

        rep = analyze(sys)
        assert check_frigerio2(sys).value == "ImpliesIrreducible"
        assert rep.frigerio2_applicable and rep.frigerio2_conclusion
        assert rep.verdict is Verdict.IRREDUCIBLE
        assert rep.support_rank == 2


# ---------------------------------------------------------------- 6
CHAINS = [("ising-boundary", 3), ("xx-max", 3), ("ising-boundary", 4), ("xx-max", 4)]


@pytest.mark.criterion(6)
@pytest.mark.parametrize("name,n", CHAINS, ids=[f"{a}-N{b}" for a, b in CHAINS])
def test_spin_chain_irreducible(name, n, stopwatch):
    with stopwatch(60.0):
        sys = preset(name, n=n)
        if name == "xx-max":
            assert sys.lindblads and np.isclose(sys.hamiltonian[0, 0].real, 0.5 * n)
        a, s = both_routes(sys)
        assert a.algebra_dim == 4 ** n
        assert s.null_dim == 1 and s.support_rank == 2 ** n


# ---------------------------------------------------------------- 7
def _invariance_residual(sys, p, rng, samples=3):
    ch = channel_from_liouvillian(sys, 1.0)
    worst = 0.0
    for _ in range(samples):
        x = p @ random_density(rng, sys.dim) @ p
        y = ch(x)
        worst = max(worst, np.linalg.norm(y - p @ y @ p))
    return worst


@pytest.mark.criterion(7)
def test_cross_oracle_suite(stopwatch):
    rng = np.random.default_rng(77)
    counts = {"Irreducible": 0, "Reducible": 0}
    with stopwatch(180.0):
        for family, sys in ensemble(seed=2024, count=500):
            a, s = both_routes(sys)
            rep = analyze(sys)
            counts[rep.verdict.value] += 1
            if family == "generic":
                assert rep.verdict is Verdict.IRREDUCIBLE
            else:
                assert rep.verdict is Verdict.REDUCIBLE
            if rep.verdict is Verdict.REDUCIBLE:
                p = rep.reducing_projection
                check = verify_reducing_projection(sys, p)
                assert check.ok and not check.trivial
                assert check.max_residual <= 1e-8
                assert _invariance_residual(sys, p, rng) <= 1e-7
    assert counts["Irreducible"] > 0 and counts["Reducible"] > 0


# ---------------------------------------------------------------- 8
@pytest.mark.criterion(8)
def test_kraus_round_trip(stopwatch):
    with stopwatch(60.0):
        for _, sys in ensemble(seed=31337, count=100):
            ch = channel_from_liouvillian(sys, 1.0)
            ks = kraus_from_choi(choi_matrix(ch))
            assert np.linalg.norm(ks.superoperator() - ch.matrix) <= 1e-9
            assert ks.completeness_residual() <= 1e-10


# ---------------------------------------------------------------- 9
def _spectral_projections(x, gap=1e-6):
    w, v = np.linalg.eigh((x + dagger(x)) / 2)
    out, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > gap:
            out.append(v[:, start:i] @ dagger(v[:, start:i]))
            start = i
    return out


def _commutes_with_all(p, ops, tol):
    return all(np.linalg.norm(p @ a - a @ p) <= tol * max(1.0, np.linalg.norm(a)) for a in ops)


@pytest.mark.criterion(9)
def test_evans_dephasing_witness(stopwatch):
    with stopwatch(5.0):
        sys = preset("dephase")
        ev = check_evans(sys)
        assert ev.verdict is EvansVerdict.REDUCIBLE
        p = ev.conserved_projection
        assert np.linalg.norm(adjoint_superoperator(sys)(p)) <= 1e-9
        seeds = [sys.hamiltonian] + [op for l in sys.lindblads for op in (l, dagger(l))]
        for a in seeds:
            assert np.linalg.norm(p @ a - a @ p) <= 1e-10


@pytest.mark.criterion(9)
def test_evans_both_directions_random(stopwatch):
    rng = np.random.default_rng(9)
    seen_conserved = 0
    with stopwatch(120.0):
        for _, sys in ensemble(seed=4242, count=200, weights=(0.3, 0.3, 0.4)):
            d = sys.dim
            lstar = adjoint_superoperator(sys)
            seeds = [sys.hamiltonian] + [op for l in sys.lindblads for op in (l, dagger(l))]
            com = commutant(seeds)
            # 'if': every projection in the commutant is conserved
            for _ in range(2):
                coeffs = rng.standard_normal(com.dim) + 1j * rng.standard_normal(com.dim)
                x = np.tensordot(coeffs, com.basis.basis, axes=1)
                for p in _spectral_projections(x):
                    assert np.linalg.norm(lstar(p)) <= 1e-9
            # 'only if': conserved projections from the kernel of the adjoint lie in the commutant
            ker = null_space(lstar.matrix, 1e-9)
            for _ in range(2):
                coeffs = rng.standard_normal(ker.shape[1]) + 1j * rng.standard_normal(ker.shape[1])
                x = unvec(ker @ coeffs, d)
                for p in _spectral_projections(x):
                    if np.linalg.norm(lstar(p)) <= 1e-9:
                        if not np.allclose(p, np.eye(d)):
                            seen_conserved += 1
                        assert _commutes_with_all(p, seeds, 1e-10)
    assert seen_conserved > 0


# ---------------------------------------------------------------- 10
@pytest.mark.criterion(10)
def test_dark_states(stopwatch):
    with stopwatch(1.0):
        found = find_dark_states(preset("lind1101hsy"))
        assert len(found) == 1
        assert abs(abs(np.vdot(UP, found[0].state)) - 1) <= 1e-9
        assert found[0].liouvillian_residual <= 1e-9

        found = find_dark_states(preset("ferromagnet2"))
        assert len(found) == 2
        overlaps = sorted((abs(np.vdot(UPUP, r.state)), abs(np.vdot(DNDN, r.state))) for r in found)
        np.testing.assert_allclose(overlaps, [(0, 1), (1, 0)], atol=1e-9)
        assert all(r.liouvillian_residual <= 1e-9 for r in found)

        assert find_dark_states(preset("loss_gain")) == []
