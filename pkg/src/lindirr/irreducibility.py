"""Irreducibility verdicts and their witnesses.

Two independent routes decide Davies irreducibility in finite dimension:
fullness of the algebra generated by the Lindblad operators and K, and
existence of a unique full-rank steady state.  They must agree; a
disagreement is raised as :class:`CheckerDisagreement`.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .algebra import commutant, contains, generate_algebra, is_self_adjoint_span
from .liouvillian import (
    LindbladSystem,
    SteadyStateSet,
    adjoint_superoperator,
    build_superoperator,
    compute_K,
    steady_states,
)
from .operator_core import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    dagger,
    hermitize,
    is_projection,
    null_space,
    polish_projection,
)

log = logging.getLogger(__name__)

__all__ = [
    "Verdict",
    "EvansVerdict",
    "Criterion",
    "CheckerDisagreement",
    "NoWitnessFound",
    "AlgebraCheck",
    "SteadyCheck",
    "EvansCheck",
    "ProjectionCheck",
    "DarkStateReport",
    "ReducibilityReport",
    "check_davies_algebra",
    "check_davies_steady",
    "find_reducing_projection",
    "verify_reducing_projection",
    "invariant_closure",
    "check_evans",
    "check_frigerio1",
    "check_frigerio2",
    "check_extension_corollary",
    "check_dark_state",
    "find_dark_states",
    "analyze",
]


class Verdict(str, Enum):
    IRREDUCIBLE = "Irreducible"
    REDUCIBLE = "Reducible"


class EvansVerdict(str, Enum):
    IRREDUCIBLE = "EvansIrreducible"
    REDUCIBLE = "EvansReducible"


class Criterion(str, Enum):
    APPLICABLE_UNIQUE = "Applicable(unique)"
    IMPLIES_IRREDUCIBLE = "ImpliesIrreducible"
    NOT_APPLICABLE = "NotApplicable"
    G_NOT_IN_ALGEBRA = "GNotInAlgebra"


class CheckerDisagreement(RuntimeError):
    def __init__(self, algebra: "AlgebraCheck", steady: "SteadyCheck"):
        self.algebra = algebra
        self.steady = steady
        super().__init__(
            f"Davies checkers disagree: algebra route says {algebra.verdict.value} "
            f"(dim {algebra.algebra_dim}/{algebra.full_dim}), steady-state route says "
            f"{steady.verdict.value} (null_dim {steady.null_dim}, rank {steady.support_rank})")


class NoWitnessFound(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Davies checkers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraCheck:
    verdict: Verdict
    algebra_dim: int
    full_dim: int
    rounds: int


def _seeds(sys: LindbladSystem) -> list[np.ndarray]:
    return list(sys.lindblads) + [compute_K(sys)]


def check_davies_algebra(sys: LindbladSystem, tol: ToleranceConfig = DEFAULT_TOL) -> AlgebraCheck:
    """Irreducible iff {L_a} and K generate all d x d matrices."""
    res = generate_algebra(_seeds(sys), tol)
    verdict = Verdict.IRREDUCIBLE if res.is_full else Verdict.REDUCIBLE
    return AlgebraCheck(verdict, res.dim, sys.dim ** 2, res.rounds)


@dataclass(frozen=True)
class SteadyCheck:
    verdict: Verdict
    null_dim: int
    support_rank: int
    steady: SteadyStateSet = field(repr=False)


def check_davies_steady(sys: LindbladSystem, tol: ToleranceConfig = DEFAULT_TOL,
                        steady: SteadyStateSet | None = None) -> SteadyCheck:
    """Irreducible iff the steady state is unique and has full rank."""
    ss = steady or steady_states(sys, tol)
    ok = ss.null_dim == 1 and ss.support_rank == sys.dim
    return SteadyCheck(Verdict.IRREDUCIBLE if ok else Verdict.REDUCIBLE,
                       ss.null_dim, ss.support_rank, ss)


# ---------------------------------------------------------------------------
# Reducing projections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionCheck:
    ok: bool
    trivial: bool
    lindblad_residuals: tuple
    k_residual: float

    @property
    def max_residual(self) -> float:
        return max((self.k_residual,) + tuple(self.lindblad_residuals))


def verify_reducing_projection(sys: LindbladSystem, p, tol: ToleranceConfig = DEFAULT_TOL) -> ProjectionCheck:
    """Check ``(1 - P) A P = 0`` for every Lindblad operator and K.

    Residuals are reported relative to ``||A||``.  ``P`` equal to 0 or the
    identity passes and is flagged as trivial.
    """
    p = as_matrix(p)
    d = sys.dim
    if p.shape != (d, d):
        raise ValueError(f"projection has shape {p.shape}, expected {(d, d)}")
    if not is_projection(p, max(tol.verify, 1e-8) * max(1.0, np.linalg.norm(p))):
        raise ValueError("input is not an orthogonal projection")
    q = np.eye(d) - p

    def rel(a):
        na = np.linalg.norm(a)
        return float(np.linalg.norm(q @ a @ p) / na) if na > 0 else 0.0

    lres = tuple(rel(l) for l in sys.lindblads)
    kres = rel(compute_K(sys))
    trivial = np.linalg.norm(p) < 0.5 or np.linalg.norm(q) < 0.5
    ok = all(r <= tol.verify for r in lres) and kres <= tol.verify
    return ProjectionCheck(ok, bool(trivial), lres, kres)


def invariant_closure(vectors, ops, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal columns spanning the smallest subspace that contains
    ``vectors`` and is invariant under every operator in ``ops``."""
    vs = np.atleast_2d(np.asarray(vectors, dtype=complex).T).T
    d = vs.shape[0]
    q = np.zeros((d, 0), dtype=complex)
    work = [v for v in vs.T]
    while work:
        v = work.pop()
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        for _ in range(2):
            v = v - q @ (dagger(q) @ v)
        if np.linalg.norm(v) <= tol * nv:
            continue
        v = v / np.linalg.norm(v)
        q = np.column_stack([q, v])
        if q.shape[1] == d:
            break
        work.extend(a @ v for a in ops)
    return q


def _support(rho: np.ndarray, tol: float) -> np.ndarray:
    w, v = np.linalg.eigh(hermitize(rho))
    return v[:, w > tol]


def _boundary_state(ss: SteadyStateSet, tol: ToleranceConfig) -> np.ndarray | None:
    """Move from the max-support state along a traceless kernel direction
    to the PSD boundary; the resulting steady state has lower rank."""
    rho = ss.max_support_state
    s = _support(rho, tol.psd)
    best, best_norm = None, 0.0
    for b in ss.null_basis:
        for x in (hermitize(b), hermitize(1j * b)):
            x = x - np.trace(x).real * rho
            nx = np.linalg.norm(x)
            if nx > best_norm:
                best, best_norm = x / nx, nx
    if best is None or best_norm <= tol.verify:
        return None
    rs = dagger(s) @ rho @ s
    xs = dagger(s) @ best @ s
    mu = scipy.linalg.eigh(hermitize(xs), hermitize(rs), eigvals_only=True)
    if mu[0] >= 0:
        return None
    return rho - best / mu[0]


def find_reducing_projection(sys: LindbladSystem, tol: ToleranceConfig = DEFAULT_TOL,
                             steady: SteadyStateSet | None = None) -> np.ndarray | None:
    """Return a projection P != 0, 1 onto an invariant subspace, or None if
    the system is irreducible.

    Tried in order: support of a rank-deficient unique steady state; support
    of a boundary point of the steady-state set when the kernel is
    degenerate; invariant closures of eigenvectors of Hermitized kernel
    elements under {L_a, K}.
    """
    d = sys.dim
    ss = steady or steady_states(sys, tol)
    if ss.null_dim == 1 and ss.support_rank == d:
        return None

    def accept(p):
        if p is None:
            return None
        p = polish_projection(p)
        r = int(round(np.trace(p).real))
        if r in (0, d):
            return None
        return p if verify_reducing_projection(sys, p, tol).ok else None

    candidates = []
    if ss.null_dim == 1:
        s = _support(ss.max_support_state, tol.psd)
        candidates.append(s @ dagger(s))
    else:
        edge = _boundary_state(ss, tol)
        if edge is not None:
            s = _support(edge, tol.psd * 10)
            candidates.append(s @ dagger(s))
    for c in candidates:
        p = accept(c)
        if p is not None:
            return p

    log.debug("falling back to invariant closures for %s", sys.name or "system")
    ops = list(sys.lindblads) + [compute_K(sys)]
    kernel_elems = [ss.max_support_state] + [hermitize(b) for b in ss.null_basis] \
        + [hermitize(1j * b) for b in ss.null_basis]
    for x in kernel_elems:
        _, vecs = np.linalg.eigh(hermitize(x))
        for v in vecs.T:
            q = invariant_closure(v, ops, tol.verify)
            if q.shape[1] < d:
                p = accept(q @ dagger(q))
                if p is not None:
                    return p
    raise NoWitnessFound(
        f"reducible by steady states (null_dim={ss.null_dim}, rank={ss.support_rank}/{d}) "
        "but no verified reducing projection was found")


# ---------------------------------------------------------------------------
# Evans / strong symmetries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvansCheck:
    verdict: EvansVerdict
    commutant_dim: int
    conserved_projection: np.ndarray | None
    conservation_residual: float | None


def _spectral_projections(x: np.ndarray, cluster: float) -> list[np.ndarray]:
    """Projections onto eigenvalue clusters of a Hermitian matrix."""
    w, v = np.linalg.eigh(hermitize(x))
    groups, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > cluster:
            groups.append(v[:, start:i])
            start = i
    return [g @ dagger(g) for g in groups]


def _hermitian_nonscalar(basis, d, tol) -> np.ndarray | None:
    eye = np.eye(d)
    for b in basis:
        for x in (hermitize(b), 1j * (b - dagger(b))):
            x = x - np.trace(x) / d * eye
            nx = np.linalg.norm(x)
            if nx > tol:
                return x / nx
    return None


def check_evans(sys: LindbladSystem, tol: ToleranceConfig = DEFAULT_TOL) -> EvansCheck:
    """Evans-reducible iff {L_a, L_a^+, H}' is larger than the scalars.

    The witness is a spectral projection of a non-scalar Hermitian element
    of the commutant; it is checked to be conserved, ``L^+(P) = 0``.
    """
    seeds = [sys.hamiltonian] + list(sys.lindblads) + [dagger(l) for l in sys.lindblads]
    com = commutant(seeds, tol)
    if com.dim <= 1:
        return EvansCheck(EvansVerdict.IRREDUCIBLE, com.dim, None, None)
    d = sys.dim
    x = _hermitian_nonscalar(com.basis, d, tol.verify)
    if x is None:
        return EvansCheck(EvansVerdict.IRREDUCIBLE, com.dim, None, None)
    p = polish_projection(_spectral_projections(x, tol.eig)[0])
    lstar = adjoint_superoperator(sys)
    res = float(np.linalg.norm(lstar(p)))
    return EvansCheck(EvansVerdict.REDUCIBLE, com.dim, p, res)


# ---------------------------------------------------------------------------
# Frigerio-type sufficient criteria
# ---------------------------------------------------------------------------

def check_frigerio1(sys: LindbladSystem, tol: ToleranceConfig = DEFAULT_TOL,
                    steady: SteadyStateSet | None = None) -> Criterion:
    """Faithful steady state plus trivial {L_a, L_a^+, H}' gives uniqueness."""
    ss = steady or steady_states(sys, tol)
    if ss.support_rank != sys.dim:
        return Criterion.NOT_APPLICABLE
    seeds = [sys.hamiltonian] + list(sys.lindblads) + [dagger(l) for l in sys.lindblads]
    if not commutant(seeds, tol).is_trivial:
        return Criterion.NOT_APPLICABLE
    return Criterion.APPLICABLE_UNIQUE


def check_frigerio2(sys: LindbladSystem, tol: ToleranceConfig = DEFAULT_TOL) -> Criterion:
    """Self-adjoint span{L_a} with trivial commutant implies irreducibility."""
    if not sys.lindblads:
        return Criterion.NOT_APPLICABLE
    if not is_self_adjoint_span(sys.lindblads, tol):
        return Criterion.NOT_APPLICABLE
    if not commutant(sys.lindblads, tol).is_trivial:
        return Criterion.NOT_APPLICABLE
    return Criterion.IMPLIES_IRREDUCIBLE


def check_extension_corollary(sys: LindbladSystem, g, tol: ToleranceConfig = DEFAULT_TOL) -> Criterion:
    """Any subset G of the generated algebra with self-adjoint span and
    trivial commutant implies irreducibility."""
    g = [as_matrix(x) for x in g]
    if not g:
        return Criterion.NOT_APPLICABLE
    alg = generate_algebra(_seeds(sys), tol)
    if not all(contains(alg.basis, x, tol.verify) for x in g):
        return Criterion.G_NOT_IN_ALGEBRA
    if is_self_adjoint_span(g, tol) and commutant(g, tol).is_trivial:
        return Criterion.IMPLIES_IRREDUCIBLE
    return Criterion.NOT_APPLICABLE


# ---------------------------------------------------------------------------
# Dark states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DarkStateReport:
    state: np.ndarray
    lindblad_eigenvalues: tuple
    k_eigenvalue: complex
    residuals: tuple
    liouvillian_residual: float


def _eig_residual(a, psi):
    lam = complex(np.vdot(psi, a @ psi))
    return lam, float(np.linalg.norm(a @ psi - lam * psi))


def check_dark_state(sys: LindbladSystem, psi, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[DarkStateReport, bool]:
    """Is ``psi`` a common eigenvector of every L_a and of K?

    Residuals are absolute; the threshold is ``tol.verify * max(1, ||A||)``.
    The report also carries ``||L(psi psi^+)||`` as a cross-check.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape[0] != sys.dim:
        raise ValueError(f"state has length {psi.shape[0]}, expected {sys.dim}")
    if abs(np.linalg.norm(psi) - 1) > 1e-8:
        raise ValueError("state must be normalized")
    ops = list(sys.lindblads) + [compute_K(sys)]
    lams, res, ok = [], [], True
    for a in ops:
        lam, r = _eig_residual(a, psi)
        lams.append(lam)
        res.append(r)
        ok &= r <= tol.verify * max(1.0, np.linalg.norm(a, 2))
    rho = np.outer(psi, psi.conj())
    lres = float(np.linalg.norm(build_superoperator(sys)(rho)))
    report = DarkStateReport(psi, tuple(lams[:-1]), lams[-1], tuple(res), lres)
    return report, bool(ok)


def _cluster(values: np.ndarray, radius: float) -> list[complex]:
    reps: list[list[complex]] = []
    for z in values:
        for group in reps:
            if abs(group[0] - z) <= radius:
                group.append(z)
                break
        else:
            reps.append([z])
    return [complex(np.mean(g)) for g in reps]


def find_dark_states(sys: LindbladSystem, tol: ToleranceConfig = DEFAULT_TOL) -> list[DarkStateReport]:
    """All common eigenvectors of the Lindblad operators and K.

    Eigenspaces are intersected operator by operator, in input order with K
    last.  Returned states are orthonormal bases of the common eigenspaces.
    """
    d = sys.dim
    ops = list(sys.lindblads) + [compute_K(sys)]
    spaces = [np.eye(d, dtype=complex)]
    for a in ops:
        scale = max(1.0, np.linalg.norm(a, 2))
        refined = []
        for s in spaces:
            comp = dagger(s) @ a @ s
            for lam in _cluster(np.linalg.eigvals(comp), tol.eig * scale):
                ker = null_space((a - lam * np.eye(d)) @ s, tol.verify, scale=scale)
                if ker.shape[1]:
                    sub = s @ ker
                    q, _ = np.linalg.qr(sub)
                    refined.append(q)
        spaces = refined
        if not spaces:
            return []
    out = []
    for s in spaces:
        for psi in s.T:
            psi = psi / np.linalg.norm(psi)
            # fix the global phase: first non-negligible amplitude real positive
            lead = psi[np.flatnonzero(np.abs(psi) > 1e-8)[0]]
            report, ok = check_dark_state(sys, psi * (abs(lead) / lead), tol)
            if ok:
                out.append(report)
    return out


# ---------------------------------------------------------------------------
# Aggregate report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducibilityReport:
    davies_algebra_verdict: Verdict
    algebra_dim: int
    davies_steady_verdict: Verdict
    null_dim: int
    support_rank: int
    reducing_projection: np.ndarray | None
    projection_residual: float | None
    evans_verdict: EvansVerdict
    evans_commutant_dim: int
    conserved_projection: np.ndarray | None
    conservation_residual: float | None
    frigerio1_applicable: bool
    frigerio1_conclusion: bool
    frigerio2_applicable: bool
    frigerio2_conclusion: bool
    dim: int
    steady: SteadyStateSet = field(repr=False)

    @property
    def verdict(self) -> Verdict:
        return self.davies_algebra_verdict


def analyze(sys: LindbladSystem, tol: ToleranceConfig = DEFAULT_TOL, parallel: bool = False) -> ReducibilityReport:
    """Run every checker and assemble a report.

    Raises CheckerDisagreement when the two Davies routes differ, and
    NoWitnessFound when a reducible system yields no verified projection.
    """
    ss = steady_states(sys, tol)
    jobs = {
        "algebra": lambda: check_davies_algebra(sys, tol),
        "evans": lambda: check_evans(sys, tol),
        "frigerio1": lambda: check_frigerio1(sys, tol, ss),
        "frigerio2": lambda: check_frigerio2(sys, tol),
    }
    if parallel:
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            futures = {k: pool.submit(f) for k, f in jobs.items()}
            out = {k: f.result() for k, f in futures.items()}
    else:
        out = {k: f() for k, f in jobs.items()}
    alg = out["algebra"]
    st = check_davies_steady(sys, tol, ss)
    if alg.verdict != st.verdict:
        raise CheckerDisagreement(alg, st)
    proj, pres = None, None
    if st.verdict is Verdict.REDUCIBLE:
        proj = find_reducing_projection(sys, tol, ss)
        pres = verify_reducing_projection(sys, proj, tol).max_residual
    ev = out["evans"]
    f1, f2 = out["frigerio1"], out["frigerio2"]
    return ReducibilityReport(
        davies_algebra_verdict=alg.verdict,
        algebra_dim=alg.algebra_dim,
        davies_steady_verdict=st.verdict,
        null_dim=st.null_dim,
        support_rank=st.support_rank,
        reducing_projection=proj,
        projection_residual=pres,
        evans_verdict=ev.verdict,
        evans_commutant_dim=ev.commutant_dim,
        conserved_projection=ev.conserved_projection,
        conservation_residual=ev.conservation_residual,
        frigerio1_applicable=f1 is Criterion.APPLICABLE_UNIQUE,
        frigerio1_conclusion=f1 is Criterion.APPLICABLE_UNIQUE and st.null_dim == 1,
        frigerio2_applicable=f2 is Criterion.IMPLIES_IRREDUCIBLE,
        frigerio2_conclusion=f2 is Criterion.IMPLIES_IRREDUCIBLE,
        dim=sys.dim,
        steady=ss,
    )
