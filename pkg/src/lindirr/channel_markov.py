"""Quantum channels of the semigroup, Choi/Kraus forms and classical Markov chains.

Conventions: superoperators act on column-stacked vectors; the Choi matrix
is ``sum_ij E(|i><j|) kron |i><j|`` (output factor first).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .liouvillian import LindbladSystem, build_superoperator
from .operator_core import DEFAULT_TOL, ToleranceConfig, as_matrix, dagger, matrix_exp, unvec, vec

__all__ = [
    "ChannelAuditError",
    "QuantumChannel",
    "KrausSet",
    "StochasticMatrix",
    "MarkovVerdict",
    "ProbeReport",
    "channel_from_liouvillian",
    "choi_matrix",
    "kraus_from_choi",
    "kraus_to_superoperator",
    "haar_unitary",
    "classical_transition_matrix",
    "is_irreducible_markov",
    "adapted_basis",
    "basis_probe",
    "export_dot",
]


class ChannelAuditError(ValueError):
    pass


@dataclass(frozen=True)
class QuantumChannel:
    dim: int
    matrix: np.ndarray
    time_tag: float | None = None

    def __call__(self, rho) -> np.ndarray:
        return unvec(self.matrix @ vec(as_matrix(rho)), self.dim)

    def adjoint(self, x) -> np.ndarray:
        return unvec(dagger(self.matrix) @ vec(as_matrix(x)), self.dim)

    def compose(self, other: "QuantumChannel") -> "QuantumChannel":
        """``self o other``."""
        t = None
        if self.time_tag is not None and other.time_tag is not None:
            t = self.time_tag + other.time_tag
        return QuantumChannel(self.dim, self.matrix @ other.matrix, t)


def _audit(ch: QuantumChannel, tol: float) -> None:
    d = ch.dim
    tp = np.linalg.norm(ch.adjoint(np.eye(d)) - np.eye(d))
    if tp > tol * d:
        raise ChannelAuditError(f"channel is not trace preserving (residual {tp:.3e})")
    w = np.linalg.eigvalsh(choi_matrix(ch))
    if w[0] < -tol * max(1.0, w[-1]):
        raise ChannelAuditError(f"channel is not completely positive (Choi eigenvalue {w[0]:.3e})")


def channel_from_liouvillian(sys: LindbladSystem, t: float, audit_tol: float = 1e-8) -> QuantumChannel:
    """``E = exp(t L)``, audited for complete positivity and trace preservation."""
    if not (np.isfinite(t) and t > 0):
        raise ValueError(f"time must be finite and positive, got {t}")
    m = matrix_exp(t * build_superoperator(sys).matrix)
    ch = QuantumChannel(sys.dim, m, float(t))
    _audit(ch, audit_tol)
    return ch


def choi_matrix(ch: QuantumChannel) -> np.ndarray:
    d = ch.dim
    # matrix[a + b d, i + j d] = E(|i><j|)[a, b]; reshape gives axes (b, a, j, i)
    m4 = np.asarray(ch.matrix).reshape(d, d, d, d)
    return m4.transpose(1, 3, 0, 2).reshape(d * d, d * d)


@dataclass(frozen=True)
class KrausSet:
    operators: tuple

    def __len__(self):
        return len(self.operators)

    def completeness_residual(self) -> float:
        d = self.operators[0].shape[0]
        s = sum(dagger(m) @ m for m in self.operators)
        return float(np.linalg.norm(s - np.eye(d)))

    def superoperator(self) -> np.ndarray:
        return kraus_to_superoperator(self.operators)


def kraus_to_superoperator(ops) -> np.ndarray:
    return sum(np.kron(np.conj(m), m) for m in ops)


def kraus_from_choi(choi, tol: float = 1e-12) -> KrausSet:
    """Kraus operators ``sqrt(lambda_k) unvec(v_k)`` from the Choi eigenpairs
    with ``lambda_k > tol * lambda_max``."""
    choi = as_matrix(choi)
    n = choi.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n:
        raise ValueError("Choi matrix dimension is not a perfect square")
    w, v = np.linalg.eigh(0.5 * (choi + dagger(choi)))
    lmax = max(w[-1], 0.0)
    if w[0] < -max(1e-9, 1e3 * tol) * max(1.0, lmax):
        raise ChannelAuditError(f"Choi matrix has negative eigenvalue {w[0]:.3e}; not a channel")
    ops = tuple(np.sqrt(lam) * v[:, k].reshape(d, d)
                for k, lam in enumerate(w) if lam > tol * lmax)
    return KrausSet(ops[::-1])


@dataclass(frozen=True)
class StochasticMatrix:
    """Column-stochastic: ``entries[i, j]`` is the probability of j -> i."""

    entries: np.ndarray
    basis_labels: tuple | None = None

    def __post_init__(self):
        p = np.asarray(self.entries, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"stochastic matrix must be square, got {p.shape}")
        if self.basis_labels is not None and len(self.basis_labels) != p.shape[0]:
            raise ValueError("one label per state required")
        p.setflags(write=False)
        object.__setattr__(self, "entries", p)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from QR of a complex Ginibre matrix with phase fix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def classical_transition_matrix(ch: QuantumChannel, basis=None, labels=None,
                                tol: float = 1e-9) -> StochasticMatrix:
    """``P[i, j] = <i| E(|j><j|) |i>`` for the orthonormal basis given as columns."""
    d = ch.dim
    u = np.eye(d, dtype=complex) if basis is None else as_matrix(basis)
    if u.shape != (d, d) or np.linalg.norm(dagger(u) @ u - np.eye(d)) > tol * d:
        raise ValueError("basis must be a unitary d x d matrix (columns = basis states)")
    p = np.empty((d, d))
    for j in range(d):
        out = ch(np.outer(u[:, j], u[:, j].conj()))
        p[:, j] = np.einsum("ai,ab,bi->i", u.conj(), out, u).real
    if p.min() < -tol:
        raise ValueError(f"negative transition probability {p.min():.3e}")
    col = np.abs(p.sum(axis=0) - 1).max()
    if col > tol * d:
        raise ValueError(f"columns do not sum to one (deviation {col:.3e})")
    return StochasticMatrix(np.clip(p, 0.0, 1.0), None if labels is None else tuple(labels))


@dataclass(frozen=True)
class MarkovVerdict:
    irreducible: bool
    components: tuple
    closed_classes: tuple


def is_irreducible_markov(p: StochasticMatrix, support_tol: float = DEFAULT_TOL.support) -> MarkovVerdict:
    """Strong connectivity of the support graph (edge j -> i iff P[i, j] > tol).

    ``components`` are the strongly connected components; ``closed_classes``
    are those with no edge leaving them (absorbing classes).
    """
    adj = (p.entries.T > support_tol)  # adj[j, i]: edge j -> i
    ncomp, labels = connected_components(adj.astype(np.int8), directed=True, connection="strong")
    comps = [tuple(int(i) for i in np.flatnonzero(labels == c)) for c in range(ncomp)]
    comps.sort()
    closed = []
    for comp in comps:
        outside = np.setdiff1d(np.arange(p.dim), comp)
        if not adj[np.ix_(comp, outside)].any():
            closed.append(comp)
    return MarkovVerdict(ncomp == 1, tuple(comps), tuple(closed))


def adapted_basis(p) -> np.ndarray:
    """Orthonormal basis whose first columns span the image of projection ``p``."""
    w, v = np.linalg.eigh(0.5 * (p + dagger(p)))
    return v[:, ::-1].copy()


@dataclass(frozen=True)
class ProbeReport:
    verdict: str  # "reducible" or "no witness"
    witness_basis_index: int | None
    trials: int
    seed: int
    t: float
    outcomes: tuple = ()

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "witness_basis_index": self.witness_basis_index,
                "trials": self.trials, "seed": self.seed, "t": self.t}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def basis_probe(sys: LindbladSystem, t: float = 1.0, trials: int = 8, seed: int = 0,
                reducing_projection=None, support_tol: float = DEFAULT_TOL.support) -> ProbeReport:
    """One-sided search for a basis whose classical chain is reducible.

    Bases tried, in index order: 0 the computational basis, 1..trials
    Haar-random unitaries (trial k seeded with ``seed + k``), and finally a
    basis adapted to ``reducing_projection`` when one is given.  A reducible
    chain certifies quantum reducibility; finding none proves nothing.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ch = channel_from_liouvillian(sys, t)
    bases = [np.eye(sys.dim, dtype=complex)]
    bases += [haar_unitary(sys.dim, np.random.default_rng(seed + k)) for k in range(1, trials + 1)]
    if reducing_projection is not None:
        bases.append(adapted_basis(as_matrix(reducing_projection)))
    outcomes = []
    witness = None
    for idx, u in enumerate(bases):
        ok = is_irreducible_markov(classical_transition_matrix(ch, u), support_tol).irreducible
        outcomes.append(ok)
        if not ok and witness is None:
            witness = idx
    verdict = "reducible" if witness is not None else "no witness"
    return ProbeReport(verdict, witness, trials, seed, float(t), tuple(outcomes))


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(p: StochasticMatrix, threshold: float = DEFAULT_TOL.support, name: str = "markov") -> str:
    """DOT digraph with one edge j -> i per entry ``P[i, j] > threshold``."""
    labels = p.basis_labels or tuple(f"b{i}" for i in range(p.dim))
    lines = [f"digraph {name} {{"]
    for lab in labels:
        lines.append(f"  {_dot_id(lab)};")
    for j in range(p.dim):
        for i in range(p.dim):
            w = p.entries[i, j]
            if w > threshold:
                lines.append(f"  {_dot_id(labels[j])} -> {_dot_id(labels[i])} [label=\"{w:.6g}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"
