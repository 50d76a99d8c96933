"""Multiplicative operator algebras, commutants and self-adjointness of spans.

Algebras are generated by multiplication and linear combination only.
Adjoints of the seeds are never inserted, and neither is the identity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operator_core import (
    DEFAULT_TOL,
    OperatorSubspace,
    ToleranceConfig,
    as_matrix,
    dagger,
    null_space,
    unvec,
)

__all__ = [
    "AlgebraClosureResult",
    "CommutantResult",
    "AlgebraClosureError",
    "generate_algebra",
    "commutant",
    "is_self_adjoint_span",
    "contains",
]

# products formed per batch; bounds memory at roughly 4096 * d^2 complex numbers
_BATCH = 4096


class AlgebraClosureError(RuntimeError):
    pass


@dataclass(frozen=True)
class AlgebraClosureResult:
    basis: OperatorSubspace
    dim: int
    is_full: bool
    rounds: int
    seed_count: int


@dataclass(frozen=True)
class CommutantResult:
    basis: OperatorSubspace
    dim: int
    is_trivial: bool


def _stack(ops) -> np.ndarray:
    mats = [as_matrix(o) for o in ops]
    if not mats:
        raise ValueError("need at least one operator")
    shape = mats[0].shape
    if shape[0] != shape[1]:
        raise ValueError(f"operators must be square, got {shape}")
    for m in mats:
        if m.shape != shape:
            raise ValueError(f"dimension mismatch among operators: {shape} vs {m.shape}")
    return np.array(mats)


class _Basis:
    """Growing HS-orthonormal basis stored as rows of a preallocated array."""

    def __init__(self, n: int, cap: int):
        self.q = np.zeros((cap, n), dtype=complex)
        self.k = 0

    @property
    def rows(self) -> np.ndarray:
        return self.q[: self.k]

    def project_out(self, x: np.ndarray) -> np.ndarray:
        # classical Gram-Schmidt applied twice ("twice is enough")
        q = self.rows
        for _ in range(2):
            x = x - (x @ q.conj().T) @ q
        return x

    def admit(self, x: np.ndarray, norm: float, tol: float) -> bool:
        r = self.project_out(x)
        rn = np.linalg.norm(r)
        if rn <= tol * norm:
            return False
        self.q[self.k] = r / rn
        self.k += 1
        return True


def _admit_batch(basis: _Basis, prods: np.ndarray, tol: ToleranceConfig, cap: int) -> list[int]:
    """Admit new directions from a batch of flattened products; return new row indices."""
    norms = np.linalg.norm(prods, axis=1)
    live = norms > tol.skip_norm
    if not np.any(live):
        return []
    prods, norms = prods[live], norms[live]
    # cheap screen against the basis as it stands at batch start
    resid = basis.project_out(prods)
    rel = np.linalg.norm(resid, axis=1) / norms
    added = []
    for i in np.flatnonzero(rel > tol.residual):
        if basis.k >= cap:
            break
        if basis.admit(resid[i], norms[i], tol.residual):
            added.append(basis.k - 1)
    return added


def generate_algebra(seeds, tol: ToleranceConfig = DEFAULT_TOL,
                     max_dim: int | None = None) -> AlgebraClosureResult:
    """Smallest multiplicatively closed subspace containing ``seeds``.

    Frontier closure: every round multiplies each newly admitted element
    with every basis element in both orders, orthogonalizes the products
    against the basis and admits residuals whose norm exceeds
    ``tol.residual`` relative to the product norm.  Stops when a round
    admits nothing or the dimension reaches ``max_dim`` (default d^2).
    """
    mats = _stack(seeds)
    d = mats.shape[1]
    n = d * d
    cap = n if max_dim is None else min(int(max_dim), n)
    basis = _Basis(n, cap)

    frontier = []
    flat = mats.reshape(len(mats), n)
    for x in flat:
        nx = np.linalg.norm(x)
        if nx > tol.skip_norm and basis.k < cap and basis.admit(x, nx, tol.residual):
            frontier.append(basis.k - 1)

    rounds = 0
    while frontier and basis.k < cap:
        rounds += 1
        new = []
        f_mats = basis.rows[frontier].reshape(-1, d, d).copy()
        k_round = basis.k
        b_mats = basis.rows[:k_round].reshape(-1, d, d).copy()
        step = max(1, _BATCH // max(1, 2 * k_round))
        for start in range(0, len(f_mats), step):
            f = f_mats[start:start + step]
            left = np.matmul(f[:, None], b_mats[None]).reshape(-1, n)
            right = np.matmul(b_mats[None], f[:, None]).reshape(-1, n)
            new += _admit_batch(basis, np.concatenate([left, right]), tol, cap)
            if basis.k >= cap:
                break
        frontier = new

    q = basis.rows.copy()
    err = np.max(np.abs(q.conj() @ q.T - np.eye(basis.k))) if basis.k else 0.0
    if err > tol.orth:
        raise AlgebraClosureError(f"closure basis lost orthonormality (deviation {err:.3e})")
    if basis.k == 0:
        raise AlgebraClosureError("all seeds are numerically zero")
    space = OperatorSubspace.from_rows(q, d, max(tol.orth, 10 * err))
    return AlgebraClosureResult(space, basis.k, basis.k == n, rounds, len(mats))


def commutant(seeds, tol: ToleranceConfig = DEFAULT_TOL) -> CommutantResult:
    """All X with [X, A] = 0 for every seed A.

    Solved as the null space of the stacked maps ``vec(X) -> vec(AX - XA)``
    with each seed scaled to unit HS norm, so the rank cutoff is relative.
    """
    mats = _stack(seeds)
    d = mats.shape[1]
    eye = np.eye(d)
    blocks = []
    for a in mats:
        na = np.linalg.norm(a)
        if na <= tol.skip_norm:
            continue
        a = a / na
        blocks.append(np.kron(eye, a) - np.kron(a.T, eye))
    if blocks:
        ker = null_space(np.vstack(blocks), tol.rank, scale=1.0)
    else:
        ker = np.eye(d * d, dtype=complex)
    basis = OperatorSubspace(d, np.array([unvec(ker[:, j], d) for j in range(ker.shape[1])]))
    trivial = basis.dim == 1 and basis.residual(np.eye(d)) <= tol.verify * np.sqrt(d)
    return CommutantResult(basis, basis.dim, trivial)


def contains(space: OperatorSubspace, x, tol: float = DEFAULT_TOL.verify) -> bool:
    """True when ``x`` lies in ``space`` up to ``tol * ||x||``."""
    x = as_matrix(x)
    if x.shape != (space.dim_hilbert, space.dim_hilbert):
        raise ValueError(f"operator of shape {x.shape} does not match d={space.dim_hilbert}")
    nx = np.linalg.norm(x)
    if nx == 0:
        return True
    return space.residual(x) <= tol * nx


def is_self_adjoint_span(ops, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    mats = _stack(ops)
    space = OperatorSubspace.spanned_by(mats, tol.rank)
    if space is None:
        return True
    return all(contains(space, dagger(m), tol.verify) for m in mats)
