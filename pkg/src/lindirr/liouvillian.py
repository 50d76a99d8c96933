"""Lindblad generator, its adjoint, the operator K, steady states and spectrum."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operator_core import (
    DEFAULT_TOL,
    NotHermitianError,
    OperatorSubspace,
    ToleranceConfig,
    as_matrix,
    dagger,
    hermitize,
    null_space,
    unvec,
    vec,
)

__all__ = [
    "LindbladSystem",
    "Superoperator",
    "SteadyStateSet",
    "SpectrumResult",
    "SteadyStateError",
    "build_superoperator",
    "adjoint_superoperator",
    "compute_K",
    "steady_states",
    "spectrum",
]


class SteadyStateError(RuntimeError):
    """The numerical kernel of the generator came out empty or inconsistent."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LindbladSystem:
    """Hamiltonian plus Lindblad operators with rates already absorbed.

    The generator is
    ``L(rho) = -i[H, rho] + sum_a (L_a rho L_a^+ - 1/2 {L_a^+ L_a, rho})``.
    """

    hamiltonian: np.ndarray
    lindblads: tuple = ()
    name: str = ""
    herm_tol: float = field(default=DEFAULT_TOL.herm, repr=False)

    def __post_init__(self):
        h = as_matrix(self.hamiltonian)
        if h.shape[0] != h.shape[1]:
            raise ValueError(f"Hamiltonian must be square, got {h.shape}")
        d = h.shape[0]
        err = np.linalg.norm(h - dagger(h))
        if err > self.herm_tol * max(1.0, np.linalg.norm(h)):
            raise NotHermitianError(f"Hamiltonian is not Hermitian (||H - H^+|| = {err:.3e})")
        ls = tuple(_frozen(as_matrix(l)) for l in self.lindblads)
        for k, l in enumerate(ls):
            if l.shape != (d, d):
                raise ValueError(f"Lindblad operator {k} has shape {l.shape}, expected {(d, d)}")
        object.__setattr__(self, "hamiltonian", _frozen(h))
        object.__setattr__(self, "lindblads", ls)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def with_hamiltonian(self, h) -> "LindbladSystem":
        return LindbladSystem(h, self.lindblads, self.name)

    def with_lindblads(self, lindblads) -> "LindbladSystem":
        return LindbladSystem(self.hamiltonian, tuple(lindblads), self.name)


@dataclass(frozen=True)
class Superoperator:
    """A d^2 x d^2 matrix acting on column-stacked vec(rho)."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        n = self.dim * self.dim
        if m.shape != (n, n):
            raise ValueError(f"superoperator for d={self.dim} must be {n}x{n}, got {m.shape}")
        object.__setattr__(self, "matrix", _frozen(m))

    def __call__(self, x) -> np.ndarray:
        return unvec(self.matrix @ vec(as_matrix(x)), self.dim)

    def adjoint(self) -> "Superoperator":
        """Adjoint with respect to the Hilbert-Schmidt pairing."""
        return Superoperator(self.dim, dagger(self.matrix))


def build_superoperator(sys: LindbladSystem) -> Superoperator:
    d = sys.dim
    eye = np.eye(d)
    h = sys.hamiltonian
    m = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for l in sys.lindblads:
        ldl = dagger(l) @ l
        m = m + np.kron(l.conj(), l) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye)
    return Superoperator(d, m)


def adjoint_superoperator(sys: LindbladSystem) -> Superoperator:
    """Heisenberg-picture generator ``i[H, X] + sum_a (L_a^+ X L_a - 1/2 {L_a^+ L_a, X})``."""
    d = sys.dim
    eye = np.eye(d)
    h = sys.hamiltonian
    m = 1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for l in sys.lindblads:
        ldl = dagger(l) @ l
        m = m + np.kron(l.T, dagger(l)) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye)
    return Superoperator(d, m)


def compute_K(sys: LindbladSystem) -> np.ndarray:
    """``K = -iH - 1/2 sum_a L_a^+ L_a``.

    Together with the Lindblad operators, K generates the algebra whose
    fullness decides irreducibility.
    """
    k = -1j * sys.hamiltonian
    for l in sys.lindblads:
        k = k - 0.5 * (dagger(l) @ l)
    return k


def generator_scale(sys: LindbladSystem) -> float:
    """``||H|| + sum_a ||L_a||^2`` (Frobenius), the natural size of the generator."""
    return float(np.linalg.norm(sys.hamiltonian) + sum(np.linalg.norm(l) ** 2 for l in sys.lindblads))


@dataclass(frozen=True)
class SteadyStateSet:
    null_dim: int
    max_support_state: np.ndarray
    support_rank: int
    null_basis: OperatorSubspace
    residual: float
    support_eigenvalues: np.ndarray = field(repr=False)

    @property
    def unique(self) -> bool:
        return self.null_dim == 1

    @property
    def faithful(self) -> bool:
        return self.support_rank == self.max_support_state.shape[0]

    def support_projection(self, tol: float = DEFAULT_TOL.psd) -> np.ndarray:
        w, v = np.linalg.eigh(self.max_support_state)
        keep = v[:, w > tol]
        return keep @ dagger(keep)


def steady_states(sys: LindbladSystem, tol: ToleranceConfig = DEFAULT_TOL,
                  superop: Superoperator | None = None) -> SteadyStateSet:
    """Kernel of the generator and its maximal-support steady state.

    The maximally mixed state is mapped onto the kernel with the oblique
    spectral projector ``R (W^+ R)^{-1} W^+`` built from right kernel ``R``
    and left kernel ``W``.  Since the zero eigenvalue of a finite-dimensional
    Lindblad generator is semisimple, this equals the long-time average of
    the evolved maximally mixed state and therefore has maximal support.
    """
    d = sys.dim
    lm = (superop or build_superoperator(sys)).matrix
    # cancellations can leave a generator far smaller than its ingredients;
    # round-off then scales with the ingredients, not with sigma_max
    scale = max(np.linalg.norm(lm, 2), generator_scale(sys))
    right = null_space(lm, tol.rank, scale=scale)
    left = null_space(dagger(lm), tol.rank, scale=scale)
    k = right.shape[1]
    if k == 0:
        raise SteadyStateError("generator has an empty numerical kernel")
    if left.shape[1] != k:
        raise SteadyStateError(
            f"left/right kernel dimensions differ ({left.shape[1]} vs {k}); "
            "zero eigenvalue not resolved at this tolerance")
    overlap = dagger(left) @ right
    if np.linalg.cond(overlap) > 1.0 / tol.rank:
        raise SteadyStateError("left and right kernels are nearly orthogonal")
    x0 = vec(np.eye(d) / d)
    coeff = np.linalg.solve(overlap, dagger(left) @ x0)
    rho = hermitize(unvec(right @ coeff, d))
    tr = np.trace(rho).real
    if tr <= 0:
        raise SteadyStateError("projected state has non-positive trace")
    rho = rho / tr
    w = np.linalg.eigvalsh(rho)
    if w[0] < -max(tol.psd, 1e3 * tol.rank):
        raise SteadyStateError(f"projected steady state not PSD (min eigenvalue {w[0]:.3e})")
    rank = int(np.count_nonzero(w > tol.psd))
    basis = OperatorSubspace(d, np.array([unvec(right[:, j], d) for j in range(k)]))
    res = float(np.linalg.norm(lm @ vec(rho)))
    return SteadyStateSet(k, rho, rank, basis, res, w)


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    gap: float
    relaxing: bool


def spectrum(sys: LindbladSystem, tol: ToleranceConfig = DEFAULT_TOL,
             superop: Superoperator | None = None) -> SpectrumResult:
    """Eigenvalues sorted by decreasing real part, spectral gap and relaxing flag.

    ``gap = -max{Re z : |z| > tol}``; zero when no nonzero eigenvalue exists.
    ``relaxing`` follows uniqueness of the steady state.
    """
    sup = superop or build_superoperator(sys)
    ev = np.linalg.eigvals(sup.matrix)
    scale = max(1.0, np.max(np.abs(ev)) if ev.size else 0.0)
    cut = tol.verify * scale
    order = np.lexsort((ev.imag, -ev.real))
    ev = ev[order]
    nonzero = ev[np.abs(ev) > cut]
    gap = max(float(-np.max(nonzero.real)), 0.0) if nonzero.size else 0.0
    relaxing = steady_states(sys, tol, sup).null_dim == 1
    return SpectrumResult(ev, gap, relaxing)
