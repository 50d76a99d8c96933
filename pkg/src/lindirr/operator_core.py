"""Dense complex matrix substrate.

Operators are plain ``numpy`` arrays of dtype ``complex128``.  Superoperators
act on column-stacked vectors, i.e. ``vec(A X B) = (B^T kron A) vec(X)``.
Basis states follow the spin convention ``|up> = (1, 0)``, ``|down> = (0, 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import reduce

import numpy as np
import scipy.linalg

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "OperatorSubspace",
    "NotHermitianError",
    "as_matrix",
    "tensor",
    "hs_inner",
    "hs_norm",
    "dagger",
    "null_space",
    "matrix_rank",
    "eig_hermitian",
    "matrix_exp",
    "vec",
    "unvec",
    "hermitize",
    "is_projection",
    "polish_projection",
    "orthonormal_span",
    "SX", "SY", "SZ", "SP", "SM", "I2", "P_UP", "P_DOWN", "UP", "DOWN",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """All numerical thresholds in one place.

    rank       relative singular-value cutoff for rank and null-space decisions
    residual   relative residual above which a product is a new algebra direction
    skip_norm  absolute norm below which a product is treated as zero
    orth       orthonormality audit
    herm       Hermiticity check (relative to the operator norm)
    psd        eigenvalue floor for positivity and support rank of states
    eig        clustering radius for eigenvalues (dark states, spectral projections)
    verify     relative residual for reducing-projection and conservation checks
    support    absolute edge threshold for classical support graphs
    """

    rank: float = 1e-9
    residual: float = 1e-8
    skip_norm: float = 1e-12
    orth: float = 1e-10
    herm: float = 1e-10
    psd: float = 1e-9
    eig: float = 1e-6
    verify: float = 1e-8
    support: float = 1e-10

    def with_overrides(self, **kwargs) -> "ToleranceConfig":
        unknown = set(kwargs) - set(self.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown tolerance fields: {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in kwargs.items()})


DEFAULT_TOL = ToleranceConfig()


class NotHermitianError(ValueError):
    pass


def as_matrix(a) -> np.ndarray:
    """Return a finite complex128 2-D array (copy-free when possible)."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def tensor(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices, leftmost factor most significant."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    return reduce(np.kron, (as_matrix(o) for o in ops))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dagger b)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    return float(np.linalg.norm(a))


def vec(x: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v).reshape(-1)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized {d}x{d} matrix")
    return v.reshape(d, d, order="F")


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def _svd_cutoff(s: np.ndarray, tol: float, scale: float | None) -> float:
    # sigma_i <= tol * sigma_max, absolute floor 1e-12 when sigma_max == 0
    ref = scale if scale is not None else (s[0] if s.size else 0.0)
    return tol * ref if ref > 0 else 1e-12


def null_space(m, tol: float = DEFAULT_TOL.rank, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical kernel of ``m``.

    A right-singular vector is kept when its singular value is at most
    ``tol * sigma_max`` (or ``tol * scale`` when a scale is supplied).
    Returns an array of shape ``(cols, k)``; ``k`` may be zero.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if rows == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    cut = _svd_cutoff(s, tol, scale)
    rank = int(np.count_nonzero(s > cut))
    return np.conj(vh[rank:]).T.copy()


def matrix_rank(m, tol: float = DEFAULT_TOL.rank) -> int:
    s = np.linalg.svd(as_matrix(m), compute_uv=False)
    return int(np.count_nonzero(s > _svd_cutoff(s, tol, None)))


def eig_hermitian(m, tol: float = DEFAULT_TOL.herm) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.

    Raises NotHermitianError when ``||m - m^dagger|| > tol * max(1, ||m||)``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("eig_hermitian needs a square matrix")
    err = np.linalg.norm(m - dagger(m))
    if err > tol * max(1.0, np.linalg.norm(m)):
        raise NotHermitianError(f"matrix is not Hermitian (||m - m^+|| = {err:.3e})")
    w, v = np.linalg.eigh(hermitize(m))
    return w, v


def matrix_exp(m) -> np.ndarray:
    return scipy.linalg.expm(as_matrix(m))


def is_projection(p, tol: float = 1e-8) -> bool:
    p = as_matrix(p)
    return (np.linalg.norm(p @ p - p) <= tol and np.linalg.norm(p - dagger(p)) <= tol)


def polish_projection(p) -> np.ndarray:
    """Hermitize and snap eigenvalues to {0, 1}."""
    w, v = np.linalg.eigh(hermitize(as_matrix(p)))
    keep = v[:, w > 0.5]
    return keep @ dagger(keep)


def orthonormal_span(vectors: np.ndarray, tol: float = DEFAULT_TOL.rank) -> np.ndarray:
    """Orthonormal basis (rows) for the row span of ``vectors``."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if vectors.shape[0] == 0:
        return vectors
    u, s, vh = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return vectors[:0]
    r = int(np.count_nonzero(s > tol * s[0]))
    return vh[:r].copy()


@dataclass(frozen=True)
class OperatorSubspace:
    """HS-orthonormal basis of a linear subspace of d x d operators.

    ``basis`` is stored as an array of shape ``(k, d, d)``.
    """

    dim_hilbert: int
    basis: np.ndarray
    tol: float = DEFAULT_TOL.orth
    _flat: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        d = self.dim_hilbert
        if b.ndim != 3 or b.shape[1:] != (d, d):
            raise ValueError(f"basis must have shape (k, {d}, {d}), got {b.shape}")
        if not 1 <= b.shape[0] <= d * d:
            raise ValueError(f"subspace dimension {b.shape[0]} outside [1, {d * d}]")
        flat = b.reshape(b.shape[0], -1)
        gram = flat.conj() @ flat.T
        err = np.max(np.abs(gram - np.eye(b.shape[0])))
        if err > self.tol:
            raise ValueError(f"basis not HS-orthonormal (max deviation {err:.3e})")
        b.setflags(write=False)
        flat.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "_flat", flat)

    @classmethod
    def from_rows(cls, rows: np.ndarray, d: int, tol: float = DEFAULT_TOL.orth) -> "OperatorSubspace":
        rows = np.asarray(rows)
        return cls(d, rows.reshape(rows.shape[0], d, d), tol)

    @classmethod
    def spanned_by(cls, ops, tol: float = DEFAULT_TOL.rank) -> "OperatorSubspace | None":
        """Orthonormalize ``ops``; ``None`` if they span only the zero operator."""
        stack = np.asarray([as_matrix(o) for o in ops])
        d = stack.shape[-1]
        rows = orthonormal_span(stack.reshape(len(stack), -1), tol)
        if rows.shape[0] == 0:
            return None
        return cls.from_rows(rows, d)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def vectors(self) -> np.ndarray:
        """Basis as rows of length d^2 (row-major flattening)."""
        return self._flat

    def __len__(self) -> int:
        return self.dim

    def __iter__(self):
        return iter(self.basis)

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex).reshape(-1)
        coeff = self._flat.conj() @ x
        return (coeff @ self._flat).reshape(self.dim_hilbert, self.dim_hilbert)

    def residual(self, x) -> float:
        x = np.asarray(x, dtype=complex)
        return float(np.linalg.norm(x - self.project(x)))


# Spin-1/2 constants: |up> = (1, 0), |down> = (0, 1).
UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)
I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SP = np.array([[0, 1], [0, 0]], dtype=complex)   # |up><down|
SM = np.array([[0, 0], [1, 0]], dtype=complex)   # |down><up|
P_UP = np.array([[1, 0], [0, 0]], dtype=complex)
P_DOWN = np.array([[0, 0], [0, 1]], dtype=complex)

for _c in (UP, DOWN, I2, SX, SY, SZ, SP, SM, P_UP, P_DOWN):
    _c.setflags(write=False)
del _c
