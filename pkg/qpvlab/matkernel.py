"""Dense complex linear algebra for small quantum registers.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Every register
dimension, and every matrix handed to an eigen or singular value routine, is
checked against the configured dimension cap (``QPVLAB_DIM_CAP``).
"""

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from qpvlab.config import get_settings
from qpvlab.errors import DimensionCapError, NotHermitianError, ShapeMismatchError

ComplexMatrix = np.ndarray

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
# Sign convention of the protocol literature this package follows: Y = [[0, i], [-i, 0]].
Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def check_dims(*dims: int) -> None:
    """Raise ``DimensionCapError`` if any dimension exceeds the cap."""
    cap = get_settings().dim_cap
    for dim in dims:
        if dim > cap:
            raise DimensionCapError(f"dimension {dim} exceeds cap {cap} (QPVLAB_DIM_CAP)")


@dataclass(frozen=True)
class RegisterShape:
    """Ordered tensor factor dimensions of a composite register."""
    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ShapeMismatchError(f"register dims must be positive integers, got {self.dims}")
        check_dims(*dims)
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self) -> int:
        return len(self.dims)


def as_matrix(m, name: str = "matrix") -> ComplexMatrix:
    """Coerce to a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.size == 0:
        raise ShapeMismatchError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeMismatchError(f"{name} has non-finite entries")
    return arr


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return m.conj().T


def frobenius_inner(a: ComplexMatrix, b: ComplexMatrix) -> complex:
    """Hilbert-Schmidt inner product Tr(a* b)."""
    return complex(np.vdot(a, b))


def tensor(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product with row/column dims multiplied."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    check_dims(*a.shape, *b.shape)
    return np.kron(a, b)


def mat_of_vector(c, shape: RegisterShape) -> ComplexMatrix:
    """Reshape a vector of H⊗J into the matrix [c_ij] mapping J to H."""
    c = np.asarray(c, dtype=complex).reshape(-1)
    if len(shape) != 2:
        raise ShapeMismatchError(f"mat_of_vector needs a 2-factor shape, got {shape.dims}")
    if c.size != shape.total:
        raise ShapeMismatchError(f"vector length {c.size} does not match dims {shape.dims}")
    return c.reshape(shape.dims)


def vector_of_mat(m: ComplexMatrix) -> np.ndarray:
    """Inverse of ``mat_of_vector``: row-major flattening."""
    return np.asarray(m, dtype=complex).reshape(-1)


def partial_trace(m: ComplexMatrix, shape: RegisterShape, keep: Iterable[int]) -> ComplexMatrix:
    """Trace out every factor of ``shape`` whose 0-based index is not in ``keep``.

    Kept factors stay in their original order.
    """
    m = as_matrix(m)
    n = len(shape)
    if m.shape != (shape.total, shape.total):
        raise ShapeMismatchError(f"operator of shape {m.shape} does not match dims {shape.dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ShapeMismatchError(f"keep indices {keep} out of range for {n} factors")

    t = m.reshape(shape.dims + shape.dims)
    current = n
    for k in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=k, axis2=k + current)
        current -= 1
    kept_dim = int(np.prod([shape.dims[k] for k in keep])) if keep else 1
    return t.reshape(kept_dim, kept_dim)


def trace_norm(m: ComplexMatrix) -> float:
    """Sum of singular values."""
    m = as_matrix(m)
    check_dims(*m.shape)
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def hermitian_part(m: ComplexMatrix, tol: Optional[float] = None) -> ComplexMatrix:
    """Return (m + m*)/2, refusing inputs whose asymmetry exceeds ``tol``."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeMismatchError(f"expected a square operator, got {m.shape}")
    tol = get_settings().rank_tol if tol is None else tol
    asymmetry = float(np.max(np.abs(m - dagger(m))))
    if asymmetry >= tol:
        raise NotHermitianError(f"operator asymmetry {asymmetry:.3e} exceeds {tol:.1e}")
    return (m + dagger(m)) / 2


def support_projector(rho: ComplexMatrix, tol: Optional[float] = None) -> ComplexMatrix:
    """Orthogonal projector onto the eigenvectors of ``rho`` with eigenvalue > tol."""
    tol = get_settings().rank_tol if tol is None else tol
    rho = hermitian_part(rho, tol)
    check_dims(*rho.shape)
    evals, evecs = np.linalg.eigh(rho)
    kept = evecs[:, evals > tol]
    return kept @ dagger(kept)


def positive_part_projector(h: ComplexMatrix, tol: Optional[float] = None) -> ComplexMatrix:
    """Projector onto the strictly positive eigenspace of a Hermitian operator."""
    tol = get_settings().rank_tol if tol is None else tol
    h = (h + dagger(h)) / 2
    check_dims(*h.shape)
    evals, evecs = np.linalg.eigh(h)
    kept = evecs[:, evals > tol]
    return kept @ dagger(kept)


class IsometryCheck(NamedTuple):
    ok: bool
    residual: float


def is_isometry(u: ComplexMatrix, tol: Optional[float] = None) -> IsometryCheck:
    """Frobenius residual of U*U − I and whether it is below ``tol``."""
    tol = get_settings().rank_tol if tol is None else tol
    u = as_matrix(u, "isometry")
    if u.shape[0] < u.shape[1]:
        return IsometryCheck(False, float("inf"))
    residual = float(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[1])))
    return IsometryCheck(residual < tol, residual)


def permute_factors(vec, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a state vector.

    ``order[i]`` is the index (in ``dims``) of the factor placed at position i.
    """
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if vec.size != int(np.prod(dims)):
        raise ShapeMismatchError(f"vector length {vec.size} does not match dims {tuple(dims)}")
    if sorted(order) != list(range(len(dims))):
        raise ShapeMismatchError(f"{tuple(order)} is not a permutation of {len(dims)} factors")
    return vec.reshape(tuple(dims)).transpose(tuple(order)).reshape(-1)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector."""
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    g = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> ComplexMatrix:
    """Leading ``cols`` columns of a Haar-random ``rows``-dimensional unitary."""
    if cols > rows:
        raise ShapeMismatchError(f"an isometry needs rows >= cols, got {rows}x{cols}")
    return random_unitary(rows, rng)[:, :cols]
