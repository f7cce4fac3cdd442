"""Rank-1 qubit projectors in entry, Bloch and state-vector form.

A projector is kept in all three forms at once:

- entry form ``[[p, q], [conj(q), r]]``
- Bloch form ``c`` with ``P = (I + c1 X + c2 Y + c3 Z) / 2``
- state-vector form ``(x, y)`` with ``P = (x, y)(x, y)*``

The state vector is gauge fixed so that its first nonzero amplitude is real and
nonnegative. Y follows the ``[[0, i], [-i, 0]]`` convention of ``matkernel``.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from qpvlab.errors import InvalidProjectorError
from qpvlab.logging_config import logger
from qpvlab.matkernel import I2, X, Y, Z, ComplexMatrix, dagger, trace_norm

_NORM_TOL = 1e-8
_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class QubitProjector:
    """Rank-1 projector on C^2. Build with ``from_bloch`` / ``from_statevec``."""
    p: float
    q: complex
    r: float
    bloch: np.ndarray
    statevec: np.ndarray

    @property
    def matrix(self) -> ComplexMatrix:
        return np.array([[self.p, self.q], [np.conj(self.q), self.r]], dtype=complex)

    @property
    def orthogonal_statevec(self) -> np.ndarray:
        """The vector (-conj(y), conj(x)) spanning the range of I - P."""
        x, y = self.statevec
        return np.array([-np.conj(y), np.conj(x)], dtype=complex)

    def complement(self) -> "QubitProjector":
        """I - P."""
        return from_bloch(-self.bloch)

    def conjugated(self, u: ComplexMatrix) -> "QubitProjector":
        """u P u* for a 2x2 unitary u."""
        return from_statevec(np.asarray(u, dtype=complex) @ self.statevec)

    def __str__(self) -> str:
        return format_projector(self)


def pauli_combination(c: Sequence[float]) -> ComplexMatrix:
    """(I + c1 X + c2 Y + c3 Z) / 2 without normalising c."""
    c1, c2, c3 = (float(v) for v in c)
    return (I2 + c1 * X + c2 * Y + c3 * Z) / 2


def from_bloch(c: Sequence[float]) -> QubitProjector:
    """Projector with Bloch vector ``c`` (renormalised to unit length)."""
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.size != 3 or not np.all(np.isfinite(c)):
        raise InvalidProjectorError(f"Bloch vector must be 3 finite reals, got {c.tolist()}")
    norm = float(np.linalg.norm(c))
    if norm < _ZERO_TOL:
        raise InvalidProjectorError("Bloch vector is zero")
    if abs(norm - 1.0) > _NORM_TOL:
        logger.warning(f"Renormalising Bloch vector of length {norm:.12g}")
    c = c / norm
    c1, c2, c3 = c

    p = (1.0 + c3) / 2
    r = (1.0 - c3) / 2
    q = complex(c1, c2) / 2
    # |y| = sqrt(r), phase of y is -atan2(c2, c1); x = sqrt(p) is already gauge fixed.
    x = np.sqrt(max(p, 0.0))
    y = np.sqrt(max(r, 0.0)) * np.exp(-1j * np.arctan2(c2, c1))
    if x == 0.0:
        y = 1.0 + 0j
    return QubitProjector(
        p=float(p), q=q, r=float(r), bloch=c, statevec=np.array([x, y], dtype=complex)
    )


def from_statevec(v: Sequence[complex]) -> QubitProjector:
    """Projector onto the span of a nonzero vector of C^2."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != 2 or not np.all(np.isfinite(v)):
        raise InvalidProjectorError(f"state vector must be 2 finite complex numbers, got {v.tolist()}")
    norm = float(np.linalg.norm(v))
    if norm < _ZERO_TOL:
        raise InvalidProjectorError("state vector is zero")
    v = v / norm
    lead = v[0] if abs(v[0]) > _ZERO_TOL else v[1]
    v = v * (abs(lead) / lead)
    x, y = v
    q = x * np.conj(y)
    p = float(abs(x) ** 2)
    r = float(abs(y) ** 2)
    bloch = np.array([2 * q.real, 2 * q.imag, p - r])
    return QubitProjector(p=p, q=complex(q), r=r, bloch=bloch, statevec=v)


def from_matrix(m: ComplexMatrix) -> QubitProjector:
    """Read the Bloch vector off a 2x2 rank-1 projector."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise InvalidProjectorError(f"expected a 2x2 matrix, got shape {m.shape}")
    c = [2 * m[0, 1].real, 2 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real]
    return from_bloch(c)


def trace_distance(P: QubitProjector, L: QubitProjector) -> float:
    """||P - L||_1, which equals 2 sin(angle(P, L))."""
    return trace_norm(P.matrix - L.matrix)


def angle(P: QubitProjector, L: QubitProjector) -> float:
    """State-vector angle arccos|<v_P, v_L>| in [0, pi/2]."""
    v, w = P.statevec, L.statevec
    cos = abs(np.vdot(v, w))
    sin = abs(v[0] * w[1] - v[1] * w[0])
    return float(np.arctan2(sin, cos))


def canonical_pair_basis(P: QubitProjector, L: QubitProjector) -> ComplexMatrix:
    """Unitary u taking P to |0><0| and L to the projector onto (cos t, sin t).

    When P and L coincide or are orthogonal the free phase is set to zero.
    """
    u0 = np.vstack([P.statevec.conj(), P.orthogonal_statevec.conj()])
    a, b = u0 @ L.statevec
    alpha = -np.angle(a) if abs(a) > _ZERO_TOL else 0.0
    beta = -np.angle(b) if abs(b) > _ZERO_TOL else 0.0
    return np.diag([np.exp(1j * alpha), np.exp(1j * beta)]) @ u0


def is_projector(m: ComplexMatrix, tol: float = 1e-10) -> bool:
    """Hermitian, idempotent and trace one within ``tol``."""
    m = np.asarray(m, dtype=complex)
    return bool(
        np.allclose(m, dagger(m), atol=tol)
        and np.allclose(m @ m, m, atol=tol)
        and abs(np.trace(m) - 1) < tol
    )


def parse_projector(text: str) -> QubitProjector:
    """Parse ``bloch:c1,c2,c3`` or ``vec:re(x),im(x),re(y),im(y)``."""
    if not isinstance(text, str) or ":" not in text:
        raise InvalidProjectorError(f"projector must look like 'bloch:...' or 'vec:...', got {text!r}")
    kind, _, body = text.partition(":")
    try:
        values = [float(v) for v in body.split(",")]
    except ValueError as e:
        raise InvalidProjectorError(f"non-numeric projector component in {text!r}") from e
    kind = kind.strip().lower()
    if kind == "bloch" and len(values) == 3:
        return from_bloch(values)
    if kind == "vec" and len(values) == 4:
        return from_statevec([complex(values[0], values[1]), complex(values[2], values[3])])
    raise InvalidProjectorError(f"cannot parse projector {text!r}")


def format_projector(P: QubitProjector) -> str:
    """Bloch syntax with integers printed plainly, e.g. ``bloch:0,0,1``."""
    parts = []
    for v in P.bloch:
        v = 0.0 if abs(v) < 1e-15 else float(v)
        parts.append(str(int(v)) if v.is_integer() else repr(v))
    return "bloch:" + ",".join(parts)


Z_PLUS = from_bloch([0, 0, 1])
X_PLUS = from_bloch([1, 0, 0])
Y_PLUS = from_bloch([0, 1, 0])
