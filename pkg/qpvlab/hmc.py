"""Hidden measurement channels.

A channel rho -> U(ww* ⊗ rho)U* from a qubit Q into V1⊗V2 is a hidden
measurement channel for P when its outputs for P and I - P are perfectly
distinguishable on V1 alone and on V2 alone. This module decides that property
three equivalent ways, evaluates the polynomial system whose zero set is the set
Lambda of all such (P, w), and provides the distance bound and the component
count that constrain Lambda.
"""

from dataclasses import dataclass
from typing import Any, Dict, NamedTuple, Sequence, Tuple

import numpy as np

from qpvlab.bloch import QubitProjector, Z_PLUS, format_projector, parse_projector, pauli_combination
from qpvlab.config import get_settings
from qpvlab.errors import InputFormatError, NotIsometryError, QpvError, ShapeMismatchError
from qpvlab.logging_config import logger
from qpvlab.matkernel import (
    I2,
    ComplexMatrix,
    RegisterShape,
    dagger,
    frobenius_inner,
    is_isometry,
    mat_of_vector,
    support_projector,
    trace_norm,
)
from qpvlab.models import HmcVerdict, InstanceFile
from qpvlab.utils import matrix_from_literal, matrix_to_literal, parse_model, vector_from_literal, vector_to_literal


@dataclass(frozen=True)
class ChannelShape:
    """Dimensions of W (side input), V1 and V2; the qubit Q is always 2-dimensional."""
    w_dim: int
    v1_dim: int
    v2_dim: int

    @property
    def inputs(self) -> RegisterShape:
        return RegisterShape((self.w_dim, 2))

    @property
    def outputs(self) -> RegisterShape:
        return RegisterShape((self.v1_dim, self.v2_dim))

    def check(self, U: ComplexMatrix) -> None:
        expected = (self.outputs.total, self.inputs.total)
        if U.shape != expected:
            raise ShapeMismatchError(f"U has shape {U.shape}, expected {expected} for {self}")


@dataclass(frozen=True)
class HiddenMeasurementInstance:
    """An isometry U: W⊗Q -> V1⊗V2 together with a unit vector w and a projector P."""
    U: ComplexMatrix
    shape: ChannelShape
    w: np.ndarray
    P: QubitProjector

    def __post_init__(self):
        U = np.asarray(self.U, dtype=complex)
        w = np.asarray(self.w, dtype=complex).reshape(-1)
        self.shape.check(U)
        if w.size != self.shape.w_dim:
            raise ShapeMismatchError(f"w has length {w.size}, expected {self.shape.w_dim}")
        tol = get_settings().rank_tol
        check = is_isometry(U, tol)
        if not check.ok:
            raise NotIsometryError(f"U*U - I has Frobenius norm {check.residual:.3e}")
        if abs(np.linalg.norm(w) - 1.0) > tol:
            raise ShapeMismatchError(f"w must be a unit vector, has norm {np.linalg.norm(w):.12g}")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "w", w)

    def conjugated(self, u: ComplexMatrix) -> "HiddenMeasurementInstance":
        """Change basis on Q: U -> U(I_W ⊗ u*), P -> uPu*."""
        u = np.asarray(u, dtype=complex)
        U = self.U @ np.kron(np.eye(self.shape.w_dim), dagger(u))
        return HiddenMeasurementInstance(U=U, shape=self.shape, w=self.w, P=self.P.conjugated(u))


@dataclass(frozen=True)
class RSPair:
    """R = Mat(U(w ⊗ e1)) and S = Mat(U(w ⊗ e2)), maps V2 -> V1."""
    R: ComplexMatrix
    S: ComplexMatrix

    def combine(self, a: complex, b: complex) -> ComplexMatrix:
        return a * self.R + b * self.S

    def gram(self) -> Dict[str, complex]:
        return {
            "RR": frobenius_inner(self.R, self.R),
            "SS": frobenius_inner(self.S, self.S),
            "RS": frobenius_inner(self.R, self.S),
        }


class Marginals(NamedTuple):
    """Reduced states of Phi(P) and Phi(I - P) on each output register."""
    v1_p: ComplexMatrix
    v2_p: ComplexMatrix
    v1_comp: ComplexMatrix
    v2_comp: ComplexMatrix


def rs_pair(U: ComplexMatrix, shape: ChannelShape, w) -> RSPair:
    U = np.asarray(U, dtype=complex)
    shape.check(U)
    w = np.asarray(w, dtype=complex).reshape(-1)
    if w.size != shape.w_dim:
        raise ShapeMismatchError(f"w has length {w.size}, expected {shape.w_dim}")
    # column index of w_i ⊗ e_q is 2*i + q
    R = mat_of_vector(U[:, 0::2] @ w, shape.outputs)
    S = mat_of_vector(U[:, 1::2] @ w, shape.outputs)
    return RSPair(R=R, S=S)


def _gram_marginals(pair: RSPair, P: QubitProjector) -> Tuple[ComplexMatrix, ComplexMatrix]:
    R, S = pair.R, pair.S
    p, q, r = P.p, P.q, P.r
    on_v1 = p * R @ dagger(R) + q * R @ dagger(S) + np.conj(q) * S @ dagger(R) + r * S @ dagger(S)
    # Tracing out V1 leaves the transpose of the Gram form, with q and conj(q) exchanged.
    on_v2 = (p * dagger(R) @ R + np.conj(q) * dagger(R) @ S + q * dagger(S) @ R + r * dagger(S) @ S).T
    return on_v1, on_v2


def marginals(instance: HiddenMeasurementInstance) -> Marginals:
    pair = rs_pair(instance.U, instance.shape, instance.w)
    v1_p, v2_p = _gram_marginals(pair, instance.P)
    v1_comp, v2_comp = _gram_marginals(pair, instance.P.complement())
    return Marginals(v1_p=v1_p, v2_p=v2_p, v1_comp=v1_comp, v2_comp=v2_comp)


def _normalized(rho: ComplexMatrix) -> ComplexMatrix:
    tr = np.trace(rho).real
    if tr <= 0:
        raise QpvError(f"marginal has non-positive trace {tr:.3e}")
    return rho / tr


def check_definition1(instance: HiddenMeasurementInstance, tol: float = None) -> HmcVerdict:
    """Perfect distinguishability measured as half trace distance 1 on each side."""
    tol = get_settings().verdict_tol if tol is None else tol
    m = marginals(instance)
    dists = []
    overlaps = []
    for rho, chi in ((m.v1_p, m.v1_comp), (m.v2_p, m.v2_comp)):
        rho, chi = _normalized(rho), _normalized(chi)
        dists.append(0.5 * trace_norm(rho - chi))
        overlaps.append(float(np.linalg.norm(support_projector(rho) @ support_projector(chi))))
    is_hidden = min(dists) > 1 - tol
    logger.debug(f"definition1: dists={dists} support overlaps={overlaps}")
    return HmcVerdict(
        is_hidden=is_hidden,
        dist_v1=dists[0],
        dist_v2=dists[1],
        criterion="definition1",
        diagnostics={"support_overlap_v1": overlaps[0], "support_overlap_v2": overlaps[1]},
    )


def xy_residuals(pair: RSPair, P: QubitProjector) -> Tuple[float, float]:
    """Frobenius norms of (xR + yS)(-conj(y)R + conj(x)S)* and of (xR + yS)*(-conj(y)R + conj(x)S)."""
    x, y = P.statevec
    M = pair.combine(x, y)
    M_perp = pair.combine(-np.conj(y), np.conj(x))
    return (
        float(np.linalg.norm(M @ dagger(M_perp))),
        float(np.linalg.norm(dagger(M) @ M_perp)),
    )


def check_xy_equations(instance: HiddenMeasurementInstance, tol: float = None) -> HmcVerdict:
    tol = get_settings().verdict_tol if tol is None else tol
    pair = rs_pair(instance.U, instance.shape, instance.w)
    r1, r2 = xy_residuals(pair, instance.P)
    return HmcVerdict(
        is_hidden=max(r1, r2) < tol,
        residual_v1=r1,
        residual_v2=r2,
        criterion="xy_equations",
    )


def block_residual_matrices(pair: RSPair, P: ComplexMatrix) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Projected Gram blocks whose vanishing characterises a hidden measurement.

    The V1 Gram matrix [[RR*, RS*], [SR*, SS*]] is indexed by input basis
    vectors on the left, so P enters it transposed; the V2 Gram matrix
    [[R*R, R*S], [S*R, S*S]] takes P as is. ``P`` may be any 2x2 matrix, which
    lets the Lambda system be evaluated at unnormalised Bloch vectors.
    """
    R, S = pair.R, pair.S
    v1, v2 = R.shape
    K = np.vstack([R, S])
    L = np.hstack([R, S])
    gram_v1 = K @ dagger(K)
    gram_v2 = dagger(L) @ L
    Pt = P.T
    eye1, eye2 = np.eye(v1), np.eye(v2)
    block_v1 = np.kron(Pt, eye1) @ gram_v1 @ np.kron(I2 - Pt, eye1)
    block_v2 = np.kron(P, eye2) @ gram_v2 @ np.kron(I2 - P, eye2)
    return block_v1, block_v2


def check_block_equations(instance: HiddenMeasurementInstance, tol: float = None) -> HmcVerdict:
    tol = get_settings().verdict_tol if tol is None else tol
    pair = rs_pair(instance.U, instance.shape, instance.w)
    b1, b2 = block_residual_matrices(pair, instance.P.matrix)
    r1, r2 = float(np.linalg.norm(b1)), float(np.linalg.norm(b2))
    return HmcVerdict(
        is_hidden=max(r1, r2) < tol,
        residual_v1=r1,
        residual_v2=r2,
        criterion="block_equations",
    )


def check_all(instance: HiddenMeasurementInstance, tol: float = None) -> Dict[str, HmcVerdict]:
    """Run the three criteria; warn when they disagree."""
    verdicts = {
        "definition1": check_definition1(instance, tol),
        "xy_equations": check_xy_equations(instance, tol),
        "block_equations": check_block_equations(instance, tol),
    }
    if len({v.is_hidden for v in verdicts.values()}) > 1:
        logger.warning(
            "Hidden-measurement criteria disagree: "
            + ", ".join(f"{k}={v.is_hidden}" for k, v in verdicts.items())
        )
    return verdicts


def lambda_residual_vector(U: ComplexMatrix, shape: ChannelShape, c, w) -> np.ndarray:
    """Real residual vector of the Lambda system at (c, w); its squared norm is ``lambda_residual``."""
    c = np.asarray(c, dtype=float).reshape(-1)
    w = np.asarray(w, dtype=complex).reshape(-1)
    pair = rs_pair(U, shape, w)
    b1, b2 = block_residual_matrices(pair, pauli_combination(c))
    flat = np.concatenate([b1.reshape(-1), b2.reshape(-1)])
    norms = np.array([c @ c - 1.0, np.vdot(w, w).real - 1.0])
    return np.concatenate([flat.real, flat.imag, norms])


def lambda_residual(U: ComplexMatrix, shape: ChannelShape, c, w) -> float:
    """Sum of squared residuals of the Lambda system; zero exactly on Lambda."""
    r = lambda_residual_vector(U, shape, c, w)
    return float(r @ r)


def lemma1_bound(theta: float) -> float:
    """Lower bound sqrt(2 - 4/(sin t + 2 cos t)) on ||v - w||, clamped at zero.

    Positive on (0, 2 arctan(1/2)) with its peak at arctan(1/2).
    """
    theta = float(theta)
    if not (-1e-12 <= theta <= np.pi / 2 + 1e-12):
        raise QpvError(f"theta must lie in [0, pi/2], got {theta}")
    raw = 2.0 - 4.0 / (np.sin(theta) + 2.0 * np.cos(theta))
    return float(np.sqrt(max(0.0, raw)))


def component_bound(n: int) -> int:
    """4 * 7^(2n + 2), the ceiling on distinct P for dim W = n."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise TypeError(f"n must be an integer, got {type(n).__name__}")
    if n < 0:
        raise QpvError(f"n must be nonnegative, got {n}")
    return 4 * 7 ** (2 * int(n) + 2)


def copy_isometry(basis: QubitProjector = Z_PLUS) -> ComplexMatrix:
    """U(b_k) = e_k ⊗ e_k for the basis b_0 = v_P, b_1 = v_{I-P}; W is trivial, V1 = V2 = C^2."""
    U = np.zeros((4, 2), dtype=complex)
    U[0, :] = basis.statevec.conj()
    U[3, :] = basis.orthogonal_statevec.conj()
    return U


def load_instance(data: Dict[str, Any]) -> HiddenMeasurementInstance:
    """Build an instance from the parsed JSON instance format."""
    spec = parse_model(InstanceFile, data)
    shape = ChannelShape(spec.w_dim, spec.v1_dim, spec.v2_dim)
    U = matrix_from_literal(spec.U)
    w = vector_from_literal(spec.w)
    try:
        shape.check(U)
    except ShapeMismatchError as e:
        raise InputFormatError("U", str(e), e) from e
    if w.size != spec.w_dim:
        raise InputFormatError("w", f"has {w.size} entries, expected w_dim = {spec.w_dim}")
    try:
        return HiddenMeasurementInstance(U=U, shape=shape, w=w, P=parse_projector(spec.P))
    except NotIsometryError as e:
        raise InputFormatError("U", str(e), e) from e
    except ShapeMismatchError as e:
        raise InputFormatError("w", str(e), e) from e


def dump_instance(instance: HiddenMeasurementInstance) -> Dict[str, Any]:
    return {
        "U": matrix_to_literal(instance.U),
        "w_dim": instance.shape.w_dim,
        "v1_dim": instance.shape.v1_dim,
        "v2_dim": instance.shape.v2_dim,
        "w": vector_to_literal(instance.w),
        "P": format_projector(instance.P),
    }
