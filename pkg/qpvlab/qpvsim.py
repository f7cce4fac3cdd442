"""Single-qubit measurement protocol on a one-dimensional timeline.

Verifier V0 sits at x = -d and sends the basis P to the right; verifier V1 sits
at x = d and sends a qubit prepared in P (z = 0) or I - P (z = 1) to the left.
An honest prover at x = 0 measures {P, I - P} and broadcasts the outcome.

Two colluding adversaries, Alice at x = -h and Bob at x = h, share a state psi
on A⊗B. Alice applies U_P: A -> A⊗C on receiving P, Bob applies V: B⊗Q -> B⊗D
on receiving the qubit, they swap C and D, and each decodes a guess for z. All
measurements are deferred into isometries, so the global state stays pure.

Internal register order is A⊗C⊗B⊗D. Final states are returned as matrices K
with rows indexing Alice's A⊗D and columns Bob's B⊗C, i.e. the joint vector
reshaped across the (AD | BC) cut.
"""

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from qpvlab.bloch import QubitProjector, X_PLUS, Z_PLUS, format_projector, parse_projector, trace_distance
from qpvlab.config import get_settings
from qpvlab.errors import (
    InputFormatError,
    MissingBasisError,
    MissingDecodersError,
    NotIsometryError,
    QpvError,
    ShapeMismatchError,
)
from qpvlab.hmc import ChannelShape, HiddenMeasurementInstance
from qpvlab.logging_config import logger
from qpvlab.matkernel import (
    ComplexMatrix,
    RegisterShape,
    dagger,
    is_isometry,
    permute_factors,
    positive_part_projector,
    tensor,
    trace_norm,
)
from qpvlab.models import (
    BasisAssessment,
    CheatAssessment,
    ProtocolConfig,
    RunEvent,
    RunReport,
    StrategyFile,
)
from qpvlab.utils import matrix_from_literal, matrix_to_literal, parse_model, vector_from_literal, vector_to_literal

_SAME_BASIS_TOL = 1e-9
_STRATEGY_TOL = 1e-10
_CONVERGED = 1e-12

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_PAULIS = (
    np.eye(2, dtype=complex),                          # k = 0: I
    np.array([[1, 0], [0, -1]], dtype=complex),        # k = 1: Z
    np.array([[0, 1], [1, 0]], dtype=complex),         # k = 2: X
    np.array([[0, -1], [1, 0]], dtype=complex),        # k = 3: XZ
)


class Decoders(NamedTuple):
    """Two-outcome measurements: ``alice`` on A⊗D, ``bob`` on B⊗C, outcome z at index z."""
    alice: Tuple[ComplexMatrix, ComplexMatrix]
    bob: Tuple[ComplexMatrix, ComplexMatrix]


class DecoderOptimum(NamedTuple):
    decoders: Decoders
    probability: float
    history: List[float]


def _check_povm(elements: Sequence[ComplexMatrix], dim: int, who: str) -> Tuple[ComplexMatrix, ComplexMatrix]:
    if len(elements) != 2:
        raise ShapeMismatchError(f"{who} decoder needs 2 elements, got {len(elements)}")
    elements = tuple(np.asarray(e, dtype=complex) for e in elements)
    for e in elements:
        if e.shape != (dim, dim):
            raise ShapeMismatchError(f"{who} decoder element has shape {e.shape}, expected {(dim, dim)}")
        if np.max(np.abs(e - dagger(e))) > _STRATEGY_TOL:
            raise QpvError(f"{who} decoder element is not Hermitian")
        if np.linalg.eigvalsh((e + dagger(e)) / 2)[0] < -_STRATEGY_TOL:
            raise QpvError(f"{who} decoder element is not positive semidefinite")
    if np.max(np.abs(elements[0] + elements[1] - np.eye(dim))) > _STRATEGY_TOL:
        raise QpvError(f"{who} decoder elements do not sum to the identity")
    return elements


@dataclass(frozen=True)
class CheatingStrategy:
    """Shared state psi on A⊗B, isometries U_P for each basis, Bob's V, optional decoders.

    ``U_family`` and ``decoders`` are sequences of ``(projector, value)`` pairs;
    lookups match projectors within trace distance 1e-9.
    """
    dims: Tuple[int, int, int, int]
    psi: np.ndarray
    U_family: Tuple[Tuple[QubitProjector, ComplexMatrix], ...]
    V: ComplexMatrix
    decoders: Tuple[Tuple[QubitProjector, Decoders], ...] = field(default=())

    def __post_init__(self):
        dA, dB, dC, dD = RegisterShape(self.dims).dims
        object.__setattr__(self, "dims", (dA, dB, dC, dD))
        psi = np.asarray(self.psi, dtype=complex).reshape(-1)
        if psi.size != dA * dB:
            raise ShapeMismatchError(f"psi has length {psi.size}, expected dimA*dimB = {dA * dB}")
        if abs(np.linalg.norm(psi) - 1.0) > _STRATEGY_TOL:
            raise ShapeMismatchError(f"psi must be a unit vector, has norm {np.linalg.norm(psi):.12g}")
        object.__setattr__(self, "psi", psi)

        family = []
        for P, U in self.U_family:
            U = np.asarray(U, dtype=complex)
            if U.shape != (dA * dC, dA):
                raise ShapeMismatchError(f"U for {P} has shape {U.shape}, expected {(dA * dC, dA)}")
            check = is_isometry(U, _STRATEGY_TOL)
            if not check.ok:
                raise NotIsometryError(f"U for {P} is not an isometry (residual {check.residual:.3e})")
            family.append((P, U))
        object.__setattr__(self, "U_family", tuple(family))

        V = np.asarray(self.V, dtype=complex)
        if V.shape != (dB * dD, dB * 2):
            raise ShapeMismatchError(f"V has shape {V.shape}, expected {(dB * dD, dB * 2)}")
        check = is_isometry(V, _STRATEGY_TOL)
        if not check.ok:
            raise NotIsometryError(f"V is not an isometry (residual {check.residual:.3e})")
        object.__setattr__(self, "V", V)

        decoders = []
        for P, dec in self.decoders:
            decoders.append((P, Decoders(
                alice=_check_povm(dec.alice, dA * dD, "alice"),
                bob=_check_povm(dec.bob, dB * dC, "bob"),
            )))
        object.__setattr__(self, "decoders", tuple(decoders))

    @property
    def cut(self) -> RegisterShape:
        """(A⊗D, B⊗C)."""
        dA, dB, dC, dD = self.dims
        return RegisterShape((dA * dD, dB * dC))

    def isometry_for(self, P: QubitProjector) -> ComplexMatrix:
        for L, U in self.U_family:
            if trace_distance(P, L) <= _SAME_BASIS_TOL:
                return U
        raise MissingBasisError(f"strategy defines no U_P for {format_projector(P)}")

    def decoders_for(self, P: QubitProjector) -> Optional[Decoders]:
        for L, dec in self.decoders:
            if trace_distance(P, L) <= _SAME_BASIS_TOL:
                return dec
        return None


def qubit_state(P: QubitProjector, z: int) -> np.ndarray:
    """The qubit V1 sends: the range of P for z = 0, of I - P for z = 1."""
    if z not in (0, 1):
        raise QpvError(f"z must be 0 or 1, got {z!r}")
    return P.statevec if z == 0 else P.orthogonal_statevec


def final_state(strategy: CheatingStrategy, P: QubitProjector, z: int) -> ComplexMatrix:
    """Joint state after U_P and V, as the (A⊗D) x (B⊗C) matrix K."""
    dA, dB, dC, dD = strategy.dims
    U_P = strategy.isometry_for(P)
    # A⊗C x B after Alice
    after_alice = U_P @ strategy.psi.reshape(dA, dB)
    joined = np.kron(after_alice, qubit_state(P, z).reshape(1, 2))
    after_bob = joined @ strategy.V.T
    # A⊗C⊗B⊗D -> A⊗D⊗B⊗C
    K = permute_factors(after_bob, (dA, dC, dB, dD), (0, 3, 2, 1)).reshape(dA * dD, dB * dC)
    norm = np.linalg.norm(K)
    if abs(norm - 1.0) > _STRATEGY_TOL:
        logger.warning(f"final state norm drifted to {norm:.15g}")
    return K


def final_states(strategy: CheatingStrategy, P: QubitProjector) -> Tuple[ComplexMatrix, ComplexMatrix]:
    return final_state(strategy, P, 0), final_state(strategy, P, 1)


def side_marginals(K: ComplexMatrix) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """(rho_AD, rho_BC) of the pure state with matrix K."""
    return K @ dagger(K), K.T @ K.conj()


def _joint_probability(K: ComplexMatrix, M: ComplexMatrix, N: ComplexMatrix) -> float:
    return float(np.vdot(K, M @ K @ N.T).real)


def _probability_from_states(states, decoders: Decoders, prior: float) -> float:
    weights = (prior, 1.0 - prior)
    total = sum(
        w * _joint_probability(K, decoders.alice[z], decoders.bob[z])
        for z, (w, K) in enumerate(zip(weights, states))
    )
    return float(np.clip(total, 0.0, 1.0))


def acceptance_probability(
    config: ProtocolConfig,
    strategy: CheatingStrategy,
    P: QubitProjector,
    decoders: Optional[Decoders] = None,
) -> float:
    """Probability that z, z1 and z2 agree, with z drawn from ``config.z_prior``.

    Decoders default to those shipped with the strategy.

    Raises:
        MissingDecodersError: if neither the caller nor the strategy supplies decoders
    """
    decoders = decoders or strategy.decoders_for(P)
    if decoders is None:
        raise MissingDecodersError(
            f"no decoders for {format_projector(P)}; pass them or use optimize_decoders"
        )
    dA, dB, dC, dD = strategy.dims
    decoders = Decoders(
        alice=_check_povm(decoders.alice, dA * dD, "alice"),
        bob=_check_povm(decoders.bob, dB * dC, "bob"),
    )
    return _probability_from_states(final_states(strategy, P), decoders, config.z_prior)


def _as_states(sigma, shape: RegisterShape):
    """Return ('pure', K) or ('mixed', rho as a 4-index tensor)."""
    arr = np.asarray(sigma, dtype=complex)
    n_ad, n_bc = shape.dims
    total = shape.total
    if arr.ndim == 2 and arr.shape == (total, total) and total > 1:
        return "mixed", arr.reshape(n_ad, n_bc, n_ad, n_bc)
    if arr.size == total:
        return "pure", arr.reshape(n_ad, n_bc)
    raise ShapeMismatchError(f"state of shape {arr.shape} does not match cut {shape.dims}")


def _alice_operator(kind: str, s, N: ComplexMatrix) -> ComplexMatrix:
    if kind == "pure":
        return s @ N.T @ dagger(s)
    return np.einsum("xbyc,cb->xy", s, N)


def _bob_operator(kind: str, s, M: ComplexMatrix) -> ComplexMatrix:
    if kind == "pure":
        return (dagger(s) @ M @ s).T
    return np.einsum("pbqc,qp->bc", s, M)


def _objective(kinds, states, M0, N0, weights) -> float:
    n_ad, n_bc = M0.shape[0], N0.shape[0]
    M = (M0, np.eye(n_ad) - M0)
    N = (N0, np.eye(n_bc) - N0)
    total = 0.0
    for z in (0, 1):
        A = _alice_operator(kinds[z], states[z], N[z])
        total += weights[z] * float(np.trace(M[z] @ A).real)
    return total


def optimize_decoders(sigma0, sigma1, shape: RegisterShape, rounds: int = 20, prior: float = 0.5) -> DecoderOptimum:
    """Seesaw maximisation of sum_z prior_z Tr[(M_z ⊗ N_z) sigma_z].

    ``sigma0``/``sigma1`` are either pure states (vectors of A⊗D⊗B⊗C, or the
    matrices K) or density operators on A⊗D⊗B⊗C. Bob starts from the Helstrom
    measurement of his marginals; each half-round replaces one side by the
    projector onto the positive part of its effective operator difference.
    ``history`` holds the best value seen after each round, and the returned
    decoders are the ones that achieved it.
    """
    kinds, states = zip(*(_as_states(s, shape) for s in (sigma0, sigma1)))
    weights = (prior, 1.0 - prior)
    n_ad, n_bc = shape.dims
    eye_ad, eye_bc = np.eye(n_ad), np.eye(n_bc)

    bob_marginals = [_bob_operator(k, s, eye_ad) for k, s in zip(kinds, states)]
    N0 = positive_part_projector(weights[0] * bob_marginals[0] - weights[1] * bob_marginals[1])
    M0 = eye_ad.astype(complex)

    history: List[float] = []
    best: Optional[Tuple[float, ComplexMatrix, ComplexMatrix]] = None
    for _ in range(max(1, rounds)):
        A = [w * _alice_operator(k, s, N) for w, k, s, N in zip(weights, kinds, states, (N0, eye_bc - N0))]
        M0 = positive_part_projector(A[0] - A[1])
        B = [w * _bob_operator(k, s, M) for w, k, s, M in zip(weights, kinds, states, (M0, eye_ad - M0))]
        N0 = positive_part_projector(B[0] - B[1])
        value = float(np.clip(_objective(kinds, states, M0, N0, weights), 0.0, 1.0))
        if best is None or value > best[0]:
            best = (value, M0, N0)
        history.append(best[0])
        if len(history) > 1 and history[-1] - history[-2] < _CONVERGED:
            break

    value, M0, N0 = best
    decoders = Decoders(alice=(M0, eye_ad - M0), bob=(N0, eye_bc - N0))
    return DecoderOptimum(decoders=decoders, probability=value, history=history)


def assess_strategy(config: ProtocolConfig, strategy: CheatingStrategy, tol: Optional[float] = None) -> CheatAssessment:
    """Per-basis distinguishability on each side and the best acceptance probability.

    Shipped decoders are used when the strategy has them for a basis; otherwise
    the seesaw optimum is reported.
    """
    tol = get_settings().verdict_tol if tol is None else tol
    per_P = []
    perfect = True
    for P in config.projectors():
        states = final_states(strategy, P)
        (ad0, bc0), (ad1, bc1) = side_marginals(states[0]), side_marginals(states[1])
        dist_ad = 0.5 * trace_norm(ad0 - ad1)
        dist_bc = 0.5 * trace_norm(bc0 - bc1)
        decoders = strategy.decoders_for(P)
        if decoders is not None:
            probability = _probability_from_states(states, decoders, config.z_prior)
        else:
            probability = optimize_decoders(states[0], states[1], strategy.cut, prior=config.z_prior).probability
        perfect = perfect and dist_ad > 1 - tol and dist_bc > 1 - tol
        per_P.append(BasisAssessment(
            basis=format_projector(P),
            acceptance_probability=float(np.clip(probability, 0.0, 1.0)),
            dist_AD=float(min(dist_ad, 1.0)),
            dist_BC=float(min(dist_bc, 1.0)),
        ))
        logger.debug(f"{format_projector(P)}: dist_AD={dist_ad:.12f} dist_BC={dist_bc:.12f} p={probability:.12f}")
    return CheatAssessment(per_P=per_P, is_perfect=perfect)


def attack_channel(strategy: CheatingStrategy) -> Tuple[ComplexMatrix, ChannelShape]:
    """Isometry W⊗Q -> (A⊗D)⊗(B⊗C) with W = A⊗C⊗B, i.e. (I_AC ⊗ V) followed by the cut permutation."""
    dA, dB, dC, dD = strategy.dims
    w_dim = dA * dC * dB
    lifted = tensor(np.eye(dA * dC), strategy.V)
    U = lifted.reshape(dA, dC, dB, dD, w_dim * 2).transpose(0, 3, 2, 1, 4).reshape(dA * dD * dB * dC, w_dim * 2)
    return U, ChannelShape(w_dim=w_dim, v1_dim=dA * dD, v2_dim=dB * dC)


def strategy_channel(strategy: CheatingStrategy, P: QubitProjector) -> HiddenMeasurementInstance:
    """The channel rho -> V(psi_P ⊗ rho)V* with psi_P = (U_P ⊗ I_B) psi, as a hidden-measurement instance."""
    dA, dB, dC, dD = strategy.dims
    U, shape = attack_channel(strategy)
    psi_P = (strategy.isometry_for(P) @ strategy.psi.reshape(dA, dB)).reshape(-1)
    return HiddenMeasurementInstance(U=U, shape=shape, w=psi_P, P=P)


# Built-in strategies


def _flip(P: QubitProjector, k: int) -> int:
    """Outcome flip caused by the Pauli X^(k>>1) Z^(k&1) when measuring in basis P (Z or X)."""
    return (k >> 1) if trace_distance(P, Z_PLUS) <= _SAME_BASIS_TOL else (k & 1)


def bb84_attack() -> CheatingStrategy:
    """Teleportation attack for T = {Z, X eigenstates} sharing one EPR pair.

    A = (a0, aa), B = (b0, bx), C = (label, bit), D = Bell outcome; all 4-dimensional.
    Bob performs a deferred Bell measurement of b0 and the qubit, keeps the
    outcome k in B and sends a copy in D. Alice rotates a0 into the computational
    basis of P, copies the outcome into C. Each side then undoes the Pauli
    correction k on the other's outcome.
    """
    dA = dB = dC = dD = 4
    psi = np.zeros(dA * dB, dtype=complex)
    for a0 in (0, 1):
        # (a0, aa=0) x (b0=a0, bx=0)
        psi[(a0 * 2) * dB + a0 * 2] = 1 / np.sqrt(2)

    V = np.zeros((dB * dD, dB * 2), dtype=complex)
    for k, sigma in enumerate(_PAULIS):
        for b0, bx, q in itertools.product((0, 1), repeat=3):
            V[k * dD + (k ^ bx), (b0 * 2 + bx) * 2 + q] = np.conj(sigma[q, b0]) / np.sqrt(2)

    family = []
    decoders = []
    for label, (P, rotation) in enumerate(((Z_PLUS, np.eye(2)), (X_PLUS, _HADAMARD))):
        U = np.zeros((dA * dC, dA), dtype=complex)
        for a0, aa, a in itertools.product((0, 1), repeat=3):
            row = (a * 2 + aa) * dC + (label * 2 + (a ^ aa))
            U[row, a0 * 2 + aa] = rotation[a, a0]
        family.append((P, U))

        alice0 = np.zeros(dA * dD)
        for a0, aa, d in itertools.product((0, 1), (0, 1), range(dD)):
            if a0 ^ _flip(P, d) == 0:
                alice0[(a0 * 2 + aa) * dD + d] = 1
        bob0 = np.zeros(dB * dC)
        for kb, lab, ca in itertools.product(range(dB), (0, 1), (0, 1)):
            if ca ^ _flip(P, kb) == 0:
                bob0[kb * dC + lab * 2 + ca] = 1
        decoders.append((P, Decoders(
            alice=(np.diag(alice0).astype(complex), np.diag(1 - alice0).astype(complex)),
            bob=(np.diag(bob0).astype(complex), np.diag(1 - bob0).astype(complex)),
        )))

    return CheatingStrategy(dims=(dA, dB, dC, dD), psi=psi, U_family=tuple(family), V=V, decoders=tuple(decoders))


def measure_and_broadcast(P: QubitProjector, dims: Tuple[int, int, int, int] = (2, 2, 2, 2)) -> CheatingStrategy:
    """Classical strategy for a single known basis: Bob measures in P and sends the bit to Alice."""
    dA, dB, dC, dD = RegisterShape(dims).dims
    if dB < 2 or dD < 2:
        raise ShapeMismatchError(f"measure_and_broadcast needs dimB, dimD >= 2, got {dims}")
    psi = np.zeros(dA * dB, dtype=complex)
    psi[0] = 1
    U = np.zeros((dA * dC, dA), dtype=complex)
    for a in range(dA):
        U[a * dC, a] = 1
    basis = (P.statevec, P.orthogonal_statevec)
    V = np.zeros((dB * dD, dB * 2), dtype=complex)
    for b, s in itertools.product(range(dB), (0, 1)):
        # |b>|e_s> -> |(b + s) mod dB>|s>
        V[((b + s) % dB) * dD + s, b * 2:(b + 1) * 2] = basis[s].conj()

    alice0 = np.kron(np.eye(dA), np.diag([1.0] + [0.0] * (dD - 1)))
    bob0 = np.kron(np.diag([1.0] + [0.0] * (dB - 1)), np.eye(dC))
    decoders = Decoders(
        alice=(alice0.astype(complex), np.eye(dA * dD, dtype=complex) - alice0),
        bob=(bob0.astype(complex), np.eye(dB * dC, dtype=complex) - bob0),
    )
    return CheatingStrategy(dims=(dA, dB, dC, dD), psi=psi, U_family=((P, U),), V=V, decoders=((P, decoders),))


def do_nothing_strategy(basis_set: Sequence[QubitProjector]) -> CheatingStrategy:
    """Bob swaps the qubit into B and sends a blank D; Alice learns nothing."""
    V = np.zeros((4, 4), dtype=complex)
    for b, q in itertools.product((0, 1), repeat=2):
        V[q * 2 + b, b * 2 + q] = 1
    identity = np.ones((1, 1), dtype=complex)
    return CheatingStrategy(
        dims=(1, 2, 1, 2),
        psi=np.array([1, 0], dtype=complex),
        U_family=tuple((P, identity) for P in basis_set),
        V=V,
    )


# Timeline


class _Timeline:
    """Events ordered by (time, insertion order)."""

    def __init__(self, c_light: float):
        self.c_light = c_light
        self._heap: List[Tuple[float, int, RunEvent]] = []
        self._counter = itertools.count()

    def add(self, time: float, position: float, actor: str, action: str, message: Optional[str] = None):
        event = RunEvent(time=time, position=position, actor=actor, action=action, message=message)
        heapq.heappush(self._heap, (time, next(self._counter), event))

    def send(self, message: str, t: float, origin: float, sender: str, target: float, receiver: str):
        """Schedule a send and the light-speed arrival at ``target``."""
        self.add(t, origin, sender, "send", message)
        self.add(t + abs(target - origin) / self.c_light, target, receiver, "receive", message)

    def events(self) -> List[RunEvent]:
        return [e for _, _, e in sorted(self._heap)]


def check_causality(events: Sequence[RunEvent], c_light: float, rel_tol: float = 1e-12) -> None:
    """Every received message must have been sent from within the past light cone."""
    sends = {e.message: e for e in events if e.action == "send" and e.message}
    for e in events:
        if e.action != "receive" or not e.message:
            continue
        src = sends.get(e.message)
        if src is None:
            raise QpvError(f"message {e.message!r} received but never sent")
        dt = e.time - src.time
        dx = abs(e.position - src.position)
        if dx > c_light * dt * (1 + rel_tol) + rel_tol:
            raise QpvError(f"message {e.message!r} travels {dx} m in {dt} s, faster than light")


def _born_outcome(rng: np.random.Generator, probabilities: np.ndarray) -> int:
    p = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    return int(rng.choice(len(p), p=p / p.sum()))


def run_honest(config: ProtocolConfig, P: QubitProjector, z: int, seed: int = 0) -> RunReport:
    """Protocol run with an honest prover at x = 0."""
    d, c = config.d, config.c_light
    rng = np.random.default_rng(seed)
    timeline = _Timeline(c)
    timeline.send("basis", 0.0, -d, "V0", 0.0, "prover")
    timeline.send("qubit", 0.0, d, "V1", 0.0, "prover")

    qubit = qubit_state(P, z)
    outcome = _born_outcome(rng, [abs(np.vdot(v, qubit)) ** 2 for v in (P.statevec, P.orthogonal_statevec)])
    timeline.add(d / c, 0.0, "prover", "measure")
    timeline.send("outcome_to_V0", d / c, 0.0, "prover", -d, "V0")
    timeline.send("outcome_to_V1", d / c, 0.0, "prover", d, "V1")

    events = timeline.events()
    check_causality(events, c)
    verdict = "ACCEPT" if z == outcome else "ABORT"
    return RunReport(basis=format_projector(P), events=events, z=z, z1=outcome, z2=outcome, verdict=verdict)


def run_adversarial(
    config: ProtocolConfig,
    strategy: CheatingStrategy,
    P: QubitProjector,
    z: int,
    seed: int = 0,
    decoders: Optional[Decoders] = None,
) -> RunReport:
    """Protocol run against Alice at -h and Bob at h; outputs are sampled from the decoders."""
    d, h, c = config.d, config.h, config.c_light
    decoders = decoders or strategy.decoders_for(P)
    K = final_state(strategy, P, z)
    if decoders is None:
        other = final_state(strategy, P, 1 - z)
        states = (K, other) if z == 0 else (other, K)
        decoders = optimize_decoders(states[0], states[1], strategy.cut, prior=config.z_prior).decoders

    rng = np.random.default_rng(seed)
    timeline = _Timeline(c)
    timeline.send("basis", 0.0, -d, "V0", -h, "alice")
    timeline.send("qubit", 0.0, d, "V1", h, "bob")
    t_act = (d - h) / c
    timeline.add(t_act, -h, "alice", "apply U_P")
    timeline.add(t_act, h, "bob", "apply V")
    timeline.send("C", t_act, -h, "alice", h, "bob")
    timeline.send("D", t_act, h, "bob", -h, "alice")

    joint = [
        _joint_probability(K, decoders.alice[a], decoders.bob[b])
        for a, b in itertools.product((0, 1), repeat=2)
    ]
    z1, z2 = divmod(_born_outcome(rng, joint), 2)
    t_out = (d + h) / c
    timeline.add(t_out, -h, "alice", "decode")
    timeline.add(t_out, h, "bob", "decode")
    timeline.send("z1", t_out, -h, "alice", -d, "V0")
    timeline.send("z2", t_out, h, "bob", d, "V1")

    events = timeline.events()
    check_causality(events, c)
    verdict = "ACCEPT" if z == z1 == z2 else "ABORT"
    return RunReport(basis=format_projector(P), events=events, z=z, z1=z1, z2=z2, verdict=verdict)


# Strategy files


def load_strategy(data: Dict[str, Any]) -> CheatingStrategy:
    spec = parse_model(StrategyFile, data)
    dims = tuple(spec.dims[r] for r in "ABCD")
    family = tuple((parse_projector(k), matrix_from_literal(m)) for k, m in spec.U.items())
    try:
        decoders = tuple(
            (parse_projector(k), Decoders(
                alice=tuple(matrix_from_literal(m) for m in v["alice"]),
                bob=tuple(matrix_from_literal(m) for m in v["bob"]),
            ))
            for k, v in (spec.decoders or {}).items()
        )
        return CheatingStrategy(
            dims=dims,
            psi=vector_from_literal(spec.psi),
            U_family=family,
            V=matrix_from_literal(spec.V),
            decoders=decoders,
        )
    except KeyError as e:
        raise InputFormatError("decoders", f"missing {e}", e) from e
    except QpvError as e:
        raise InputFormatError("strategy", str(e), e) from e


def dump_strategy(strategy: CheatingStrategy) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "dims": dict(zip("ABCD", strategy.dims)),
        "psi": vector_to_literal(strategy.psi),
        "U": {format_projector(P): matrix_to_literal(U) for P, U in strategy.U_family},
        "V": matrix_to_literal(strategy.V),
    }
    if strategy.decoders:
        data["decoders"] = {
            format_projector(P): {
                "alice": [matrix_to_literal(m) for m in dec.alice],
                "bob": [matrix_to_literal(m) for m in dec.bob],
            }
            for P, dec in strategy.decoders
        }
    return data
