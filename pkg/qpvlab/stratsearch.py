"""Numerical search for cheating strategies and for members of Lambda.

Strategies are encoded as flat real vectors: the real and imaginary parts of
psi, then one Hermitian generator per basis for U_P, then one for V. Each
isometry is the leading columns of exp(iH), so every finite parameter vector
decodes to a valid strategy. Restarts are seeded from ``SeedSequence(seed).spawn``
and are therefore reproducible one by one.
"""

import hashlib
import itertools
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space, schur
from scipy.optimize import least_squares

from qpvlab.bloch import QubitProjector, X_PLUS, Z_PLUS, angle, format_projector, from_bloch, trace_distance
from qpvlab.errors import MixedChannelError, QpvError
from qpvlab.hmc import ChannelShape, lambda_residual, lambda_residual_vector, lemma1_bound
from qpvlab.logging_config import logger
from qpvlab.matkernel import ComplexMatrix, RegisterShape, dagger, random_state
from qpvlab.models import Lemma1Entry, Lemma1ScanReport, LambdaPairRecord, RestartTrace, SearchConfig, SearchResult
from qpvlab.qpvsim import CheatingStrategy, bb84_attack, final_states, measure_and_broadcast, optimize_decoders
from qpvlab.utils import vector_to_literal

CERTIFY_TOL = 1e-16
CLUSTER_TOL = 1e-4
VIOLATION_SLACK = 1e-6
PERFECT_TOL = 1e-6

_GROW = 1.5
_SHRINK = 0.85


# Parametrisation


def hermitian_from_params(x: np.ndarray, n: int) -> ComplexMatrix:
    """n x n Hermitian matrix from n^2 reals: the diagonal, then (re, im) of the upper triangle."""
    x = np.asarray(x, dtype=float)
    H = np.diag(x[:n]).astype(complex)
    iu = np.triu_indices(n, 1)
    off = x[n:].reshape(-1, 2)
    H[iu] = off[:, 0] + 1j * off[:, 1]
    H[(iu[1], iu[0])] = off[:, 0] - 1j * off[:, 1]
    return H


def params_from_hermitian(H: ComplexMatrix) -> np.ndarray:
    n = H.shape[0]
    iu = np.triu_indices(n, 1)
    upper = H[iu]
    return np.concatenate([H.diagonal().real, np.column_stack([upper.real, upper.imag]).reshape(-1)])


def isometry_from_generator(H: ComplexMatrix, cols: int) -> ComplexMatrix:
    evals, evecs = np.linalg.eigh(H)
    unitary = evecs @ np.diag(np.exp(1j * evals)) @ dagger(evecs)
    return unitary[:, :cols]


def generator_from_isometry(U: ComplexMatrix) -> ComplexMatrix:
    """A Hermitian H whose exp(iH) has U as its leading columns."""
    U = np.asarray(U, dtype=complex)
    complement = null_space(dagger(U)) if U.shape[1] < U.shape[0] else np.zeros((U.shape[0], 0))
    unitary = np.hstack([U, complement])
    T, Zs = schur(unitary, output="complex")
    phases = np.angle(np.diag(T))
    return Zs @ np.diag(phases) @ dagger(Zs)


@dataclass(frozen=True)
class ParamLayout:
    """Slices of the flat parameter vector for given dims and basis count."""
    dims: Tuple[int, int, int, int]
    n_bases: int

    @property
    def psi_size(self) -> int:
        dA, dB, _, _ = self.dims
        return 2 * dA * dB

    @property
    def u_side(self) -> int:
        dA, _, dC, _ = self.dims
        return dA * dC

    @property
    def v_side(self) -> int:
        _, dB, _, dD = self.dims
        return dB * dD

    @property
    def size(self) -> int:
        return self.psi_size + self.n_bases * self.u_side ** 2 + self.v_side ** 2

    def split(self, params: np.ndarray):
        params = np.asarray(params, dtype=float)
        if params.size != self.size:
            raise QpvError(f"expected {self.size} parameters for {self.dims}, got {params.size}")
        psi = params[:self.psi_size]
        offset = self.psi_size
        gens = []
        for _ in range(self.n_bases):
            gens.append(params[offset:offset + self.u_side ** 2])
            offset += self.u_side ** 2
        return psi, gens, params[offset:]


def decode_params(params, dims, basis_set: Sequence[QubitProjector]) -> CheatingStrategy:
    layout = ParamLayout(tuple(dims), len(basis_set))
    dA, dB, dC, dD = layout.dims
    psi_raw, gens, v_gen = layout.split(params)
    psi = psi_raw[:dA * dB] + 1j * psi_raw[dA * dB:]
    norm = np.linalg.norm(psi)
    if not norm > 1e-12:
        psi = np.zeros(dA * dB, dtype=complex)
        psi[0] = 1
    else:
        psi = psi / norm
    family = tuple(
        (P, isometry_from_generator(hermitian_from_params(g, layout.u_side), dA))
        for P, g in zip(basis_set, gens)
    )
    V = isometry_from_generator(hermitian_from_params(v_gen, layout.v_side), 2 * dB)
    return CheatingStrategy(dims=layout.dims, psi=psi, U_family=family, V=V)


def encode_strategy(strategy: CheatingStrategy, basis_set: Sequence[QubitProjector]) -> np.ndarray:
    """Inverse of ``decode_params`` up to the generator's branch choice."""
    parts = [strategy.psi.real, strategy.psi.imag]
    parts += [params_from_hermitian(generator_from_isometry(strategy.isometry_for(P))) for P in basis_set]
    parts.append(params_from_hermitian(generator_from_isometry(strategy.V)))
    return np.concatenate(parts)


# Strategy search


def per_basis_acceptance(strategy: CheatingStrategy, basis_set: Sequence[QubitProjector], rounds: int) -> Dict[str, float]:
    values = {}
    for P in basis_set:
        s0, s1 = final_states(strategy, P)
        values[format_projector(P)] = optimize_decoders(s0, s1, strategy.cut, rounds=rounds).probability
    return values


def worst_case_acceptance(params, config: SearchConfig, basis_set: Sequence[QubitProjector]) -> float:
    strategy = decode_params(params, config.dims, basis_set)
    return min(per_basis_acceptance(strategy, basis_set, config.decoder_rounds).values())


def _is_subset_of(basis_set, allowed) -> bool:
    return all(any(trace_distance(P, L) <= 1e-9 for L in allowed) for P in basis_set)


def known_starts(config: SearchConfig) -> List[Tuple[str, np.ndarray]]:
    """Built-in strategies that fit ``config`` as (name, params)."""
    basis_set = config.projectors()
    dims = tuple(config.dims)
    starts = []
    if _is_subset_of(basis_set, (Z_PLUS, X_PLUS)) and dims == (4, 4, 4, 4):
        starts.append(("bb84", encode_strategy(bb84_attack(), basis_set)))
    if len(basis_set) == 1 and dims[1] >= 2 and dims[3] >= 2:
        strategy = measure_and_broadcast(basis_set[0], dims)
        starts.append(("measure_and_broadcast", encode_strategy(strategy, basis_set)))
    return starts


def _local_ascent(objective: Callable[[np.ndarray], float], x: np.ndarray, config: SearchConfig, rng) -> Tuple[np.ndarray, float]:
    """(1+1) evolution strategy with multiplicative step adaptation."""
    value = objective(x)
    step = config.initial_step
    for _ in range(config.max_iters):
        if value >= config.target or step < config.min_step:
            break
        candidate = x + step * rng.normal(size=x.size)
        candidate_value = objective(candidate)
        if candidate_value > value:
            x, value = candidate, candidate_value
            step *= _GROW
        else:
            step *= _SHRINK
    return x, value


def search_cheating(
    config: SearchConfig,
    injected: Sequence[np.ndarray] = (),
    on_restart: Optional[Callable[[int, float], None]] = None,
) -> SearchResult:
    """Best worst-case acceptance over ``config.restarts`` seeded local ascents.

    Restart i starts from the i-th injected vector (explicit ``injected`` first,
    then ``known_starts`` when ``config.inject_known``) and from a random point
    otherwise. Restarts stop once one of them reaches ``config.target``.
    """
    basis_set = config.projectors()
    RegisterShape(tuple(config.dims))  # enforces the dimension cap
    layout = ParamLayout(tuple(config.dims), len(basis_set))
    starts = [np.asarray(x, dtype=float) for x in injected]
    if config.inject_known:
        starts += [params for _, params in known_starts(config)]

    def objective(x):
        return worst_case_acceptance(x, config, basis_set)

    children = np.random.SeedSequence(config.seed).spawn(config.restarts)
    trace: List[RestartTrace] = []
    best_x, best_value = None, -np.inf
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        if i < len(starts):
            x0, kind = starts[i], "injected"
        else:
            x0, kind = rng.normal(size=layout.size), "random"
        x, value = _local_ascent(objective, x0, config, rng)
        value = float(min(value, 1.0))
        trace.append(RestartTrace(restart=i, seed=int(child.generate_state(1)[0]), start=kind, value=value))
        logger.debug(f"restart {i} ({kind}) reached {value:.12f}")
        if on_restart is not None:
            on_restart(i, value)
        if value > best_value:
            best_x, best_value = x, value
        if best_value >= config.target:
            logger.info(f"target reached at restart {i}, skipping the remaining restarts")
            break

    strategy = decode_params(best_x, config.dims, basis_set)
    per_basis = per_basis_acceptance(strategy, basis_set, config.decoder_rounds)
    worst = float(np.clip(min(per_basis.values()), 0.0, 1.0))
    logger.info(f"search over {config.restarts} restarts: best worst-case acceptance {worst:.12f}")
    return SearchResult(
        best_params=[float(v) for v in best_x],
        best_worst_case=worst,
        per_basis={k: float(min(v, 1.0)) for k, v in per_basis.items()},
        per_restart_trace=trace,
        certified_perfect=worst >= 1 - PERFECT_TOL,
    )


# Lambda


def channel_digest(U: ComplexMatrix) -> str:
    return hashlib.sha1(np.ascontiguousarray(U, dtype=complex).tobytes()).hexdigest()


@dataclass(frozen=True)
class LambdaPair:
    """A certified zero (c, w) of the Lambda system for the channel with ``channel_digest``."""
    c: np.ndarray
    w: np.ndarray
    residual: float
    channel_digest: str

    @property
    def projector(self) -> QubitProjector:
        return from_bloch(self.c)

    def to_record(self) -> LambdaPairRecord:
        return LambdaPairRecord(
            c=tuple(float(v) for v in self.c),
            w=vector_to_literal(self.w),
            residual=self.residual,
            basis=format_projector(self.projector),
        )


def _split_point(x: np.ndarray, w_dim: int) -> Tuple[np.ndarray, np.ndarray]:
    return x[:3], x[3:3 + w_dim] + 1j * x[3 + w_dim:]


def find_lambda_pairs(
    U: ComplexMatrix,
    shape: ChannelShape,
    attempts: int,
    seed: int = 0,
    initial_points: Sequence[Tuple[Sequence[float], Sequence[complex]]] = (),
) -> List[LambdaPair]:
    """Minimise the Lambda residual from each start and keep the certified zeros.

    ``initial_points`` are polished first; ``attempts`` random starts follow.
    A point is kept only if, after normalising c and w, its residual
    re-evaluates below 1e-16.
    """
    U = np.asarray(U, dtype=complex)
    shape.check(U)
    digest = channel_digest(U)
    rng = np.random.default_rng(seed)
    n = shape.w_dim

    starts = [
        np.concatenate([np.asarray(c, dtype=float), np.asarray(w, dtype=complex).real, np.asarray(w, dtype=complex).imag])
        for c, w in initial_points
    ]
    for _ in range(attempts):
        c = rng.normal(size=3)
        w = random_state(n, rng)
        starts.append(np.concatenate([c / np.linalg.norm(c), w.real, w.imag]))

    def residuals(x):
        c, w = _split_point(x, n)
        return lambda_residual_vector(U, shape, c, w)

    pairs = []
    for x0 in starts:
        m = residuals(x0).size
        method = "lm" if m >= x0.size else "trf"
        fit = least_squares(residuals, x0, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        c, w = _split_point(fit.x, n)
        if not (np.linalg.norm(c) > 0 and np.linalg.norm(w) > 0):
            continue
        c, w = c / np.linalg.norm(c), w / np.linalg.norm(w)
        residual = lambda_residual(U, shape, c, w)
        if residual < CERTIFY_TOL:
            pairs.append(LambdaPair(c=c, w=w, residual=residual, channel_digest=digest))
    logger.info(f"certified {len(pairs)} of {len(starts)} Lambda candidates")
    return pairs


def lemma1_scan(pairs: Sequence[LambdaPair]) -> Lemma1ScanReport:
    """Compare ||v - w|| with the angle bound for every unordered pair of certified points."""
    if len({p.channel_digest for p in pairs}) > 1:
        raise MixedChannelError("Lambda pairs come from different channels")
    entries = []
    for (i, a), (j, b) in itertools.combinations(enumerate(pairs), 2):
        theta = angle(a.projector, b.projector)
        distance = float(np.linalg.norm(a.w - b.w))
        bound = lemma1_bound(min(theta, np.pi / 2))
        entries.append(Lemma1Entry(
            i=i,
            j=j,
            theta=theta,
            distance=distance,
            bound=bound,
            margin=distance - bound,
            violation=distance < bound - VIOLATION_SLACK,
        ))
    violations = sum(e.violation for e in entries)
    if violations:
        logger.warning(f"{violations} pair(s) fall below the angle bound")
    return Lemma1ScanReport(
        entries=entries,
        violations=violations,
        min_margin=min((e.margin for e in entries), default=None),
    )


def distinct_basis_census(pairs: Sequence[LambdaPair], cluster_tol: float = CLUSTER_TOL) -> int:
    """Number of distinct projectors among the pairs, clustered greedily by trace distance."""
    representatives: List[QubitProjector] = []
    for pair in pairs:
        P = pair.projector
        if not any(trace_distance(P, R) < cluster_tol for R in representatives):
            representatives.append(P)
    return len(representatives)
