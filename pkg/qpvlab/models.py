"""Data models for qpvlab input files and reports."""

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, PositiveInt, field_validator, model_validator

from qpvlab.bloch import parse_projector, trace_distance

SCHEMA_VERSION = "1"

ComplexPair = Tuple[float, float]


class MatrixLiteral(BaseModel):
    """Dense complex matrix in row-major order.

    Attributes:
        rows: Number of rows
        cols: Number of columns
        entries: ``[re, im]`` pairs, ``rows * cols`` of them
    """
    rows: PositiveInt
    cols: PositiveInt
    entries: List[ComplexPair]

    @model_validator(mode="after")
    def _entries_match_dims(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"entries has {len(self.entries)} items, expected rows*cols = {self.rows * self.cols}"
            )
        return self


class InstanceFile(BaseModel):
    """Hidden-measurement instance file: isometry U, register dims, vector w and projector P."""
    U: MatrixLiteral
    w_dim: PositiveInt
    v1_dim: PositiveInt
    v2_dim: PositiveInt
    w: List[ComplexPair]
    P: str = Field(..., description="Projector syntax, 'bloch:c1,c2,c3' or 'vec:...'")

    @field_validator("P")
    @classmethod
    def _projector_parses(cls, v: str) -> str:
        parse_projector(v)
        return v


class HmcVerdict(BaseModel):
    """Outcome of one hidden-measurement criterion.

    Quantities a criterion does not compute are left as ``None``.
    """
    is_hidden: bool
    residual_v1: Optional[float] = None
    residual_v2: Optional[float] = None
    dist_v1: Optional[float] = None
    dist_v2: Optional[float] = None
    criterion: Literal["definition1", "xy_equations", "block_equations"]
    diagnostics: Dict[str, float] = Field(default_factory=dict)


class ProtocolConfig(BaseModel):
    """Geometry of a protocol run and the basis set T the verifiers draw from.

    Attributes:
        d: Verifier half-distance in meters
        h: Adversary half-distance in meters, 0 < h < d
        c_light: Signal speed in meters per second
        basis_set: Projector syntax strings, pairwise distinct
        z_prior: Probability that the verifiers pick z = 0
    """
    d: float = Field(1.0, gt=0)
    h: float = Field(0.5, gt=0)
    c_light: float = Field(1.0, gt=0)
    basis_set: List[str] = Field(default_factory=lambda: ["bloch:0,0,1", "bloch:1,0,0"])
    z_prior: float = Field(0.5, ge=0, le=1)

    @field_validator("basis_set")
    @classmethod
    def _distinct_projectors(cls, v: List[str]) -> List[str]:
        if not v:
            raise ValueError("basis_set must not be empty")
        projectors = [parse_projector(s) for s in v]
        for i in range(len(projectors)):
            for j in range(i):
                if trace_distance(projectors[i], projectors[j]) <= 1e-9:
                    raise ValueError(f"basis_set entries {v[j]!r} and {v[i]!r} coincide")
        return v

    @model_validator(mode="after")
    def _adversaries_inside(self):
        if not self.h < self.d:
            raise ValueError(f"adversary half-distance h={self.h} must be below d={self.d}")
        return self

    def projectors(self):
        return [parse_projector(s) for s in self.basis_set]


class SimulationConfig(ProtocolConfig):
    """Protocol geometry plus what ``simulate`` needs to repeat a batch of runs.

    Attributes:
        runs: Number of protocol runs
        adversary: ``honest``, ``bb84`` or the path of a strategy file
        seed: Master seed of the (P, z) draws and outcome sampling
    """
    runs: PositiveInt = 100
    adversary: str = "honest"
    seed: int = 0


class RunEvent(BaseModel):
    """One timeline entry; sends and receives of a message share ``message``."""
    time: float
    position: float
    actor: str
    action: str
    message: Optional[str] = None


class RunReport(BaseModel):
    """Transcript of a single protocol execution."""
    basis: str
    events: List[RunEvent]
    z: Literal[0, 1]
    z1: Literal[0, 1]
    z2: Literal[0, 1]
    verdict: Literal["ACCEPT", "ABORT"]

    @model_validator(mode="after")
    def _verdict_matches_bits(self):
        agree = self.z == self.z1 == self.z2
        if agree != (self.verdict == "ACCEPT"):
            raise ValueError("verdict must be ACCEPT exactly when z, z1 and z2 agree")
        return self


class BasisAssessment(BaseModel):
    """Per-basis figures of a cheating strategy."""
    basis: str
    acceptance_probability: float = Field(..., ge=0, le=1)
    dist_AD: float
    dist_BC: float


class CheatAssessment(BaseModel):
    per_P: List[BasisAssessment]
    is_perfect: bool


class StrategyFile(BaseModel):
    """Cheating strategy file.

    ``U`` maps projector syntax to the isometry A -> A⊗C; ``decoders`` maps
    projector syntax to ``{"alice": [M0, M1], "bob": [N0, N1]}``.
    """
    dims: Dict[Literal["A", "B", "C", "D"], PositiveInt]
    psi: List[ComplexPair]
    U: Dict[str, MatrixLiteral]
    V: MatrixLiteral
    decoders: Optional[Dict[str, Dict[Literal["alice", "bob"], List[MatrixLiteral]]]] = None

    @field_validator("dims")
    @classmethod
    def _all_registers(cls, v):
        missing = {"A", "B", "C", "D"} - set(v)
        if missing:
            raise ValueError(f"missing register dims {sorted(missing)}")
        return v

    @field_validator("U", "decoders")
    @classmethod
    def _keys_parse(cls, v):
        for key in v or {}:
            parse_projector(key)
        return v


class SearchConfig(BaseModel):
    """Settings of a cheating-strategy search.

    Attributes:
        basis_set: Projector syntax strings, the set T
        dims: Register dims in the order (A, B, C, D)
        restarts: Number of local ascents
        max_iters: Objective evaluations per ascent
        initial_step: Starting perturbation size
        min_step: Ascent stops when the step shrinks below this
        target: Ascent stops when the worst-case acceptance reaches this
        decoder_rounds: Seesaw rounds per objective evaluation
        inject_known: Seed built-in strategies that fit (basis_set, dims) as restarts
        seed: Master seed
    """
    basis_set: List[str] = Field(default_factory=lambda: ["bloch:0,0,1", "bloch:1,0,0"])
    dims: Tuple[PositiveInt, PositiveInt, PositiveInt, PositiveInt] = (4, 4, 4, 4)
    restarts: PositiveInt = 20
    max_iters: PositiveInt = 200
    initial_step: float = Field(0.1, gt=0)
    min_step: float = Field(1e-9, gt=0)
    target: float = Field(1.0 - 1e-12, gt=0, le=1)
    decoder_rounds: PositiveInt = 20
    inject_known: bool = True
    seed: int = 0

    @field_validator("basis_set")
    @classmethod
    def _projectors_parse(cls, v: List[str]) -> List[str]:
        if not v:
            raise ValueError("basis_set must not be empty")
        for s in v:
            parse_projector(s)
        return v

    def projectors(self):
        return [parse_projector(s) for s in self.basis_set]


class RestartTrace(BaseModel):
    restart: int
    seed: int
    start: Literal["random", "injected"]
    value: float


class SearchResult(BaseModel):
    """Best strategy found by a search, with the per-restart record."""
    best_params: List[float]
    best_worst_case: float = Field(..., ge=0, le=1)
    per_basis: Dict[str, float]
    per_restart_trace: List[RestartTrace]
    certified_perfect: bool


class LambdaPairRecord(BaseModel):
    c: Tuple[float, float, float]
    w: List[ComplexPair]
    residual: float
    basis: str


class Lemma1Entry(BaseModel):
    i: int
    j: int
    theta: float
    distance: float
    bound: float
    margin: float
    violation: bool


class Lemma1ScanReport(BaseModel):
    entries: List[Lemma1Entry] = Field(default_factory=list)
    violations: int = 0
    min_margin: Optional[float] = None


class ReportEnvelope(BaseModel):
    """Wrapper written by every CLI command."""
    schema_version: str = SCHEMA_VERSION
    tool_version: str
    command: str
    seed: int
    config: Dict[str, Any]
    generated_at: str
    payload: Dict[str, Any]
