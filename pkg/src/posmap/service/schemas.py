"""Wire models for the HTTP service.

Requests mirror the command line flags; responses mirror the dicts built
in posmap.analysis, so both front ends expose identical numbers.  Scalars
follow the package wire convention: reals as bare numbers, complex values
as ``[re, im]`` pairs.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

FieldName = Literal["real", "complex"]

# A wire scalar: a bare real or an [re, im] pair.
Scalar = float | list[float]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SourceRequest(StrictModel):
    """Common shape for endpoints that load a map.

    ``source`` holds a zoo reference ``{"zoo": name, ...}``, a wrapped map
    object, or a bare matrix object.  ``field`` applies to zoo builds;
    wrapped maps and matrices are self-describing.  ``choi`` reads a bare
    matrix as a Choi matrix, which needs ``n`` for the block split.
    """

    source: dict[str, Any]
    field: FieldName = "complex"
    choi: bool = False
    n: int | None = Field(default=None, ge=1)


class AnalyzeRequest(SourceRequest):
    tol: float = Field(default=1e-9, gt=0)
    seed: int = 42
    budget: int = Field(default=64, ge=1)
    max_selections: int = Field(default=32, ge=1)


class ConvertRequest(SourceRequest):
    to: Literal["matricization", "choi"]


class HillRequest(SourceRequest):
    tol: float = Field(default=1e-9, gt=0)


class RangeRequest(StrictModel):
    """Product-range membership query.

    ``source`` is either a pattern object ``{"n", "q", "positions",
    "alpha"?}`` or any map source, which is reduced to its detected
    pattern first.
    """

    source: dict[str, Any]
    y: list[Scalar]
    field: FieldName = "complex"
    tol: float = Field(default=1e-9, gt=0)
    seed: int = 42
    budget: int = Field(default=64, ge=1)


class MatrixWire(BaseModel):
    field: FieldName
    rows: int
    cols: int
    data: list[list[Scalar]]


class MapWire(BaseModel):
    kind: Literal["matricization", "choi"]
    n: int
    q: int
    field: FieldName
    matrix: MatrixWire


class InputEcho(BaseModel):
    n: int
    q: int
    field: FieldName
    map: MapWire


class StarReport(BaseModel):
    is_star_linear: bool
    deviation_hermitian: float
    deviation_shuffle: float
    deviation_entrywise: float
    tol: float
    scale: float


class HillSection(BaseModel):
    m: int
    positions: list[list[int]]
    H: MatrixWire
    ahat: MatrixWire
    A: list[MatrixWire]


class HillResponse(HillSection):
    field: FieldName
    n: int
    q: int


class ProbeWitness(BaseModel):
    z: list[Scalar]
    x: list[Scalar]
    value: float


class PositivitySection(BaseModel):
    status: str
    min_value_seen: float
    starts_used: int
    samples_used: int
    budget: int
    seed: int
    tol: float
    witness: ProbeWitness | None


class CPSection(BaseModel):
    is_completely_positive: bool
    min_eigenvalue: float
    witness: list[Scalar] | None
    tol: float


class PatternWire(BaseModel):
    n: int
    q: int
    positions: list[list[int]]
    remainder: Literal["zero", "single", "hetero"] | None = None
    alpha: list[Scalar] | None = None


class C2Section(BaseModel):
    free_row: bool
    free_col: bool
    two_repeated_rows: bool
    two_repeated_cols: bool
    rows_distinct: bool
    cols_distinct: bool
    isolated: bool


class CaseSection(BaseModel):
    kind: str
    pivot: list[int] | None = None
    order: list[int] | None = None


class ClassificationSection(BaseModel):
    c1: bool
    c2: C2Section
    case: CaseSection | None
    sum_alpha_is_one: bool | None


class VerdictSection(BaseModel):
    decision: Literal["guaranteed_coincide", "unknown"]
    reason: str
    selections_tried: int


class OpenQuestion(BaseModel):
    id: str
    note: str


class AnalyzeResponse(BaseModel):
    input: InputEcho
    star_linear: StarReport
    hill: HillSection
    positivity: PositivitySection
    completely_positive: CPSection
    pattern: PatternWire
    classification: ClassificationSection
    verdict: VerdictSection
    open_questions: list[OpenQuestion]


class RangeWitness(BaseModel):
    z: list[Scalar]
    x: list[Scalar]
    residual: float
    branch: str


class RangeResponse(BaseModel):
    n: int
    q: int
    positions: list[list[int]]
    alpha: list[Scalar]
    field: FieldName
    y: list[Scalar]
    seed: int
    budget: int
    tol: float
    decision: Literal["reachable", "not_reachable"]
    certified: bool
    method: str
    witness: RangeWitness | None
    best_residual: float | None = None
    grid_resolution: int | None = None
    grid_box: list[float] | None = None


class CensusResponse(BaseModel):
    lines: list[str]


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str
