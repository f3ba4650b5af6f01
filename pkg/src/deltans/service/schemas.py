"""Request/response models for the HTTP service and the CLI client."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

LabTriple = tuple[float, float, float]
XyzTriple = tuple[float, float, float]


class FactorsModel(BaseModel):
    """Parametric factors; for CMC, kl and kc act as the l and c weights."""

    model_config = ConfigDict(extra="forbid")

    kl: float = 1.0
    kc: float = 1.0
    kh: float = 1.0


class PairModel(BaseModel):
    """A reference/sample CIELAB pair with optional design metadata."""

    model_config = ConfigDict(extra="forbid")

    pair_id: str
    reference: LabTriple
    sample: LabTriple
    center_id: str = ""
    plane: str = ""
    magnitude_label: float | None = None


class XyzPairModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pair_id: str
    reference: XyzTriple
    sample: XyzTriple


class ComputeRequest(BaseModel):
    """Color differences for a list of pairs, given in Lab or in XYZ."""

    model_config = ConfigDict(extra="forbid")

    formula: str = "ciede2000"
    factors: FactorsModel = Field(default_factory=FactorsModel)
    pairs: list[PairModel] | None = None
    xyz_pairs: list[XyzPairModel] | None = None
    white: XyzTriple | None = None

    @model_validator(mode="after")
    def _exactly_one_input(self) -> "ComputeRequest":
        if (self.pairs is None) == (self.xyz_pairs is None):
            raise ValueError("provide exactly one of 'pairs' or 'xyz_pairs'")
        if self.white is not None and self.xyz_pairs is None:
            raise ValueError("'white' applies only to 'xyz_pairs' input")
        return self


class ComputeRow(BaseModel):
    pair_id: str
    de: float
    de00: float | None = None
    d_l: float | None = None
    dl_prime: float | None = None
    dc_prime: float | None = None
    dh_prime: float | None = None
    rt_term: float | None = None


class ComputeResponse(BaseModel):
    formula: str
    columns: list[str]
    rows: list[ComputeRow]


class AssessmentModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pair_id: str
    observer_id: str
    session: int = 1
    gs: float
    dv: float | None = None


class PredictionModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pair_id: str
    de: float


class StressRequest(BaseModel):
    """Either raw aligned vectors (a, b) or assessments + predictions
    joined by pair id (a = panel-mean ΔV, b = predicted ΔE)."""

    model_config = ConfigDict(extra="forbid")

    a: list[float] | None = None
    b: list[float] | None = None
    assessments: list[AssessmentModel] | None = None
    predictions: list[PredictionModel] | None = None

    @model_validator(mode="after")
    def _one_mode(self) -> "StressRequest":
        raw = self.a is not None or self.b is not None
        joined = self.assessments is not None or self.predictions is not None
        if raw == joined:
            raise ValueError("provide either raw vectors (a, b) or assessments + predictions")
        if raw and (self.a is None or self.b is None):
            raise ValueError("raw mode needs both 'a' and 'b'")
        if joined and (self.assessments is None or self.predictions is None):
            raise ValueError("joined mode needs both 'assessments' and 'predictions'")
        return self


class StressResponse(BaseModel):
    stress: float
    f_scale: float
    n: int


class FTestRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    stress1: float
    stress2: float
    confidence: float = 0.95
    n1: int | None = None
    n2: int | None = None


class FTestResponse(BaseModel):
    f_value: float
    lower_crit: float
    upper_crit: float
    verdict: str
    confidence: float
    df1: int | None = None
    df2: int | None = None


class PlaneEllipseModel(BaseModel):
    semi_major: float
    semi_minor: float
    theta_degrees: float


class EllipsoidFitModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    center_id: str = ""
    center: LabTriple
    magnitude_label: float | None = None
    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k6: float
    fit_stress: float = 0.0
    n_pairs: int = 0
    ellipse: PlaneEllipseModel | None = None


class FitRequest(BaseModel):
    """One fitting task over pairs plus per-pair visual differences."""

    model_config = ConfigDict(extra="forbid")

    target: str
    base: str = "ciede2000"
    pairs: list[PairModel]
    dv: dict[str, float]
    center_id: str | None = None
    per_magnitude: bool = False
    mode: str = "sequential"
    dl_a: float | None = None
    dl_b: float | None = None
    tolerance: float = 1e-8
    max_evaluations: int | None = None


class FitResponse(BaseModel):
    target: str
    base: str = ""
    parameters: dict[str, float] = Field(default_factory=dict)
    stress_before: float = 0.0
    stress_after: float = 0.0
    n_evaluations: int = 0
    fits: list[EllipsoidFitModel] = Field(default_factory=list)


class InlineCenterModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    name: str = ""
    lab: LabTriple


class GenerateRequest(BaseModel):
    """Design-generation and synthetic-assessment configuration."""

    model_config = ConfigDict(extra="forbid")

    centers: list[str | InlineCenterModel] | None = None
    magnitudes: list[float] | None = None
    noise_sigma: float = 0.0
    n_observers: int = 1
    seed: int = 0
    ground_truth: str = "ns"
    factors: FactorsModel | None = None
    repeat_center_id: str | None = None


class GenerateResponse(BaseModel):
    pairs: list[PairModel]
    assessments: list[AssessmentModel]


class VariabilityRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    assessments: list[AssessmentModel]
    pairs: list[PairModel] | None = None


class VariabilityResponse(BaseModel):
    inter: dict[str, float]
    intra: dict[str, float]
    inter_mean: float
    intra_mean: float | None
    by_center: dict[str, float]
    by_plane: dict[str, float]
    by_magnitude: dict[str, float]


class PlotRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    fits: list[EllipsoidFitModel]


class CoefficientRowModel(BaseModel):
    formula_id: str
    a: float
    b: float
    c: float
    d: float


class CoefficientsResponse(BaseModel):
    rows: list[CoefficientRowModel]
