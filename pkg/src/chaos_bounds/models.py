"""Pydantic request/response schemas for the service layer.

The wire formats mirror the JSON file formats exactly: tensors are
``{"d","n","m","space","values"}`` with row-major values (innermost axis is
the value axis), spaces are ``{"kind":"lq","q","weights"}`` or
``{"kind":"finite_sup","T"}``, polynomials are
``{"n","D","m","terms","space"}``.  Unknown fields are rejected.
"""

from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from .hermite import PolynomialSpec
from .norms import OptimizerConfig
from .tensor import CoeffTensor


class LqSpaceModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["lq"]
    q: float
    weights: list[float]


class FiniteSupSpaceModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["finite_sup"]
    T: list[list[float]]


SpaceModel = Annotated[Union[LqSpaceModel, FiniteSupSpaceModel], Field(discriminator="kind")]


class TensorModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    d: int
    n: int
    m: int
    space: SpaceModel
    values: list[float]

    def to_core(self) -> CoeffTensor:
        return CoeffTensor.from_dict(self.model_dump())


class PolyTermModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    exps: list[int]
    coeff: list[float]


class PolynomialModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    n: int
    D: int
    m: int
    terms: list[PolyTermModel]
    space: SpaceModel

    def to_core(self) -> PolynomialSpec:
        return PolynomialSpec.from_dict(self.model_dump())


class OptimizerModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    restarts: int = 8
    saa_samples: int = 256
    eval_samples: int = 4096
    max_sweeps: int = 100
    tol: float = 1e-6
    seed: int = 0

    def to_core(self) -> OptimizerConfig:
        return OptimizerConfig(**self.model_dump())


# --------------------------------------------------------------------------
# requests


class NormRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    tensor: TensorModel
    pair: str
    config: OptimizerModel = OptimizerModel()


class BoundRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    tensor: TensorModel
    p: list[float]
    side: Literal["upper", "lower", "both", "special", "lq"] = "both"
    q: Optional[float] = None
    K: Optional[float] = None
    calibration: float = 1.0
    config: OptimizerModel = OptimizerModel()


class TailRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    tensor: TensorModel
    t: list[float]
    config: OptimizerModel = OptimizerModel()


class ExpBoundRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    tensor: TensorModel
    p: list[float]
    q: Optional[float] = None
    full_m: bool = False
    config: OptimizerModel = OptimizerModel()


class PolyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    poly: PolynomialModel
    what: Literal["bounds", "expand", "gradients"] = "bounds"
    p: list[float] = [2.0]
    q: Optional[float] = None
    K: Optional[float] = None
    t: list[float] = []
    config: OptimizerModel = OptimizerModel()


class EmpiricalRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    tensor: TensorModel
    sampler: Literal["decoupled", "undecoupled", "exponential", "exponential-gg"] = "decoupled"
    p: list[float] = [2.0]
    samples: int = 100_000
    seed: int = 0
    bootstrap: bool = False


class CheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    tensor: TensorModel
    what: Literal["decoupling", "hypercontractivity", "alpha-plus", "sandwich"]
    p: float = 2.0
    q: float = 4.0
    samples: int = 100_000
    seed: int = 0
    config: OptimizerModel = OptimizerModel()


class ReportRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    tensor: TensorModel
    p: list[float] = [2.0, 4.0]
    t: list[float] = []
    samples: int = 100_000
    seed: int = 0
    calibration: float = 1.0
    config: OptimizerModel = OptimizerModel()


# --------------------------------------------------------------------------
# responses


class Meta(BaseModel):
    package: str
    version: str
    timestamp: str


class NormResponse(BaseModel):
    seed: int
    value: float
    restarts_used: int
    saa_samples: int
    eval_samples: int
    stderr: float
    best_vectors: dict[str, list[float]]
    meta: Optional[Meta] = None


class TermModel(BaseModel):
    label: str
    power: float
    value: float
    stderr: float = 0.0


class BoundReportModel(BaseModel):
    p: float
    side: str
    prefactor: float
    constant_policy: dict[str, float]
    terms: list[TermModel]
    structural_sum: float


class BoundResponse(BaseModel):
    seed: int
    reports: list[BoundReportModel]
    meta: Optional[Meta] = None


class TailPairModel(BaseModel):
    t: float
    upper: dict
    lower: dict


class TailResponse(BaseModel):
    seed: int
    tails: list[TailPairModel]
    meta: Optional[Meta] = None


class ExpBoundResponse(BaseModel):
    seed: int
    reports: list[BoundReportModel]
    meta: Optional[Meta] = None


class PolyResponse(BaseModel):
    seed: int
    what: str
    result: dict
    meta: Optional[Meta] = None


class MomentModel(BaseModel):
    p: float
    value: float
    ci_low: float
    ci_high: float
    samples: int


class EmpiricalResponse(BaseModel):
    sampler: str
    seed: int
    moments: list[MomentModel]
    meta: Optional[Meta] = None


class CheckResponse(BaseModel):
    what: str
    result: dict
    seed: int
    samples: int
    meta: Optional[Meta] = None


class ReportResponse(BaseModel):
    document: dict
    meta: Optional[Meta] = None
