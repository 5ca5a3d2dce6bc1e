"""
levyarea Contract Layer

Pydantic models for the JSON run configurations the CLI reads and the JSON
results it writes, plus the adapters between them and the engine types.

Input models forbid unknown keys; a config that does not validate is a
configuration error (exit code 2).
"""
import json
import logging
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

from .engine.exponent import JumpDistribution, ProcessSpec
from .engine.holding import HoldingFunction

logger = logging.getLogger(__name__)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ============================================================================
# Process
# ============================================================================

class ExponentialJumpModel(StrictModel):
    kind: Literal["exponential"]
    rate: float = Field(gt=0)


class DeterministicJumpModel(StrictModel):
    kind: Literal["deterministic"]
    size: float = Field(gt=0)


class GammaJumpModel(StrictModel):
    kind: Literal["gamma"]
    shape: float = Field(gt=0)
    scale: float = Field(gt=0)


class UniformJumpModel(StrictModel):
    kind: Literal["uniform"]
    upper: float = Field(gt=0)


JumpDistModel = Annotated[
    Union[ExponentialJumpModel, DeterministicJumpModel, GammaJumpModel, UniformJumpModel],
    Field(discriminator="kind"),
]


class ProcessSpecModel(StrictModel):
    """X_t = drift*t + sqrt(sigma2)*B_t + compound Poisson(jump_rate, jump_dist)."""
    drift: float
    sigma2: float = Field(default=0.0, ge=0)
    jump_rate: float = Field(default=0.0, ge=0)
    jump_dist: Optional[JumpDistModel] = None


# ============================================================================
# Holding functions
# ============================================================================

class ConstantHoldingModel(StrictModel):
    kind: Literal["constant"]
    c: float = Field(ge=0)


class LinearHoldingModel(StrictModel):
    kind: Literal["linear"]
    c: float = Field(default=1.0, gt=0)


class PowerHoldingModel(StrictModel):
    kind: Literal["power"]
    c: float = Field(default=1.0, gt=0)
    gamma: float = Field(gt=0)


class PiecewiseLinearHoldingModel(StrictModel):
    kind: Literal["piecewise_linear"]
    knots: List[Tuple[float, float]] = Field(min_length=1)


HoldingModel = Annotated[
    Union[ConstantHoldingModel, LinearHoldingModel, PowerHoldingModel, PiecewiseLinearHoldingModel],
    Field(discriminator="kind"),
]

_HOLDING_ADAPTER = TypeAdapter(HoldingModel)


# ============================================================================
# Run configuration
# ============================================================================

class InventoryConfig(StrictModel):
    """Ordering problem: setup cost K, reward r, optional multi-class data."""
    K: float = Field(gt=0)
    r: float = 0.0
    class_costs: Optional[List[float]] = None           # linear per-class costs c_i
    class_holdings: Optional[List[HoldingModel]] = None
    proportions: Optional[List[float]] = None           # fixed proportions for class_holdings


class RunConfig(StrictModel):
    """
    One JSON file per run. Command-line flags (--x, --reps, --seed, ...) take
    precedence over the optional fields here.
    """
    process: ProcessSpecModel
    holding: HoldingModel = Field(default_factory=lambda: LinearHoldingModel(kind="linear"))
    aux: List[HoldingModel] = Field(default_factory=list)
    x: Optional[float] = Field(default=None, gt=0)
    alpha_grid: Optional[str] = None
    n: Optional[int] = Field(default=None, ge=0)
    reps: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    horizon: Optional[float] = Field(default=None, gt=0)
    scale: Optional[float] = Field(default=None, gt=0)
    inventory: Optional[InventoryConfig] = None


# ============================================================================
# Results
# ============================================================================

class SimEstimateModel(BaseModel):
    name: str
    value: float
    stderr: float
    n: int
    seed: int


class SimulateResponse(BaseModel):
    process: ProcessSpecModel
    holding: HoldingModel
    x: float
    reps: int
    seed: int
    estimates: Dict[str, SimEstimateModel]
    analytic: Dict[str, float]


class LongRunResponse(BaseModel):
    x: float
    horizon: float
    cycles: int
    average: SimEstimateModel
    idle_rate: SimEstimateModel
    mean_gap: SimEstimateModel
    mean_reflected: SimEstimateModel
    limit_average: float
    limit_idle_rate: float
    limit_mean_gap: float
    limit_mean_reflected: float


class CLTResponse(BaseModel):
    holding: HoldingModel
    rv_index: float
    sample_var: float
    limit_var: float
    ks_distance: float
    ks_pvalue: float
    sample_mean: float
    n_scale: float
    reps: int


class MulticlassResponse(BaseModel):
    x: float
    proportions: List[float]
    objective: float
    unique: bool


class FixedProportionsResponse(BaseModel):
    x_star: Optional[float]
    cost: Optional[float]
    convex: bool
    bounded: bool


class InventoryResponse(BaseModel):
    """{"x_star", "cost", "bounded", "p_star"} plus diagnostics."""
    x_star: Optional[float]
    cost: Optional[float]
    bounded: bool
    p_star: Optional[float]
    x_cap: float
    unimodal: Optional[bool] = None
    multiclass: Optional[MulticlassResponse] = None
    fixed_proportions: Optional[FixedProportionsResponse] = None


class CheckResultModel(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifySummary(BaseModel):
    passed: bool
    total: int
    failed: List[str] = Field(default_factory=list)


# ============================================================================
# Adapters
# ============================================================================

def build_jump_dist(model: Optional[BaseModel]) -> Optional[JumpDistribution]:
    if model is None:
        return None
    return JumpDistribution(**model.model_dump())


def build_process(model: ProcessSpecModel) -> ProcessSpec:
    """Engine ProcessSpec; raises the engine's SpecError subclasses on inadmissible values."""
    return ProcessSpec(
        drift=model.drift,
        sigma2=model.sigma2,
        jump_rate=model.jump_rate,
        jump_dist=build_jump_dist(model.jump_dist),
    )


def process_model(spec: ProcessSpec) -> ProcessSpecModel:
    return ProcessSpecModel.model_validate(spec.to_dict())


def build_holding(model: BaseModel) -> HoldingFunction:
    data = model.model_dump()
    if data["kind"] == "piecewise_linear":
        return HoldingFunction.piecewise_linear(data["knots"])
    return HoldingFunction(**data)


def holding_model(h: HoldingFunction) -> BaseModel:
    return _HOLDING_ADAPTER.validate_python(h.to_dict())


def load_config(path: str) -> RunConfig:
    """Read and validate a JSON run configuration."""
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    config = RunConfig.model_validate(raw)
    logger.info(f"Loaded run config from {path}")
    return config


def dump_json(payload) -> str:
    """Sorted keys, two-space indent, trailing newline; byte-stable for identical inputs."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
