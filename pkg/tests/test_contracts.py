"""
Contract Schema Tests

Run configurations and JSON results: the shapes the CLI reads must validate
strictly, and the adapters must hand the engine the same process and holding
function the config describes.
"""
import json

import pytest
from pydantic import ValidationError

from levyarea.contracts import (
    InventoryResponse, RunConfig, SimEstimateModel, SimulateResponse, build_holding, build_process,
    dump_json, holding_model, load_config, process_model,
)
from levyarea.engine.errors import MeanDriftViolation, MissingJumpDist
from levyarea.engine.exponent import JumpDistribution, ProcessSpec
from levyarea.engine.holding import HoldingFunction


MM1_CONFIG = {
    "process": {"drift": -1.0, "jump_rate": 1.0, "jump_dist": {"kind": "exponential", "rate": 2.0}},
    "holding": {"kind": "linear", "c": 1.0},
    "x": 1.0,
    "reps": 1000,
    "seed": 7,
}

EOQ_CONFIG = {
    "process": {"drift": -0.5},
    "holding": {"kind": "linear"},
    "inventory": {"K": 4.0},
}


# ============================================================================
# Input validation
# ============================================================================

class TestRunConfig:

    def test_mm1_config(self) -> None:
        config = RunConfig.model_validate(MM1_CONFIG)
        assert config.process.jump_dist.kind == "exponential"
        assert config.x == 1.0
        assert config.aux == []

    def test_defaults(self) -> None:
        config = RunConfig.model_validate({"process": {"drift": -1.0, "sigma2": 1.0}})
        assert config.holding.kind == "linear"
        assert config.holding.c == 1.0
        assert config.inventory is None
        assert config.x is None

    def test_inventory_section(self) -> None:
        config = RunConfig.model_validate(EOQ_CONFIG)
        assert config.inventory.K == 4.0
        assert config.inventory.r == 0.0

    def test_unknown_top_level_key_rejected(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig.model_validate({**MM1_CONFIG, "levels": [1, 2]})

    def test_unknown_nested_key_rejected(self) -> None:
        bad = {"process": {"drift": -1.0, "jump_rate": 1.0,
                           "jump_dist": {"kind": "exponential", "rate": 2.0, "mean": 0.5}}}
        with pytest.raises(ValidationError):
            RunConfig.model_validate(bad)

    def test_unknown_jump_kind_rejected(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"process": {"drift": -1.0, "jump_rate": 1.0,
                                                  "jump_dist": {"kind": "pareto", "alpha": 1.5}}})

    def test_discriminator_picks_fields(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"process": {"drift": -1.0, "jump_rate": 1.0,
                                                  "jump_dist": {"kind": "gamma", "rate": 1.0}}})

    def test_range_checks(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"process": {"drift": -1.0, "sigma2": -0.1}})
        with pytest.raises(ValidationError):
            RunConfig.model_validate({**MM1_CONFIG, "x": 0.0})
        with pytest.raises(ValidationError):
            RunConfig.model_validate({**EOQ_CONFIG, "inventory": {"K": -1.0}})

    def test_load_config(self, tmp_path) -> None:
        path = tmp_path / "run.json"
        path.write_text(json.dumps(MM1_CONFIG))
        assert load_config(str(path)).seed == 7


# ============================================================================
# Adapters
# ============================================================================

class TestAdapters:

    def test_build_process(self) -> None:
        spec = build_process(RunConfig.model_validate(MM1_CONFIG).process)
        assert spec.jump_dist == JumpDistribution.exponential(2.0)
        assert spec.mean_increment == pytest.approx(-0.5)

    def test_build_process_enforces_mean_drift(self) -> None:
        model = RunConfig.model_validate({"process": {"drift": -0.5, "jump_rate": 1.0,
                                                      "jump_dist": {"kind": "deterministic", "size": 1.0}}}).process
        with pytest.raises(MeanDriftViolation):
            build_process(model)

    def test_build_process_needs_jump_dist(self) -> None:
        model = RunConfig.model_validate({"process": {"drift": -1.0, "jump_rate": 1.0}}).process
        with pytest.raises(MissingJumpDist):
            build_process(model)

    def test_process_round_trip(self) -> None:
        spec = ProcessSpec(drift=-1.0, sigma2=0.5, jump_rate=0.5, jump_dist=JumpDistribution.gamma(2.0, 0.5))
        assert build_process(process_model(spec)) == spec

    @pytest.mark.parametrize("h", [
        HoldingFunction.constant(2.0),
        HoldingFunction.linear(1.5),
        HoldingFunction.power(1.0, 0.5),
        HoldingFunction.piecewise_linear([(0.0, 0.0), (1.0, 2.0), (3.0, 2.5)]),
    ], ids=lambda h: h.kind)
    def test_holding_round_trip(self, h) -> None:
        rebuilt = build_holding(holding_model(h))
        assert rebuilt.kind == h.kind
        assert rebuilt.at(2.0) == pytest.approx(h.at(2.0))
        assert rebuilt.antiderivative(2.5) == pytest.approx(h.antiderivative(2.5))


# ============================================================================
# Output
# ============================================================================

class TestOutput:

    def test_dump_json_is_sorted_with_trailing_newline(self) -> None:
        text = dump_json({"b": 1, "a": {"d": 2.5, "c": None}})
        assert text.endswith("}\n")
        assert text.index('"a"') < text.index('"b"')
        assert text.index('"c"') < text.index('"d"')
        assert json.loads(text) == {"a": {"c": None, "d": 2.5}, "b": 1}

    def test_dump_model(self) -> None:
        resp = SimulateResponse(
            x=1.0, reps=100, seed=0,
            estimates={"mean": SimEstimateModel(name="mean", value=1.0, stderr=0.1, n=100, seed=0)},
            analytic={"mean": 1.0},
        )
        assert json.loads(dump_json(resp))["estimates"]["mean"]["stderr"] == 0.1

    def test_unbounded_inventory_response(self) -> None:
        resp = InventoryResponse(x_star=None, cost=None, bounded=False, p_star=None, x_cap=1e12)
        data = json.loads(dump_json(resp))
        assert data["x_star"] is None
        assert data["bounded"] is False
