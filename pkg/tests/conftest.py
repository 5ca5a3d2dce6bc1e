"""Shared process fixtures for the test suite."""
import pytest

from levyarea.engine.exponent import JumpDistribution, ProcessSpec, build_exponent
from levyarea.engine.holding import HoldingFunction


@pytest.fixture
def bm_spec() -> ProcessSpec:
    """phi(alpha) = alpha + alpha^2/2."""
    return ProcessSpec(drift=-1.0, sigma2=1.0)


@pytest.fixture
def mm1_spec() -> ProcessSpec:
    """d = -1, lambda = 1, Exp(2) jumps: phi'(0) = 1/2, Var T_1 = 4."""
    return ProcessSpec(drift=-1.0, jump_rate=1.0, jump_dist=JumpDistribution.exponential(2.0))


@pytest.fixture
def det_spec() -> ProcessSpec:
    """d = -1, lambda = 1/2, unit jumps: phi'(0) = 1/2."""
    return ProcessSpec(drift=-1.0, jump_rate=0.5, jump_dist=JumpDistribution.deterministic(1.0))


@pytest.fixture
def drift_spec() -> ProcessSpec:
    """Pure drift, no jumps: T_x = x deterministically."""
    return ProcessSpec(drift=-1.0)


@pytest.fixture
def bm_exponent(bm_spec):
    return build_exponent(bm_spec)


@pytest.fixture
def mm1_exponent(mm1_spec):
    return build_exponent(mm1_spec)


@pytest.fixture
def det_exponent(det_spec):
    return build_exponent(det_spec)


@pytest.fixture
def linear() -> HoldingFunction:
    return HoldingFunction.linear(1.0)
