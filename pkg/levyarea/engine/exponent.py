"""
levyarea Laplace Exponent
Spectrally-positive Levy processes X_t = d*t + sigma*B_t + compound Poisson,
their LS exponent phi(alpha) = log E exp(-alpha X_1), derivatives of phi at
zero and the numerical inverse phi^{-1} on [0, inf).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import optimize, special

from ..config import DERIV_ORDER_MAX, DERIV_ORDER_HARD_CAP, INVERSE_MAX_ITER, INVERSE_NEWTON_STEPS, INVERSE_RTOL
from .errors import ConvergenceFailure, DomainError, InvalidParameter, MeanDriftViolation, MissingJumpDist

logger = logging.getLogger(__name__)

JUMP_KINDS = ("exponential", "deterministic", "gamma", "uniform")

# Below this value of alpha*scale the uniform LST uses its Taylor expansion
_UNIFORM_SERIES_CUTOFF = 1e-3


# ============================================================================
# Jump law
# ============================================================================

@dataclass(frozen=True)
class JumpDistribution:
    """Law of the positive jump sizes J of the compound Poisson part."""
    kind: str              # "exponential" | "deterministic" | "gamma" | "uniform"
    rate: float = 0.0      # exponential
    size: float = 0.0      # deterministic
    shape: float = 0.0     # gamma
    scale: float = 0.0     # gamma
    upper: float = 0.0     # uniform(0, upper)

    def __post_init__(self):
        if self.kind not in JUMP_KINDS:
            raise InvalidParameter(f"Unknown jump kind '{self.kind}', expected one of {JUMP_KINDS}")
        required = {
            "exponential": ("rate",),
            "deterministic": ("size",),
            "gamma": ("shape", "scale"),
            "uniform": ("upper",),
        }[self.kind]
        for name in required:
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidParameter(f"{self.kind} jump parameter '{name}' must be positive and finite, got {value}")

    @classmethod
    def exponential(cls, rate: float) -> "JumpDistribution":
        return cls(kind="exponential", rate=rate)

    @classmethod
    def deterministic(cls, size: float) -> "JumpDistribution":
        return cls(kind="deterministic", size=size)

    @classmethod
    def gamma(cls, shape: float, scale: float) -> "JumpDistribution":
        return cls(kind="gamma", shape=shape, scale=scale)

    @classmethod
    def uniform(cls, upper: float) -> "JumpDistribution":
        return cls(kind="uniform", upper=upper)

    def moment(self, n: int) -> float:
        """Raw moment E J^n."""
        if n < 0:
            raise DomainError(f"Moment order must be non-negative, got {n}")
        if n == 0:
            return 1.0
        if self.kind == "exponential":
            return math.factorial(n) / self.rate ** n
        if self.kind == "deterministic":
            return self.size ** n
        if self.kind == "gamma":
            return self.scale ** n * float(special.poch(self.shape, n))
        return self.upper ** n / (n + 1)

    def mean(self) -> float:
        return self.moment(1)

    def lst(self, alpha: float) -> float:
        """E exp(-alpha J)."""
        return 1.0 + self.lst_minus_one(alpha)

    def lst_minus_one(self, alpha: float) -> float:
        """E exp(-alpha J) - 1, evaluated without cancellation near alpha = 0."""
        if self.kind == "exponential":
            return -alpha / (self.rate + alpha)
        if self.kind == "deterministic":
            return math.expm1(-alpha * self.size)
        if self.kind == "gamma":
            return math.expm1(-self.shape * math.log1p(self.scale * alpha))
        z = alpha * self.upper
        if z < _UNIFORM_SERIES_CUTOFF:
            return -z / 2.0 + z * z / 6.0 - z ** 3 / 24.0 + z ** 4 / 120.0
        return (-math.expm1(-z) - z) / z

    def lst_derivative(self, alpha: float) -> float:
        """d/dalpha E exp(-alpha J) = -E[J exp(-alpha J)]."""
        if self.kind == "exponential":
            return -self.rate / (self.rate + alpha) ** 2
        if self.kind == "deterministic":
            return -self.size * math.exp(-alpha * self.size)
        if self.kind == "gamma":
            return -self.shape * self.scale * (1.0 + self.scale * alpha) ** (-self.shape - 1.0)
        b = self.upper
        z = alpha * b
        if z < _UNIFORM_SERIES_CUTOFF:
            return -b * (0.5 - z / 3.0 + z * z / 8.0 - z ** 3 / 30.0)
        return -(1.0 - math.exp(-z) * (1.0 + z)) / (alpha * z)

    def sample(self, rng: np.random.Generator, size: Optional[int] = None):
        """Draw jump sizes with a numpy Generator."""
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.rate, size)
        if self.kind == "deterministic":
            return self.size if size is None else np.full(size, self.size)
        if self.kind == "gamma":
            return rng.gamma(self.shape, self.scale, size)
        return rng.uniform(0.0, self.upper, size)

    def to_dict(self) -> dict:
        """JSON-shaped dict; field names follow the external config format."""
        if self.kind == "exponential":
            return {"kind": "exponential", "rate": self.rate}
        if self.kind == "deterministic":
            return {"kind": "deterministic", "size": self.size}
        if self.kind == "gamma":
            return {"kind": "gamma", "shape": self.shape, "scale": self.scale}
        return {"kind": "uniform", "upper": self.upper}


# ============================================================================
# Process specification
# ============================================================================

@dataclass(frozen=True)
class ProcessSpec:
    """
    X_t = drift*t + sqrt(sigma2)*B_t + sum of jump_rate-Poisson many J_i.

    The untruncated parametrization: drift is the total drift, so
    phi(alpha) = -drift*alpha + sigma2*alpha^2/2 + jump_rate*(E exp(-alpha J) - 1).
    """
    drift: float
    sigma2: float = 0.0
    jump_rate: float = 0.0
    jump_dist: Optional[JumpDistribution] = None

    def __post_init__(self):
        if not math.isfinite(self.drift):
            raise InvalidParameter(f"drift must be finite, got {self.drift}")
        if not (self.sigma2 >= 0 and math.isfinite(self.sigma2)):
            raise InvalidParameter(f"sigma2 must be non-negative and finite, got {self.sigma2}")
        if not (self.jump_rate >= 0 and math.isfinite(self.jump_rate)):
            raise InvalidParameter(f"jump_rate must be non-negative and finite, got {self.jump_rate}")
        if self.jump_rate > 0 and self.jump_dist is None:
            raise MissingJumpDist(f"jump_rate={self.jump_rate} > 0 requires a jump_dist")
        mean_increment = self.mean_increment
        if mean_increment >= 0:
            raise MeanDriftViolation(
                f"Mean drift condition violated: d + lambda*E J = {mean_increment} >= 0 (need phi'(0) > 0)"
            )

    @property
    def mean_increment(self) -> float:
        """E X_1 = d + lambda * E J."""
        jump_mean = self.jump_dist.mean() if (self.jump_rate > 0 and self.jump_dist is not None) else 0.0
        return self.drift + self.jump_rate * jump_mean

    @property
    def has_jumps(self) -> bool:
        return self.jump_rate > 0

    @property
    def is_finite_activity(self) -> bool:
        """True when paths are piecewise linear (no Brownian part)."""
        return self.sigma2 == 0.0

    def to_dict(self) -> dict:
        out = {"drift": self.drift, "sigma2": self.sigma2, "jump_rate": self.jump_rate}
        out["jump_dist"] = self.jump_dist.to_dict() if self.jump_dist is not None else None
        return out


# ============================================================================
# Laplace exponent
# ============================================================================

@dataclass(frozen=True)
class LaplaceExponent:
    """Evaluable phi with its derivative table at zero; immutable and thread-safe."""
    spec: ProcessSpec
    deriv0: Tuple[float, ...] = field(default_factory=tuple)   # phi^{(n)}(0), n = 1..n_max

    @property
    def n_max(self) -> int:
        return len(self.deriv0)

    @property
    def dphi0(self) -> float:
        """phi'(0) = -E X_1 > 0."""
        return self.deriv0[0]

    @property
    def d2phi0(self) -> float:
        """phi''(0) = Var X_1."""
        return self.deriv0[1]

    @property
    def var_t1(self) -> float:
        """Var T_1 = phi''(0) / phi'(0)^3 = -(phi^{-1})''(0)."""
        return self.d2phi0 / self.dphi0 ** 3

    def taylor_coefficients(self) -> np.ndarray:
        """a_n = phi^{(n)}(0)/n!, n = 1..n_max."""
        return np.array([d / math.factorial(n) for n, d in enumerate(self.deriv0, start=1)])

    def phi(self, alpha: float) -> float:
        """phi(alpha) for alpha >= 0."""
        return phi(self, alpha)

    def dphi(self, alpha: float) -> float:
        """phi'(alpha) for alpha >= 0."""
        s = self.spec
        value = -s.drift + s.sigma2 * alpha
        if s.has_jumps:
            value += s.jump_rate * s.jump_dist.lst_derivative(alpha)
        return value

    def inverse(self, theta: float) -> float:
        """phi^{-1}(theta) for theta >= 0."""
        return phi_inverse(self, theta)


def build_exponent(spec: ProcessSpec, n_max: int = DERIV_ORDER_MAX) -> LaplaceExponent:
    """
    Build the exponent of `spec` with phi^{(n)}(0) tabulated for n = 1..n_max:
    phi'(0) = -(d + lambda E J), phi''(0) = sigma2 + lambda E J^2,
    phi^{(n)}(0) = (-1)^n lambda E J^n for n >= 3.
    """
    if n_max < 2:
        raise InvalidParameter(f"n_max must be >= 2, got {n_max}")
    if n_max > DERIV_ORDER_HARD_CAP:
        raise InvalidParameter(f"n_max must be <= {DERIV_ORDER_HARD_CAP}, got {n_max}")
    if not isinstance(spec, ProcessSpec):
        raise InvalidParameter(f"Expected a ProcessSpec, got {type(spec).__name__}")

    lam = spec.jump_rate
    moment = spec.jump_dist.moment if spec.has_jumps else (lambda n: 0.0)

    deriv0 = [-spec.mean_increment, spec.sigma2 + lam * moment(2)]
    for n in range(3, n_max + 1):
        deriv0.append((-1) ** n * lam * moment(n))

    exp = LaplaceExponent(spec=spec, deriv0=tuple(float(d) for d in deriv0))
    logger.info(f"LaplaceExponent initialized: phi'(0)={exp.dphi0:.6g}, phi''(0)={exp.d2phi0:.6g}, n_max={n_max}")
    return exp


def phi(exp: LaplaceExponent, alpha: float) -> float:
    """Closed-form phi(alpha) = -d alpha + sigma2 alpha^2 / 2 + lambda (E e^{-alpha J} - 1)."""
    if alpha < 0 or math.isnan(alpha):
        raise DomainError(f"phi is defined on [0, inf), got alpha={alpha}")
    s = exp.spec
    value = -s.drift * alpha + 0.5 * s.sigma2 * alpha * alpha
    if s.has_jumps:
        value += s.jump_rate * s.jump_dist.lst_minus_one(alpha)
    return value


def phi_inverse(exp: LaplaceExponent, theta: float, rtol: float = INVERSE_RTOL) -> float:
    """
    phi^{-1}(theta): bracket by doubling from [0, 1] until phi(hi) >= theta,
    root-find with brentq, then polish with Newton steps on the closed-form phi'.
    phi is convex and increasing on [0, inf) because phi'(0) > 0.
    """
    if theta < 0 or math.isnan(theta):
        raise DomainError(f"phi^-1 is defined on [0, inf), got theta={theta}")
    if theta == 0:
        return 0.0

    lo, hi = 0.0, 1.0
    iterations = 0
    while phi(exp, hi) < theta:
        lo, hi = hi, 2.0 * hi
        iterations += 1
        if iterations > INVERSE_MAX_ITER or not math.isfinite(hi):
            raise ConvergenceFailure(f"Could not bracket phi^-1({theta}) after {iterations} doublings")

    target = lambda a: phi(exp, a) - theta
    try:
        alpha = optimize.brentq(target, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=INVERSE_MAX_ITER)
    except RuntimeError as e:
        raise ConvergenceFailure(f"brentq failed for phi^-1({theta}): {e}") from e

    tol = rtol * max(1.0, theta)
    for _ in range(INVERSE_NEWTON_STEPS):
        residual = phi(exp, alpha) - theta
        if abs(residual) <= 0.5 * tol:
            break
        slope = exp.dphi(alpha)
        if slope <= 0:
            break
        stepped = alpha - residual / slope
        if not (lo <= stepped <= hi):
            break
        alpha = stepped

    if abs(phi(exp, alpha) - theta) > tol:
        raise ConvergenceFailure(f"phi^-1({theta}) residual {phi(exp, alpha) - theta:.3e} exceeds {tol:.3e}")
    return alpha


def hitting_time_mean(exp: LaplaceExponent, x: float) -> float:
    """E T_x = x / phi'(0)."""
    if x < 0:
        raise DomainError(f"level must be non-negative, got x={x}")
    return x / exp.dphi0


def hitting_time_var(exp: LaplaceExponent, x: float) -> float:
    """Var T_x = x * phi''(0) / phi'(0)^3."""
    if x < 0:
        raise DomainError(f"level must be non-negative, got x={x}")
    return x * exp.var_t1


def idle_rate(exp: LaplaceExponent) -> float:
    """lim L_t / t = phi'(0): unused capacity, and secondary work done, per unit time."""
    return exp.dphi0
