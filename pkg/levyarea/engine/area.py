"""
levyarea Area Law
Analytic law of A_x = int_0^{T_x} h(W^x_t - W_t) dt and its relatives:
transforms, means, covariances, the moment recursion, the two-level and
finite-dimensional transforms, long-run averages and the Gaussian limit.

Every transform has the shape exp(-int_0^x phi^{-1}(theta(y)) dy) because
A_x = int_(0,x] h(x-y) T_dy is shot noise driven by the subordinator T,
whose exponent is -phi^{-1}.
"""
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

from scipy import integrate, special

from ..config import QUAD_EPSABS, QUAD_EPSREL, QUAD_LIMIT
from .errors import DegenerateFunction, DomainError, LevelsNotIncreasing, OrderViolation, QuadratureFailure
from .exponent import LaplaceExponent, phi_inverse
from .holding import ONE, HoldingFunction
from .inversion import subordinator_cumulants

logger = logging.getLogger(__name__)


# ============================================================================
# Types
# ============================================================================

@dataclass
class MomentTable:
    """c_k (cumulants) and mu_n (raw moments, mu_0 = 1) of A_x."""
    x: float
    c: List[float] = field(default_factory=list)    # c_1..c_N
    mu: List[float] = field(default_factory=lambda: [1.0])  # mu_0..mu_N

    @property
    def mean(self) -> float:
        return self.mu[1]

    @property
    def variance(self) -> float:
        return self.mu[2] - self.mu[1] ** 2


@dataclass(frozen=True)
class GaussianLimit:
    """Limit A*_x = int_0^x (x-s)^alpha dB_s with Var B_1 = Var T_1."""
    alpha: float
    var_t1: float

    def __post_init__(self):
        if self.alpha < 0:
            raise DomainError(f"regular-variation index must be >= 0, got {self.alpha}")
        if self.var_t1 < 0:
            raise DomainError(f"Var T_1 must be >= 0, got {self.var_t1}")


# ============================================================================
# Quadrature
# ============================================================================

def _quad(f: Callable[[float], float], upper: float, points: Sequence[float] = ()) -> float:
    """int_0^upper f with scipy's adaptive Gauss-Kronrod; kinks passed as break points."""
    if upper <= 0:
        return 0.0
    inner = sorted({p for p in points if 0.0 < p < upper})
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(
                f, 0.0, upper, points=inner or None,
                epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT,
            )
        except integrate.IntegrationWarning as e:
            raise QuadratureFailure(f"quadrature on [0, {upper}] did not converge: {e}") from e
    logger.debug(f"quad on [0, {upper:.6g}]: {value:.12g} +/- {abserr:.2e}")
    return value


def _graded_points(h: HoldingFunction, upper: float) -> List[float]:
    """Break points for h on [0, upper]: knots, plus a graded first panel for t^gamma, gamma < 1."""
    points = list(h.breakpoints(upper))
    if h.kind == "power" and h.gamma < 1.0:
        points += [upper * 1e-6, upper * 1e-4, upper * 1e-2]
    return points


def _shifted_breakpoints(h: HoldingFunction, shift: float, upper: float) -> List[float]:
    """Kinks of t -> h(shift + t) on (0, upper)."""
    return [p - shift for p in _graded_points(h, shift + upper) if 0.0 < p - shift < upper]


# ============================================================================
# Transforms
# ============================================================================

def lst_area(exp: LaplaceExponent, h: HoldingFunction, x: float, alpha: float) -> float:
    """E exp(-alpha A_x) = exp(-int_0^x phi^{-1}(alpha h(y)) dy)."""
    return joint_lst(exp, h, ONE, x, alpha, 0.0)


def joint_lst(exp: LaplaceExponent, h: HoldingFunction, g: HoldingFunction,
              x: float, alpha: float, beta: float) -> float:
    """E exp(-alpha A_x - beta B_x) = exp(-int_0^x phi^{-1}(alpha h(y) + beta g(y)) dy)."""
    if x < 0:
        raise DomainError(f"level must be non-negative, got x={x}")
    if alpha < 0 or beta < 0:
        raise DomainError(f"transform arguments must be non-negative, got alpha={alpha}, beta={beta}")
    if x == 0 or (alpha == 0 and beta == 0):
        return 1.0

    if h.kind == "constant" and g.kind == "constant":
        exponent = x * phi_inverse(exp, alpha * h.c + beta * g.c)
    else:
        integrand = lambda y: phi_inverse(exp, alpha * h.at(y) + beta * g.at(y))
        exponent = _quad(integrand, x, _graded_points(h, x) + _graded_points(g, x))
    return math.exp(-exponent)


def hitting_time_lst(exp: LaplaceExponent, x: float, beta: float) -> float:
    """E exp(-beta T_x) = exp(-phi^{-1}(beta) x)."""
    if x < 0 or beta < 0:
        raise DomainError(f"need x >= 0 and beta >= 0, got x={x}, beta={beta}")
    return math.exp(-phi_inverse(exp, beta) * x)


def lst_two_level(exp: LaplaceExponent, h: HoldingFunction, x: float, y: float, alpha: float) -> float:
    """
    LST of A_{x,y} = h(y-x) T_x + A_{y-x} (independent summands):
    exp(-phi^{-1}(alpha h(y-x)) x - int_0^{y-x} phi^{-1}(alpha h(z)) dz).
    """
    _check_two_level(x, y)
    first = math.exp(-phi_inverse(exp, alpha * h.at(y - x)) * x)
    return first * lst_area(exp, h, y - x, alpha)


def joint_lst_fidi(exp: LaplaceExponent, h: HoldingFunction, levels: Sequence[float],
                   alphas: Sequence[float], betas: Optional[Sequence[float]] = None) -> float:
    """
    E exp(-sum alpha_i A_{s_i} - sum beta_i T_{s_i}) for 0 < s_1 < ... < s_n:
    prod_j exp(-int_0^{x_j} phi^{-1}(sum_{i>=j} alpha_i h(s_i - s_j + t) + beta_i) dt),
    with x_j = s_j - s_{j-1}, s_0 = 0.
    """
    levels = [float(s) for s in levels]
    n = len(levels)
    betas = [0.0] * n if betas is None else [float(b) for b in betas]
    alphas = [float(a) for a in alphas]
    if len(alphas) != n or len(betas) != n:
        raise DomainError(f"need one alpha and one beta per level, got {len(alphas)}/{len(betas)} for {n} levels")
    if n == 0:
        return 1.0
    if levels[0] <= 0 or any(b <= a for a, b in zip(levels, levels[1:])):
        raise LevelsNotIncreasing(f"levels must satisfy 0 < s_1 < ... < s_n, got {levels}")
    if any(a < 0 for a in alphas) or any(b < 0 for b in betas):
        raise DomainError("transform arguments must be non-negative")

    exponent = 0.0
    previous = 0.0
    for j in range(n):
        width = levels[j] - previous
        previous = levels[j]
        tail = range(j, n)
        if all(alphas[i] == 0 and betas[i] == 0 for i in tail):
            continue
        beta_sum = sum(betas[i] for i in tail)
        shifts = [levels[i] - levels[j] for i in tail]
        weights = [alphas[i] for i in tail]

        def integrand(t, shifts=shifts, weights=weights, beta_sum=beta_sum):
            theta = beta_sum + sum(w * h.at(s + t) for w, s in zip(weights, shifts))
            return phi_inverse(exp, theta)

        points = [p for s in shifts for p in _shifted_breakpoints(h, s, width)]
        exponent += _quad(integrand, width, points)
    return math.exp(-exponent)


# ============================================================================
# Means, covariances, correlation
# ============================================================================

def mean_area(exp: LaplaceExponent, h: HoldingFunction, x: float) -> float:
    """E A_x = (1/phi'(0)) int_0^x h."""
    return h.antiderivative(x) / exp.dphi0


def cov_area(exp: LaplaceExponent, h: HoldingFunction, g: HoldingFunction, x: float) -> float:
    """Cov(A_x, B_x) = phi''(0)/phi'(0)^3 int_0^x h g."""
    return exp.var_t1 * h.product_integral(g, x)


def var_area(exp: LaplaceExponent, h: HoldingFunction, x: float) -> float:
    return exp.var_t1 * h.power_integral(2, x)


def cov_area_T(exp: LaplaceExponent, h: HoldingFunction, x: float) -> float:
    """Cov(A_x, T_x) = phi''(0)/phi'(0)^3 int_0^x h."""
    return exp.var_t1 * h.antiderivative(x)


def cov_area_levels(exp: LaplaceExponent, h: HoldingFunction, x: float, y: float) -> float:
    """Cov(A_x, A_{x+y}) = Var T_1 int_0^x h(u) h(u + y) du; the increments of T past x are independent."""
    if x < 0 or y < 0:
        raise DomainError(f"need x, y >= 0, got x={x}, y={y}")
    if y == 0:
        return var_area(exp, h, x)
    points = _graded_points(h, x) + _shifted_breakpoints(h, y, x)
    return exp.var_t1 * _quad(lambda u: h.at(u) * h.at(u + y), x, points)


def corr_area(h: HoldingFunction, g: HoldingFunction, x: float) -> float:
    """Corr(A_x, B_x) = int h g / sqrt(int h^2 int g^2); takes no process."""
    hh = h.power_integral(2, x)
    gg = g.power_integral(2, x)
    if hh <= 0 or gg <= 0:
        raise DegenerateFunction(f"holding function vanishes a.e. on [0, {x}]")
    return h.product_integral(g, x) / math.sqrt(hh * gg)


def mean_two_level(exp: LaplaceExponent, h: HoldingFunction, x: float, y: float) -> float:
    """E A_{x,y} = (h(y-x) x + int_0^{y-x} h) / phi'(0)."""
    _check_two_level(x, y)
    return (h.at(y - x) * x + h.antiderivative(y - x)) / exp.dphi0


def var_two_level(exp: LaplaceExponent, h: HoldingFunction, x: float, y: float) -> float:
    """Var A_{x,y} = Var T_1 (h(y-x)^2 x + int_0^{y-x} h^2)."""
    _check_two_level(x, y)
    return exp.var_t1 * (h.at(y - x) ** 2 * x + h.power_integral(2, y - x))


def _check_two_level(x: float, y: float) -> None:
    if x < 0:
        raise DomainError(f"level must be non-negative, got x={x}")
    if x > y:
        raise OrderViolation(f"two-level area needs x <= y, got x={x}, y={y}")


# ============================================================================
# Moments
# ============================================================================

def _moment_recursion(c: Sequence[float], order: int) -> List[float]:
    """mu_{n+1} = sum_k C(n,k) c_{k+1} mu_{n-k}, mu_0 = 1; c[k] holds c_{k+1}."""
    mu = [1.0]
    for n in range(order):
        mu.append(sum(math.comb(n, k) * c[k] * mu[n - k] for k in range(n + 1)))
    return mu


def moments_area(exp: LaplaceExponent, h: HoldingFunction, x: float, order: int) -> MomentTable:
    """c_k = (-1)^{k-1} (phi^{-1})^{(k)}(0) int_0^x h^k, then mu_n by the recursion."""
    if order < 0:
        raise DomainError(f"order must be non-negative, got {order}")
    if order > exp.n_max:
        raise DomainError(f"order {order} exceeds the exponent's {exp.n_max} tabulated derivatives")
    if order == 0:
        return MomentTable(x=x)
    cumulants_t1 = subordinator_cumulants(exp, order)
    c = [float(cumulants_t1[k - 1] * h.power_integral(k, x)) for k in range(1, order + 1)]
    return MomentTable(x=x, c=c, mu=_moment_recursion(c, order))


def moments_random_order(exp: LaplaceExponent, rate: float, order: int) -> List[float]:
    """
    Random order size xi ~ Exp(rate), h(t) = t: the cumulant recursion with
    c_k averaged over xi,
    mu_{n+1} = n! sum_k (k+1) c_{k+1} / rate^{k+2} * mu_{n-k} / (n-k)!,
    c_k = (-1)^{k-1} (phi^{-1})^{(k)}(0). Returns mu_1..mu_order.
    mu_1 = E A_xi; for n >= 2 the averaging sits outside the exponential, so
    mu_2 - mu_1^2 = E[Var(A_xi | xi)] rather than Var A_xi.
    """
    if rate <= 0:
        raise DomainError(f"order-size rate must be positive, got {rate}")
    if order < 0:
        raise DomainError(f"order must be non-negative, got {order}")
    if order == 0:
        return []
    c = subordinator_cumulants(exp, order)
    mu = [1.0]
    for n in range(order):
        total = sum((k + 1) * c[k] / rate ** (k + 2) * mu[n - k] / math.factorial(n - k) for k in range(n + 1))
        mu.append(math.factorial(n) * total)
    return mu[1:]


# ============================================================================
# Long-run and steady-state averages
# ============================================================================

def longrun_average(h: HoldingFunction, x: float) -> float:
    """lim (1/t) int_0^t h(W^x - W) = (1/x) int_0^x h = E h(xU); independent of X."""
    if x <= 0:
        raise DomainError(f"level must be positive, got x={x}")
    return h.antiderivative(x) / x


def steady_state_mean_reflected(exp: LaplaceExponent) -> float:
    """Mean of the stationary W: phi''(0) / (2 phi'(0))."""
    return exp.d2phi0 / (2.0 * exp.dphi0)


def steady_state_mean_secondary(exp: LaplaceExponent, x: float) -> float:
    """Mean of the stationary W^x: stationary W plus an independent Uniform(0, x)."""
    return steady_state_mean_reflected(exp) + x / 2.0


# ============================================================================
# Gaussian limit
# ============================================================================

def gaussian_limit(exp: LaplaceExponent, h: HoldingFunction) -> GaussianLimit:
    return GaussianLimit(alpha=h.rv_index, var_t1=exp.var_t1)


def normalization(h: HoldingFunction, n: float) -> float:
    """h(n) sqrt(n); for power holding this is c n^{gamma + 1/2}."""
    return h.at(n) * math.sqrt(n)


def gaussian_limit_var(gl: GaussianLimit, x: float) -> float:
    """Var A*_x = Var T_1 x^{2 alpha + 1} / (2 alpha + 1)."""
    if x < 0:
        raise DomainError(f"level must be non-negative, got x={x}")
    e = 2.0 * gl.alpha + 1.0
    return gl.var_t1 * x ** e / e


def gaussian_limit_cov(gl: GaussianLimit, x: float, y: float) -> float:
    """Cov(A*_x, A*_{x+y}) = Var T_1 int_0^x [s (y + s)]^alpha ds."""
    if x < 0 or y < 0:
        raise DomainError(f"need x, y >= 0, got x={x}, y={y}")
    a = gl.alpha
    if y == 0:
        return gaussian_limit_var(gl, x)
    if float(a).is_integer():
        m = int(a)
        total = sum(special.comb(m, j, exact=True) * y ** (m - j) * x ** (m + j + 1) / (m + j + 1)
                    for j in range(m + 1))
        return gl.var_t1 * total
    return gl.var_t1 * _quad(lambda s: (s * (y + s)) ** a, x, [x * 1e-4, x * 1e-2] if a < 1 else [])


def gaussian_limit_corr(gl: GaussianLimit, x: float, y: float) -> float:
    """Corr(A*_x, A*_{x+y}); depends on x, y and alpha only."""
    denom = math.sqrt(gaussian_limit_var(gl, x) * gaussian_limit_var(gl, x + y))
    if denom == 0:
        raise DegenerateFunction("Gaussian limit has zero variance")
    return gaussian_limit_cov(gl, x, y) / denom
