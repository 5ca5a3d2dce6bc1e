"""
levyarea Inventory
Secondary-work ordering: each time the server idles it pulls an order of size
x, paying setup cost K plus holding cost h(content) per unit time while the
order is worked off. Long-run cost, optimal order size, break-even penalty and
the multi-class variants.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import integrate

from ..config import BISECT_RTOL, QUAD_LIMIT, UNIMODALITY_GRID, UNIMODALITY_TOL, X_CAP_SCALE
from .errors import BadProportions, DomainError, InvalidParameter, UnboundedUpstream
from .exponent import LaplaceExponent
from .holding import HoldingFunction

logger = logging.getLogger(__name__)

_PROPORTION_TOL = 1e-12


@dataclass(frozen=True)
class CostModel:
    """Setup cost K, nondecreasing holding function h, the process and an optional per-unit reward r."""
    K: float
    h: HoldingFunction
    exp: LaplaceExponent
    r: float = 0.0

    def __post_init__(self):
        if not (self.K > 0 and math.isfinite(self.K)):
            raise InvalidParameter(f"setup cost K must be positive, got {self.K}")
        if not self.h.is_nondecreasing():
            raise InvalidParameter("holding function must be nondecreasing for the ordering problem")
        if not math.isfinite(self.r):
            raise InvalidParameter(f"reward r must be finite, got {self.r}")

    @property
    def k_prime(self) -> float:
        """K' = phi'(0) K, the setup cost per unit of idle capacity."""
        return self.exp.dphi0 * self.K


@dataclass
class OptimalOrder:
    """x* and its cost, or bounded=False when no finite minimizer exists below x_cap."""
    bounded: bool
    x_star: Optional[float]
    cost: Optional[float]
    x_cap: float
    k_prime: float

    def to_dict(self) -> dict:
        return {"x_star": self.x_star, "cost": self.cost, "bounded": self.bounded, "x_cap": self.x_cap}


@dataclass
class MulticlassSolution:
    x: float
    proportions: List[float]
    objective: float
    unique: bool

    def to_dict(self) -> dict:
        return {"x": self.x, "proportions": self.proportions, "objective": self.objective, "unique": self.unique}


@dataclass
class FixedProportionsSolution:
    """Optimum over x for fixed class proportions; convex=False means x_star is a grid minimizer."""
    x_star: Optional[float]
    cost: Optional[float]
    convex: bool
    bounded: bool

    def to_dict(self) -> dict:
        return {"x_star": self.x_star, "cost": self.cost, "convex": self.convex, "bounded": self.bounded}


# ============================================================================
# Single class
# ============================================================================

def average_cost(cm: CostModel, x: float) -> float:
    """(phi'(0) K + int_0^x h) / x."""
    if x <= 0:
        raise DomainError(f"order size must be positive, got x={x}")
    return (cm.k_prime + cm.h.antiderivative(x)) / x


def g_function(cm: CostModel, x: float) -> float:
    """g(x) = x h(x) - int_0^x h; nondecreasing with g(0) = 0."""
    if x < 0:
        raise DomainError(f"order size must be non-negative, got x={x}")
    if x == 0:
        return 0.0
    return x * cm.h.at(x) - cm.h.antiderivative(x)


def _generalized_inverse(G: Callable[[float], float], target: float, cap: float) -> Optional[float]:
    """inf{x > 0 : G(x) >= target} for nondecreasing G, or None if G(cap) < target."""
    if G(cap) < target:
        return None
    hi = 1.0
    while G(hi) < target:
        hi = min(2.0 * hi, cap)
    while hi > 1e-300 and G(0.5 * hi) >= target:
        hi *= 0.5
    lo = 0.5 * hi
    while hi - lo > BISECT_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if G(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def optimal_order(cm: CostModel, scale: float = 1.0) -> OptimalOrder:
    """
    x* = inf{x : g(x) >= K'}. The cost derivative has the sign of g(x) - K',
    so cost decreases before x* and is nondecreasing after it. If g stays
    below K' up to x_cap = X_CAP_SCALE * scale the result is unbounded.
    """
    cap = X_CAP_SCALE * max(scale, 1.0)
    k_prime = cm.k_prime
    x_star = _generalized_inverse(lambda x: g_function(cm, x), k_prime, cap)
    if x_star is None:
        logger.info(f"No finite optimal order: g({cap:.3g}) < K'={k_prime:.6g}")
        return OptimalOrder(bounded=False, x_star=None, cost=None, x_cap=cap, k_prime=k_prime)
    cost = average_cost(cm, x_star)
    logger.info(f"Optimal order x*={x_star:.12g}, cost={cost:.12g}")
    return OptimalOrder(bounded=True, x_star=x_star, cost=cost, x_cap=cap, k_prime=k_prime)


def unimodality_certificate(cm: CostModel, x_star: float, n: int = UNIMODALITY_GRID,
                            tol: float = UNIMODALITY_TOL) -> bool:
    """Cost nonincreasing on a log grid left of x* and nondecreasing right of it."""
    if x_star <= 0:
        raise DomainError(f"x* must be positive, got {x_star}")
    grid = np.logspace(-3, 3, n) * x_star
    costs = np.array([average_cost(cm, x) for x in grid])
    scale = np.maximum(np.abs(costs[:-1]), 1.0)
    steps = np.diff(costs)
    left = grid[1:] <= x_star
    right = grid[:-1] >= x_star
    ok_left = bool(np.all(steps[left] <= tol * scale[left]))
    ok_right = bool(np.all(steps[right] >= -tol * scale[right]))
    if not (ok_left and ok_right):
        logger.warning(f"Unimodality check failed around x*={x_star:.6g}")
    return ok_left and ok_right


def break_even_penalty(cm: CostModel, order: Optional[OptimalOrder] = None) -> float:
    """p* = (K + (1/phi'(0)) int_0^{x*} h) / x* - r."""
    order = order or optimal_order(cm)
    if not order.bounded:
        raise UnboundedUpstream("break-even penalty needs a finite optimal order size")
    x = order.x_star
    return (cm.K + cm.h.antiderivative(x) / cm.exp.dphi0) / x - cm.r


# ============================================================================
# Multiple classes
# ============================================================================

def _check_proportions(p: Sequence[float], m: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if len(p) != m:
        raise BadProportions(f"need {m} proportions, got {len(p)}")
    if np.any(p < 0) or abs(float(p.sum()) - 1.0) > _PROPORTION_TOL:
        raise BadProportions(f"proportions must be non-negative and sum to 1, got {p.tolist()}")
    return p


def multiclass_cost(hs: Sequence[HoldingFunction], p: Sequence[float], x: float, K: float, dphi0: float) -> float:
    """
    phi'(0) K / x + sum_i ( int_0^{p_i} h_i(x s) ds + F_{i-1} h_i(p_i x) ),
    F_i = p_1 + ... + p_i; class i is held in the content band above classes 1..i-1.
    """
    if x <= 0:
        raise DomainError(f"order size must be positive, got x={x}")
    p = _check_proportions(p, len(hs))
    F = np.concatenate(([0.0], np.cumsum(p)))
    total = dphi0 * K / x
    for i, (h, pi) in enumerate(zip(hs, p)):
        if pi == 0:
            continue
        points = [t / x for t in h.breakpoints(pi * x)]
        band, _ = integrate.quad(lambda s: h.at(x * s), 0.0, pi, points=points or None,
                                 epsabs=0.0, epsrel=1e-13, limit=QUAD_LIMIT)
        total += band + F[i] * h.at(pi * x)
    return total


def multiclass_linear(costs: Sequence[float], K: float, dphi0: float) -> MulticlassSolution:
    """
    Linear holding c_i t per class: all mass on a cheapest class and
    x = sqrt(2 phi'(0) K / c_min). When every c_i is equal any split is optimal
    and the uniform split is returned.
    """
    costs = [float(c) for c in costs]
    if not costs or any(c <= 0 for c in costs):
        raise InvalidParameter(f"class costs must be positive, got {costs}")
    if K <= 0 or dphi0 <= 0:
        raise InvalidParameter(f"need K > 0 and phi'(0) > 0, got K={K}, phi'(0)={dphi0}")
    c_min = min(costs)
    x = math.sqrt(2.0 * dphi0 * K / c_min)
    m = len(costs)
    if all(c == c_min for c in costs):
        proportions = [1.0 / m] * m
        unique = m == 1
    else:
        best = costs.index(c_min)
        proportions = [1.0 if i == best else 0.0 for i in range(m)]
        unique = costs.count(c_min) == 1
    objective = math.sqrt(2.0 * dphi0 * K * c_min)
    return MulticlassSolution(x=x, proportions=proportions, objective=objective, unique=unique)


def convexity_check(H: Callable[[float], float], grid: Sequence[float], tol: float = UNIMODALITY_TOL) -> bool:
    """Chord slopes of H over the (possibly uneven) grid are nondecreasing."""
    grid = np.asarray(grid, dtype=float)
    values = np.array([H(x) for x in grid])
    slopes = np.diff(values) / np.diff(grid)
    jumps = np.diff(slopes)
    return bool(np.all(jumps >= -tol * np.maximum(np.abs(slopes[:-1]), 1.0)))


def multiclass_fixed_proportions(hs: Sequence[HoldingFunction], p: Sequence[float], K: float, dphi0: float,
                                 scale: float = 1.0) -> FixedProportionsSolution:
    """
    Minimize multiclass_cost over x for fixed p. With
    H(x) = x * sum_i ( int_0^{p_i} h_i(x s) ds + F_{i-1} h_i(p_i x) )
    the cost is (K' + H(x))/x; when H is convex the minimizer is
    inf{x : x H'(x) - H(x) >= K'}. Otherwise the grid minimizer is returned.
    """
    p = _check_proportions(p, len(hs))
    F = np.concatenate(([0.0], np.cumsum(p)))
    k_prime = dphi0 * K

    def H(x: float) -> float:
        return sum(h.antiderivative(pi * x) + x * F[i] * h.at(pi * x) for i, (h, pi) in enumerate(zip(hs, p)))

    def cost(x: float) -> float:
        return (k_prime + H(x)) / x

    grid = np.logspace(-4, 4, UNIMODALITY_GRID) * scale
    if not convexity_check(H, grid):
        logger.warning("H is not convex on the check grid; returning the grid minimizer of the cost")
        costs = np.array([cost(x) for x in grid])
        best = int(np.argmin(costs))
        return FixedProportionsSolution(x_star=float(grid[best]), cost=float(costs[best]), convex=False,
                                        bounded=0 < best < len(grid) - 1)

    def G(x: float) -> float:
        step = 1e-6 * x
        slope = (H(x + step) - H(x - step)) / (2.0 * step)
        return x * slope - H(x)

    x_star = _generalized_inverse(G, k_prime, X_CAP_SCALE * max(scale, 1.0))
    if x_star is None:
        return FixedProportionsSolution(x_star=None, cost=None, convex=True, bounded=False)
    return FixedProportionsSolution(x_star=x_star, cost=cost(x_star), convex=True, bounded=True)
