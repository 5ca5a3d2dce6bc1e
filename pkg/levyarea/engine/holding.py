"""
levyarea Holding Functions
Catalog of non-negative holding functions h with closed-form integrals of h^k.
"""
import bisect
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from ..config import QUAD_LIMIT
from .errors import DomainError, InvalidParameter

logger = logging.getLogger(__name__)

HOLDING_KINDS = ("constant", "linear", "power", "piecewise_linear")


@dataclass(frozen=True)
class HoldingFunction:
    """
    h(t) for t >= 0:
      constant          h(t) = c
      linear            h(t) = c t
      power             h(t) = c t^gamma
      piecewise_linear  linear interpolation through knots (t_i, v_i), t_0 = 0,
                        held constant at v_last beyond the last knot
    """
    kind: str
    c: float = 0.0
    gamma: float = 1.0
    knots: Tuple[Tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in HOLDING_KINDS:
            raise InvalidParameter(f"Unknown holding kind '{self.kind}', expected one of {HOLDING_KINDS}")
        if self.kind == "constant" and not (self.c >= 0 and math.isfinite(self.c)):
            raise InvalidParameter(f"constant holding needs c >= 0, got {self.c}")
        if self.kind in ("linear", "power") and not (self.c > 0 and math.isfinite(self.c)):
            raise InvalidParameter(f"{self.kind} holding needs c > 0, got {self.c}")
        if self.kind == "power" and not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise InvalidParameter(f"power holding needs gamma > 0, got {self.gamma}")
        if self.kind == "piecewise_linear":
            knots = tuple((float(t), float(v)) for t, v in self.knots)
            object.__setattr__(self, "knots", knots)
            if len(knots) < 1:
                raise InvalidParameter("piecewise_linear holding needs at least one knot")
            if knots[0][0] != 0.0:
                raise InvalidParameter(f"first knot must sit at t=0, got t={knots[0][0]}")
            ts = [t for t, _ in knots]
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise InvalidParameter(f"knot abscissae must be strictly increasing, got {ts}")
            if any(v < 0 or not math.isfinite(v) for _, v in knots):
                raise InvalidParameter("knot values must be non-negative and finite")

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def constant(cls, c: float) -> "HoldingFunction":
        return cls(kind="constant", c=c)

    @classmethod
    def linear(cls, c: float = 1.0) -> "HoldingFunction":
        return cls(kind="linear", c=c)

    @classmethod
    def power(cls, c: float, gamma: float) -> "HoldingFunction":
        return cls(kind="power", c=c, gamma=gamma)

    @classmethod
    def piecewise_linear(cls, knots: Sequence[Sequence[float]]) -> "HoldingFunction":
        return cls(kind="piecewise_linear", knots=tuple(tuple(k) for k in knots))

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def __call__(self, t):
        return self.value(t)

    def value(self, t):
        """h(t); accepts scalars or numpy arrays."""
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0):
            raise DomainError("holding functions are defined on [0, inf)")
        if self.kind == "constant":
            out = np.full_like(arr, self.c)
        elif self.kind == "linear":
            out = self.c * arr
        elif self.kind == "power":
            out = self.c * np.power(arr, self.gamma)
        else:
            ts, vs = self._knot_arrays()
            out = np.interp(arr, ts, vs)
        return float(out) if out.ndim == 0 else out

    def at(self, t: float) -> float:
        """Scalar h(t) without numpy overhead; used in the per-event simulation loop."""
        if self.kind == "constant":
            return self.c
        if self.kind == "linear":
            return self.c * t
        if self.kind == "power":
            return self.c * t ** self.gamma
        knots = self.knots
        if t >= knots[-1][0]:
            return knots[-1][1]
        i = bisect.bisect_right([k[0] for k in knots], t) - 1
        (t0, v0), (t1, v1) = knots[i], knots[i + 1]
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0)

    def _knot_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        ts = np.array([t for t, _ in self.knots])
        vs = np.array([v for _, v in self.knots])
        return ts, vs

    def breakpoints(self, upper: float) -> List[float]:
        """Interior points of (0, upper) where h has a kink."""
        if self.kind != "piecewise_linear":
            return []
        return [t for t, _ in self.knots if 0.0 < t < upper]

    # ------------------------------------------------------------------
    # Integrals
    # ------------------------------------------------------------------

    def antiderivative(self, x: float) -> float:
        """int_0^x h(y) dy."""
        return self.power_integral(1, x)

    def integral(self, a: float, b: float) -> float:
        """int_a^b h(y) dy for 0 <= a <= b."""
        return self.antiderivative(b) - self.antiderivative(a)

    def power_integral(self, k: int, x: float) -> float:
        """int_0^x h(y)^k dy, closed form for every catalog kind."""
        if x < 0:
            raise DomainError(f"upper limit must be non-negative, got {x}")
        if k < 0:
            raise DomainError(f"power must be non-negative, got {k}")
        if x == 0:
            return 0.0
        if k == 0:
            return x
        if self.kind == "constant":
            return self.c ** k * x
        if self.kind == "linear":
            return self.c ** k * x ** (k + 1) / (k + 1)
        if self.kind == "power":
            e = k * self.gamma + 1.0
            return self.c ** k * x ** e / e
        return self._piecewise_power_integral(k, x)

    def _piecewise_power_integral(self, k: int, x: float) -> float:
        knots = list(self.knots)
        total = 0.0
        for (t0, v0), (t1, v1) in zip(knots, knots[1:]):
            if t0 >= x:
                break
            if t1 > x:
                v1 = v0 + (v1 - v0) * (x - t0) / (t1 - t0)
                t1 = x
            total += _linear_piece_power_integral(t0, v0, t1, v1, k)
        t_last, v_last = knots[-1]
        if x > t_last:
            total += v_last ** k * (x - t_last)
        return total

    def product_integral(self, other: "HoldingFunction", x: float) -> float:
        """int_0^x h(y) g(y) dy; closed form when both are monomials, quadrature otherwise."""
        if x == 0:
            return 0.0
        if other is self or other == self:
            return self.power_integral(2, x)
        mono = self._monomial()
        other_mono = other._monomial()
        if mono is not None and other_mono is not None:
            (c1, g1), (c2, g2) = mono, other_mono
            e = g1 + g2 + 1.0
            return c1 * c2 * x ** e / e
        points = sorted(set(self.breakpoints(x) + other.breakpoints(x)))
        value, _ = integrate.quad(lambda y: self.value(y) * other.value(y), 0.0, x,
                                  points=points or None, limit=QUAD_LIMIT)
        return value

    def _monomial(self) -> Optional[Tuple[float, float]]:
        """(c, gamma) with h(t) = c t^gamma when h is a monomial."""
        if self.kind == "constant":
            return self.c, 0.0
        if self.kind == "linear":
            return self.c, 1.0
        if self.kind == "power":
            return self.c, self.gamma
        return None

    # ------------------------------------------------------------------
    # Shape
    # ------------------------------------------------------------------

    def is_nondecreasing(self) -> bool:
        """Constant, linear and power always are; piecewise_linear is checked knot-wise."""
        if self.kind != "piecewise_linear":
            return True
        vs = [v for _, v in self.knots]
        return all(b >= a for a, b in zip(vs, vs[1:]))

    def is_zero_on(self, x: float) -> bool:
        return self.power_integral(2, x) == 0.0

    @property
    def rv_index(self) -> float:
        """Regular-variation index of h at infinity."""
        if self.kind == "constant":
            return 0.0
        if self.kind == "linear":
            return 1.0
        if self.kind == "power":
            return self.gamma
        return 0.0

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "c": self.c}
        if self.kind == "linear":
            return {"kind": "linear", "c": self.c}
        if self.kind == "power":
            return {"kind": "power", "c": self.c, "gamma": self.gamma}
        return {"kind": "piecewise_linear", "knots": [[t, v] for t, v in self.knots]}


def _linear_piece_power_integral(t0: float, v0: float, t1: float, v1: float, k: int) -> float:
    """int_{t0}^{t1} (v0 + s (t - t0))^k dt for the chord through (t0, v0), (t1, v1)."""
    dt = t1 - t0
    if dt <= 0:
        return 0.0
    if v1 == v0:
        return v0 ** k * dt
    slope = (v1 - v0) / dt
    return (v1 ** (k + 1) - v0 ** (k + 1)) / ((k + 1) * slope)


ONE = HoldingFunction.constant(1.0)
