"""
levyarea Series Inversion
Derivatives of phi^{-1} at zero from the derivatives of phi at zero by
reverting the truncated Taylor series of phi.

Coefficient sequences are scaled Taylor coefficients a_n = phi^{(n)}(0)/n!,
passed without the (zero) constant term: a[0] is a_1.
"""
import logging
import math
from typing import Sequence

import numpy as np

from ..config import DERIV_ORDER_HARD_CAP
from .errors import DomainError, NonInvertible
from .exponent import LaplaceExponent

logger = logging.getLogger(__name__)


# ============================================================================
# Truncated power-series arithmetic (index = power, length = order + 1)
# ============================================================================

def _full(coeffs: Sequence[float], order: int) -> np.ndarray:
    """Prepend the zero constant term and pad/truncate to `order`."""
    out = np.zeros(order + 1)
    c = np.asarray(coeffs, dtype=float)[:order]
    out[1:1 + len(c)] = c
    return out


def _mul(p: np.ndarray, q: np.ndarray, order: int) -> np.ndarray:
    return np.convolve(p[:order + 1], q[:order + 1])[:order + 1]


def _reciprocal(q: np.ndarray, order: int) -> np.ndarray:
    """1/q for q[0] != 0, by the triangular recurrence."""
    out = np.zeros(order + 1)
    out[0] = 1.0 / q[0]
    for n in range(1, order + 1):
        m = min(n, len(q) - 1)
        out[n] = -np.dot(q[1:m + 1], out[n - 1::-1][:m]) / q[0]
    return out


def _compose(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """a(b(t)) truncated at `order`; requires b[0] == 0 (Horner in b)."""
    result = np.zeros(order + 1)
    result[0] = a[order] if order < len(a) else 0.0
    for n in range(order - 1, -1, -1):
        result = _mul(result, b, order)
        result[0] += a[n] if n < len(a) else 0.0
    return result


def _derivative(a: np.ndarray) -> np.ndarray:
    return a[1:] * np.arange(1, len(a))


def compose_series(a: Sequence[float], b: Sequence[float], order: int) -> np.ndarray:
    """Coefficients 1..order of a(b(t)) for series without constant term."""
    composed = _compose(_full(a, order), _full(b, order), order)
    return composed[1:]


# ============================================================================
# Reversion
# ============================================================================

def revert_series(a: Sequence[float], order: int) -> np.ndarray:
    """
    Return b_1..b_order with a(b(t)) = t + O(t^{order+1}).

    Coefficients beyond len(a) are taken as zero, so a polynomial a reverts
    to any order. Newton iteration b <- b - (a(b) - t) / a'(b) in the
    truncated algebra; each step doubles the number of correct coefficients.
    """
    a = np.asarray(a, dtype=float)
    if order < 1:
        raise DomainError(f"reversion order must be >= 1, got {order}")
    if len(a) == 0 or not (a[0] > 0):
        raise NonInvertible(f"leading coefficient must be positive, got a_1={a[0]}")

    a_full = _full(a, order)
    da_full = _derivative(a_full)

    b = np.zeros(order + 1)
    b[1] = 1.0 / a_full[1]
    precision = 1
    iterations = 0
    while precision < order:
        precision = min(2 * precision, order)
        identity = np.zeros(precision + 1)
        identity[1] = 1.0
        residual = _compose(a_full, b, precision) - identity
        slope = _compose(da_full, b, precision)
        b[:precision + 1] -= _mul(residual, _reciprocal(slope, precision), precision)
        iterations += 1

    logger.debug(f"revert_series: order={order} in {iterations} Newton steps")
    return b[1:]


def inverse_derivs_at_zero(exp: LaplaceExponent, order: int) -> np.ndarray:
    """(phi^{-1})^{(k)}(0) for k = 1..order, i.e. k! * b_k."""
    if order > exp.n_max:
        raise DomainError(f"requested {order} derivatives but the exponent tabulates only {exp.n_max}")
    if order > DERIV_ORDER_HARD_CAP:
        raise DomainError(f"order must be <= {DERIV_ORDER_HARD_CAP}, got {order}")
    b = revert_series(exp.taylor_coefficients(), order)
    return np.array([math.factorial(k) * bk for k, bk in enumerate(b, start=1)])


def subordinator_cumulants(exp: LaplaceExponent, order: int) -> np.ndarray:
    """(-1)^{k-1} (phi^{-1})^{(k)}(0), k = 1..order; the cumulants of T_1, all >= 0."""
    derivs = inverse_derivs_at_zero(exp, order)
    signs = np.array([(-1.0) ** (k - 1) for k in range(1, order + 1)])
    return signs * derivs
