"""
levyarea Verify Harness
Cross-oracle invariant suite: analytic formulas against each other and
against the exact Monte Carlo oracle for one process / holding / level.
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .area import (
    corr_area, cov_area_levels, gaussian_limit, gaussian_limit_corr, gaussian_limit_var, joint_lst_fidi,
    longrun_average, lst_area, lst_two_level, mean_area, mean_two_level, moments_area, normalization, var_area,
)
from .errors import LevyAreaError
from .exponent import JumpDistribution, LaplaceExponent, ProcessSpec, build_exponent, phi, phi_inverse
from .holding import ONE, HoldingFunction
from .inventory import CostModel, g_function, optimal_order, unimodality_certificate
from .inversion import compose_series, inverse_derivs_at_zero, revert_series, subordinator_cumulants
from .sim import (
    EstimateTargets, additivity_check, clt_experiment, estimate, longrun_experiment, path_invariants,
    replication_rng, sample_excursion,
)

logger = logging.getLogger(__name__)

# second process for the long-run check; the limit must not depend on X
_REFERENCE_SPEC = ProcessSpec(drift=-1.0, jump_rate=0.5, jump_dist=JumpDistribution.deterministic(1.0))
_TAYLOR_ORDERS = 4
_LIMIT_SCALE = 1e6


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _taylor_radius(coeffs) -> float:
    """Rough radius of convergence from |a_1 / a_n|^{1/(n-1)}; 1 when the series is linear."""
    a1 = abs(coeffs[0])
    radii = [(a1 / abs(a)) ** (1.0 / (n - 1)) for n, a in enumerate(coeffs, start=1) if n > 1 and a != 0]
    return min(radii) if radii else 1.0


def _remainder_error(f: Callable[[float], float], derivs, k: int, at: float) -> float:
    """
    Relative gap between f(at) minus its degree-k Taylor polynomial and the
    next Taylor term. Small only when derivs[0..k] are the derivatives of f at 0.
    """
    value = f(at)
    poly = sum(d * at ** n / math.factorial(n) for n, d in enumerate(derivs[:k], start=1))
    leading = derivs[k] * at ** (k + 1) / math.factorial(k + 1)
    return abs(value - poly - leading) / (abs(leading) + 1e-11 * abs(value))


def _has_gaussian_limit(h: HoldingFunction, n: float) -> bool:
    if h.kind == "piecewise_linear" and h.knots[-1][1] == 0.0:
        return False
    return h.at(n) > 0


class VerifyHarness:
    """Runs every invariant check for one (process, holding function, level)."""

    def __init__(
        self,
        spec: ProcessSpec,
        h: HoldingFunction,
        x: float,
        reps: int = 10_000,
        seed: int = 0,
        threads: Optional[int] = None,
        se_k: float = 3.0,
        alphas: tuple = (0.25, 0.5, 1.0, 2.0),
        K: float = 1.0,
    ):
        self.spec = spec
        self.h = h
        self.x = x
        self.reps = reps
        self.seed = seed
        self.threads = threads
        self.se_k = se_k
        self.alphas = alphas
        self.K = K
        self.exp: LaplaceExponent = build_exponent(spec)

        logger.info(f"VerifyHarness initialized: x={x}, reps={reps}, seed={seed}")

    # ------------------------------------------------------------------
    # Analytic checks
    # ------------------------------------------------------------------

    def check_exponent(self) -> CheckResult:
        grid = np.linspace(0.0, 10.0, 101)
        values = np.array([phi(self.exp, a) for a in grid])
        increasing = bool(np.all(np.diff(values) > 0))
        convex = bool(np.all(np.diff(values, 2) >= -1e-9 * np.maximum(np.abs(values[2:]), 1.0)))
        worst = max(abs(phi(self.exp, phi_inverse(self.exp, t)) - t) / max(1.0, t) for t in values[1:])
        passed = values[0] == 0.0 and increasing and convex and worst <= 1e-9
        return CheckResult("exponent", passed,
                           f"phi(0)={values[0]}, increasing={increasing}, convex={convex}, max inverse residual={worst:.2e}")

    def check_derivatives(self) -> CheckResult:
        """deriv0 against phi, and the reverted derivatives against phi^{-1}, through Taylor remainders."""
        orders = min(_TAYLOR_ORDERS, self.exp.n_max - 1)
        inverse = inverse_derivs_at_zero(self.exp, self.exp.n_max)
        b = [d / math.factorial(n) for n, d in enumerate(inverse, start=1)]
        alpha = 0.01 * _taylor_radius(self.exp.taylor_coefficients())
        theta = 0.01 * _taylor_radius(b)
        worst_phi = max(_remainder_error(lambda a: phi(self.exp, a), self.exp.deriv0, k, alpha)
                        for k in range(1, orders + 1))
        worst_inv = max(_remainder_error(lambda t: phi_inverse(self.exp, t), inverse, k, theta)
                        for k in range(1, orders + 1))
        return CheckResult("derivatives", max(worst_phi, worst_inv) <= 0.2,
                           f"orders 1..{orders}: phi remainder error={worst_phi:.2e} at {alpha:.3g}, "
                           f"phi^-1 remainder error={worst_inv:.2e} at {theta:.3g}")

    def check_reversion(self) -> CheckResult:
        a = self.exp.taylor_coefficients()
        order = self.exp.n_max
        b = revert_series(a, order)
        identity = compose_series(a, b, order)
        identity[0] -= 1.0
        # rounding in each coefficient scales with the sum of its terms in absolute value
        magnitude = np.maximum(compose_series(np.abs(a), np.abs(b), order), 1.0)
        err = float(np.max(np.abs(identity) / magnitude))
        return CheckResult("reversion", err <= 1e-9, f"order={order}, scaled coefficient error of phi(phi^-1(t)) - t={err:.2e}")

    def check_reversion_signs(self) -> CheckResult:
        """(phi^{-1})^{(k)}(0) alternates in sign: the cumulants of T_1 are non-negative."""
        cumulants = subordinator_cumulants(self.exp, self.exp.n_max)
        tol = 1e-9 * max(1.0, float(np.max(np.abs(cumulants))))
        bad = [k for k, c in enumerate(cumulants, start=1) if c < -tol]
        return CheckResult("reversion_signs", not bad, f"orders with the wrong sign: {bad}")

    def check_moments(self) -> CheckResult:
        table = moments_area(self.exp, self.h, self.x, 2)
        mean, var = mean_area(self.exp, self.h, self.x), var_area(self.exp, self.h, self.x)
        ok = math.isclose(table.mean, mean, rel_tol=1e-10) and math.isclose(table.variance, var, rel_tol=1e-10, abs_tol=1e-14)
        return CheckResult("moments", ok, f"mu1={table.mean:.12g} vs {mean:.12g}, var={table.variance:.12g} vs {var:.12g}")

    def check_lst_shape(self) -> CheckResult:
        values = [lst_area(self.exp, self.h, self.x, a) for a in (0.0,) + tuple(self.alphas)]
        ok = values[0] == 1.0 and all(b <= a for a, b in zip(values, values[1:])) and all(0 < v <= 1 for v in values)
        return CheckResult("lst_shape", ok, f"LST on (0,{self.alphas}) = {[round(v, 10) for v in values]}")

    def check_complete_monotonicity(self, orders: int = 4, points: int = 9) -> CheckResult:
        """(-1)^k k-th differences of the LST are >= 0 on an even grid, and chords lie above the curve."""
        mean = mean_area(self.exp, self.h, self.x)
        step = 1.0 / mean if mean > 0 else 1.0
        lst = lambda a: lst_area(self.exp, self.h, self.x, a)
        values = np.array([lst(j * step) for j in range(points)])
        worst = min(float(np.min((-1) ** k * np.diff(values, k))) for k in range(1, orders + 1))
        chords = [(0.5 * step, 3.7 * step), (0.0, 6.0 * step), (1.3 * step, 2.1 * step)]
        chord_ok = all(lst(0.5 * (a + b)) <= 0.5 * (lst(a) + lst(b)) + 1e-9 for a, b in chords)
        return CheckResult("complete_monotonicity", worst >= -1e-8 and chord_ok,
                           f"min signed difference through order {orders}={worst:.2e}, chords above curve={chord_ok}")

    def check_gaussian_limit(self, y_ratio: float = 0.5) -> CheckResult:
        """Variance and correlation of the scaled areas at n = 1e6 against the Gaussian limit."""
        n = _LIMIT_SCALE
        if not _has_gaussian_limit(self.h, n):
            return CheckResult("gaussian_limit", True, "h vanishes at infinity, no Gaussian limit to compare")
        gl = gaussian_limit(self.exp, self.h)
        x, y = self.x, y_ratio * self.x
        norm2 = normalization(self.h, n) ** 2
        var_x, var_xy = var_area(self.exp, self.h, n * x), var_area(self.exp, self.h, n * (x + y))
        limit_var = gaussian_limit_var(gl, x)
        if limit_var == 0:
            return CheckResult("gaussian_limit", var_x == 0, "Var T_1 = 0, degenerate limit")
        corr_n = cov_area_levels(self.exp, self.h, n * x, n * y) / math.sqrt(var_x * var_xy)
        corr_limit = gaussian_limit_corr(gl, x, y)
        ok = math.isclose(var_x / norm2, limit_var, rel_tol=1e-3) and abs(corr_n - corr_limit) <= 1e-3
        return CheckResult("gaussian_limit", ok,
                           f"var {var_x / norm2:.8g} vs {limit_var:.8g}, corr {corr_n:.8f} vs {corr_limit:.8f}")

    def check_inventory(self) -> List[CheckResult]:
        """x* satisfies g(x*) >= K' > g(x) for x < x*, cost is unimodal there, constant h is unbounded."""
        if not self.h.is_nondecreasing():
            return [CheckResult("inventory", True, "h is not nondecreasing, no ordering problem")]
        cm = CostModel(K=self.K, h=self.h, exp=self.exp)
        k_prime = cm.k_prime
        order = optimal_order(cm)
        results = []
        if order.bounded:
            x_star = order.x_star
            tol = 1e-8 * max(1.0, k_prime)
            at, below = g_function(cm, x_star), g_function(cm, x_star * (1.0 - 1e-6))
            results.append(CheckResult("inventory_foc", at >= k_prime - tol and below <= k_prime + tol,
                                       f"x*={x_star:.10g}, g(x*)={at:.10g}, K'={k_prime:.10g}"))
            results.append(CheckResult("inventory_unimodal", unimodality_certificate(cm, x_star),
                                       f"cost on a log grid around x*={x_star:.6g}"))
        else:
            top = g_function(cm, order.x_cap)
            results.append(CheckResult("inventory_foc", top < k_prime,
                                       f"unbounded: g({order.x_cap:.3g})={top:.6g} < K'={k_prime:.6g}"))
        flat = optimal_order(CostModel(K=self.K, h=ONE, exp=self.exp))
        results.append(CheckResult("inventory_unbounded", not flat.bounded, "constant holding has no finite x*"))
        return results

    # ------------------------------------------------------------------
    # Monte Carlo checks
    # ------------------------------------------------------------------

    def check_oracle(self) -> List[CheckResult]:
        """Mean, variance, LST grid, Corr(A_x, T_x), two-level mean and a 2-level fidi transform."""
        lower = 0.5 * self.x
        levels = [lower, self.x]
        targets = EstimateTargets(lst=self.alphas, two_level_lower=lower, two_level_lst=(1.0,),
                                  fidi_levels=levels, fidi_alphas=[0.5, 0.5], fidi_betas=[0.1, 0.0])
        est = estimate(self.spec, self.h, self.x, self.reps, self.seed, targets=targets, threads=self.threads)
        k = self.se_k
        results = []

        mean = mean_area(self.exp, self.h, self.x)
        results.append(CheckResult("mc_mean", est["mean"].within(mean, k),
                                   f"{est['mean'].value:.6g} +/- {est['mean'].stderr:.2g} vs {mean:.6g}"))
        var = var_area(self.exp, self.h, self.x)
        results.append(CheckResult("mc_var", est["var"].within(var, k),
                                   f"{est['var'].value:.6g} +/- {est['var'].stderr:.2g} vs {var:.6g}"))
        for alpha in self.alphas:
            name = f"lst[{alpha:g}]"
            target = lst_area(self.exp, self.h, self.x, alpha)
            results.append(CheckResult(f"mc_{name}", est[name].within(target, k),
                                       f"{est[name].value:.6g} +/- {est[name].stderr:.2g} vs {target:.6g}"))

        if not self.h.is_zero_on(self.x) and self.exp.var_t1 > 0:
            rho = corr_area(self.h, ONE, self.x)
            got = est["corr_T"]
            results.append(CheckResult("mc_corr_T", abs(got.value - rho) <= max(0.02, k * got.stderr),
                                       f"{got.value:.5f} vs {rho:.5f}"))

        two = mean_two_level(self.exp, self.h, lower, self.x)
        results.append(CheckResult("mc_two_level", est["mean_two_level"].within(two, k),
                                   f"{est['mean_two_level'].value:.6g} vs {two:.6g}"))
        fidi = joint_lst_fidi(self.exp, self.h, levels, [0.5, 0.5], [0.1, 0.0])
        results.append(CheckResult("mc_fidi", est["fidi"].within(fidi, k),
                                   f"{est['fidi'].value:.6g} +/- {est['fidi'].stderr:.2g} vs {fidi:.6g}"))
        two_lst = lst_two_level(self.exp, self.h, lower, self.x, 1.0)
        got = est["lst_two_level[1]"]
        results.append(CheckResult("mc_two_level_lst", got.within(two_lst, k),
                                   f"{got.value:.6g} +/- {got.stderr:.2g} vs {two_lst:.6g}"))
        return results

    def check_pathwise(self, n_paths: int = 1000) -> CheckResult:
        failures = {"crossing": 0, "endpoint": 0, "ordering": 0, "identity": 0}
        n_paths = min(n_paths, self.reps)
        for i in range(n_paths):
            rec = sample_excursion(self.spec, self.h, self.x, replication_rng(self.seed, i, tag=7), keep_path=True)
            for key, ok in path_invariants(rec).items():
                failures[key] += 0 if ok else 1
        passed = not any(failures.values())
        return CheckResult("pathwise", passed, f"{n_paths} paths, failures={failures}")

    def check_determinism(self, reps: int = 2_500) -> CheckResult:
        runs = [estimate(self.spec, self.h, self.x, reps, self.seed, threads=t) for t in (1, 2, 8)]
        dumps = [{k: v.to_dict() for k, v in run.items()} for run in runs]
        same = all(d == dumps[0] for d in dumps[1:])
        return CheckResult("determinism", same, f"{reps} reps on 1, 2 and 8 workers")

    def check_longrun(self, cycles: int = 1_000) -> List[CheckResult]:
        """Time average of h(W^x - W) on this process and on a reference process, against (1/x) int_0^x h."""
        target = longrun_average(self.h, self.x)
        results = []
        for name, spec in (("longrun", self.spec), ("longrun_reference", _REFERENCE_SPEC)):
            horizon = cycles * self.x / build_exponent(spec).dphi0
            got = longrun_experiment(spec, self.h, self.x, horizon, self.seed).average
            results.append(CheckResult(name, got.within(target, self.se_k),
                                       f"{got.value:.6g} +/- {got.stderr:.2g} vs {target:.6g}"))
        return results

    def check_clt_variance(self, n_scale: float = 20.0) -> CheckResult:
        """Sample variance of (A_{nx} - E A_{nx}) / (h(n) sqrt(n)) against its exact value."""
        if not _has_gaussian_limit(self.h, n_scale):
            return CheckResult("clt_variance", True, "h vanishes at infinity, no Gaussian limit to compare")
        result = clt_experiment(self.spec, self.h, self.x, n_scale=n_scale, n_reps=min(self.reps, 2_000),
                                seed=self.seed, threads=self.threads)
        exact = var_area(self.exp, self.h, n_scale * self.x) / normalization(self.h, n_scale) ** 2
        centered = result.samples - result.sample_mean
        m4 = float(np.mean(centered ** 4))
        stderr = math.sqrt(max(m4 - result.sample_var ** 2, 0.0) / len(centered))
        ok = abs(result.sample_var - exact) <= self.se_k * stderr + 1e-9 * max(1.0, exact)
        return CheckResult("clt_variance", ok, f"n={n_scale:g}: {result.sample_var:.6g} +/- {stderr:.2g} vs "
                                               f"{exact:.6g} (limit {result.limit_var:.6g})")

    def check_additivity(self) -> CheckResult:
        half = 0.5 * self.x
        statistic, pvalue = additivity_check(self.spec, half, half, min(self.reps, 2_000), self.seed, self.threads)
        return CheckResult("additivity", pvalue > 1e-3,
                           f"KS of T_x against independent T_(x/2) + T'_(x/2): D={statistic:.4f}, p={pvalue:.3g}")

    # ------------------------------------------------------------------

    def run_all(self) -> List[CheckResult]:
        logger.info("Running full verification suite")
        t0 = time.time()
        checks: List[Callable[[], object]] = [
            self.check_exponent, self.check_derivatives, self.check_reversion, self.check_reversion_signs,
            self.check_moments, self.check_lst_shape, self.check_complete_monotonicity,
            self.check_gaussian_limit, self.check_inventory,
        ]
        if self.spec.is_finite_activity:
            checks += [self.check_oracle, self.check_pathwise, self.check_determinism, self.check_longrun,
                       self.check_clt_variance, self.check_additivity]
        else:
            logger.warning("sigma2 > 0: exact Monte Carlo checks skipped")

        results: List[CheckResult] = []
        for check in checks:
            try:
                out = check()
            except LevyAreaError as e:
                out = CheckResult(check.__name__.replace("check_", ""), False, f"{type(e).__name__}: {e}")
            results.extend(out if isinstance(out, list) else [out])

        failed = [r.name for r in results if not r.passed]
        logger.info(f"Verification finished in {time.time() - t0:.1f}s: "
                    f"{len(results) - len(failed)}/{len(results)} passed")
        if failed:
            logger.warning(f"Failed checks: {failed}")
        return results
