"""
levyarea Desk-Scale Acceptance Run

Runs the Monte Carlo acceptance criteria at full size (10^4 - 10^5
replications) and the analytic ones they are compared with.

Usage:
    uv run python scripts/run_acceptance.py
    uv run python scripts/run_acceptance.py --seed 11 --threads 4

Returns exit code 0 if every criterion passes.
"""
import argparse
import math
import sys
import time

import numpy as np

from levyarea.engine.area import corr_area, lst_area, mean_area, moments_area, var_area
from levyarea.engine.exponent import JumpDistribution, ProcessSpec, build_exponent
from levyarea.engine.holding import ONE, HoldingFunction
from levyarea.engine.inventory import (
    CostModel, break_even_penalty, multiclass_linear, optimal_order, unimodality_certificate,
)
from levyarea.engine.inversion import compose_series, inverse_derivs_at_zero, revert_series
from levyarea.engine.sim import (
    EstimateTargets, clt_experiment, estimate, longrun_experiment, path_invariants, replication_rng,
    sample_excursion,
)

MM1 = ProcessSpec(drift=-1.0, jump_rate=1.0, jump_dist=JumpDistribution.exponential(2.0))
DET = ProcessSpec(drift=-1.0, jump_rate=0.5, jump_dist=JumpDistribution.deterministic(1.0))
BM = ProcessSpec(drift=-1.0, sigma2=1.0)
SMALL_JUMPS = ProcessSpec(drift=-1.0, jump_rate=5.0, jump_dist=JumpDistribution.deterministic(0.1))
LINEAR = HoldingFunction.linear(1.0)
ALPHAS = (0.25, 0.5, 1.0, 2.0)


def check_lst(seed: int, threads) -> tuple[bool, list[str]]:
    """Monte Carlo LST of A_1 within 3 SE of the transform for every alpha."""
    exp = build_exponent(MM1)
    est = estimate(MM1, LINEAR, 1.0, 100_000, seed, targets=EstimateTargets(lst=ALPHAS), threads=threads)
    messages, ok = [], True
    for alpha in ALPHAS:
        e = est[f"lst[{alpha:g}]"]
        target = lst_area(exp, LINEAR, 1.0, alpha)
        ok &= e.within(target)
        messages.append(f"  alpha={alpha}: {e.value:.6f} +/- {e.stderr:.1e} vs {target:.6f}")
    return ok, messages


def check_moments(seed: int, threads) -> tuple[bool, list[str]]:
    exp = build_exponent(MM1)
    table = moments_area(exp, LINEAR, 1.0, 2)
    analytic = math.isclose(table.mean, 1.0, rel_tol=1e-10) and math.isclose(table.variance, 4.0 / 3.0, rel_tol=1e-10)
    est = estimate(MM1, LINEAR, 1.0, 100_000, seed, threads=threads)
    ok = analytic and est["mean"].within(1.0) and est["var"].within(4.0 / 3.0)
    return ok, [
        f"  analytic mu1={table.mean:.12g}, var={table.variance:.12g} (closed forms {mean_area(exp, LINEAR, 1.0)}, "
        f"{var_area(exp, LINEAR, 1.0):.12g})",
        f"  MC mean={est['mean'].value:.5f} +/- {est['mean'].stderr:.1e}, var={est['var'].value:.5f} +/- {est['var'].stderr:.1e}",
    ]


def check_correlation(seed: int, threads) -> tuple[bool, list[str]]:
    target = corr_area(LINEAR, ONE, 1.0)
    ok, messages = True, []
    for label, spec in (("M/M/1", MM1), ("deterministic", DET)):
        rho = estimate(spec, LINEAR, 1.0, 100_000, seed, threads=threads)["corr_T"].value
        ok &= abs(rho - target) <= 0.02
        messages.append(f"  {label}: {rho:.5f} vs sqrt(3)/2={target:.5f}")
    return ok, messages


def check_pathwise(seed: int, threads) -> tuple[bool, list[str]]:
    failures = 0
    for i in range(10_000):
        rec = sample_excursion(MM1, LINEAR, 1.0, replication_rng(seed, i), keep_path=True)
        failures += 0 if all(path_invariants(rec).values()) else 1
    return failures == 0, [f"  10000 excursions, {failures} with a failed invariant"]


def check_longrun(seed: int, threads) -> tuple[bool, list[str]]:
    ok, messages = True, []
    for label, spec, mean_cycle in (("M/M/1", MM1, 4.0), ("deterministic", DET, 4.0)):
        result = longrun_experiment(spec, LINEAR, 2.0, horizon=3_200 * mean_cycle, seed=seed)
        value = result.average.value
        ok &= abs(value - 1.0) <= 0.02 and result.cycles >= 3_000
        messages.append(f"  {label}: {value:.5f} over {result.cycles} cycles")
    return ok, messages


def check_clt(seed: int, threads) -> tuple[bool, list[str]]:
    """Many small jumps keep the skew of A_{n x} low enough for KS < 0.02 at n = 200."""
    result = clt_experiment(SMALL_JUMPS, LINEAR, 1.0, n_scale=200, n_reps=10_000, seed=seed, threads=threads)
    ok = abs(result.sample_var / result.limit_var - 1.0) <= 0.05 and result.ks_distance < 0.02
    return ok, [f"  sample_var={result.sample_var:.4f}, limit_var={result.limit_var:.4f}, KS={result.ks_distance:.4f}"]


def check_reversion(seed: int, threads) -> tuple[bool, list[str]]:
    derivs = inverse_derivs_at_zero(build_exponent(BM), 4)
    ok = all(abs(d - t) <= 1e-9 for d, t in zip(derivs, (1.0, -1.0, 3.0, -15.0)))
    worst = 0.0
    for spec in (MM1, DET, BM, ProcessSpec(drift=-1.0, jump_rate=0.5, jump_dist=JumpDistribution.gamma(2.0, 0.5)),
                 ProcessSpec(drift=-1.0, jump_rate=0.5, jump_dist=JumpDistribution.uniform(1.0))):
        a = build_exponent(spec).taylor_coefficients()
        b = revert_series(a, 12)
        identity = compose_series(a, b, 12)
        identity[0] -= 1.0
        magnitude = np.maximum(compose_series(np.abs(a), np.abs(b), 12), 1.0)
        worst = max(worst, float(np.max(np.abs(identity) / magnitude)))
    return ok and worst <= 1e-9, [f"  derivatives {derivs.tolist()}, scaled composition error {worst:.1e}"]


def check_inventory(seed: int, threads) -> tuple[bool, list[str]]:
    exp = build_exponent(ProcessSpec(drift=-0.5))
    cm = CostModel(K=4.0, h=LINEAR, exp=exp)
    order = optimal_order(cm)
    p_star = break_even_penalty(cm, order)
    unbounded = not optimal_order(CostModel(K=4.0, h=HoldingFunction.constant(1.0), exp=exp)).bounded
    multi = multiclass_linear([1.0, 3.0], 4.0, exp.dphi0)
    ok = (math.isclose(order.x_star, 2.0, rel_tol=1e-10) and math.isclose(order.cost, 2.0, rel_tol=1e-10)
          and math.isclose(p_star, 4.0, rel_tol=1e-10) and unimodality_certificate(cm, order.x_star)
          and unbounded and math.isclose(multi.x, 2.0) and multi.proportions == [1.0, 0.0])
    return ok, [f"  x*={order.x_star:.12g}, cost={order.cost:.12g}, p*={p_star:.12g}, constant-h unbounded={unbounded}"]


def check_determinism(seed: int, threads) -> tuple[bool, list[str]]:
    runs = [{k: v.to_dict() for k, v in estimate(MM1, LINEAR, 1.0, 5_000, seed, threads=t).items()} for t in (1, 2, 8)]
    same = all(r == runs[0] for r in runs[1:])
    return same, ["  identical estimates on 1, 2 and 8 workers" if same else "  estimates differ across worker counts"]


def main() -> int:
    parser = argparse.ArgumentParser(description="levyarea desk-scale acceptance run")
    parser.add_argument("--seed", type=int, default=20240607, help="Master seed")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads")
    args = parser.parse_args()

    print("levyarea Acceptance Run")
    print("=" * 60)

    criteria = [
        ("LST oracle equivalence", check_lst),
        ("Moment formulas", check_moments),
        ("Corr(A_x, T_x) = sqrt(3)/2", check_correlation),
        ("Pathwise identities", check_pathwise),
        ("Long-run average", check_longrun),
        ("Gaussian limit", check_clt),
        ("Series reversion", check_reversion),
        ("Inventory EOQ", check_inventory),
        ("Determinism", check_determinism),
    ]

    passed = 0
    for label, check in criteria:
        t0 = time.time()
        ok, messages = check(args.seed, args.threads)
        status = "PASS" if ok else "FAIL"
        print(f"\n[{'+' if ok else 'X'}] {label} ... {status} ({time.time() - t0:.1f}s)")
        for msg in messages:
            print(msg)
        passed += int(ok)

    print("\n" + "=" * 60)
    print(f"Results: {passed}/{len(criteria)} passed, {len(criteria) - passed} failed")
    return 0 if passed == len(criteria) else 1


if __name__ == "__main__":
    sys.exit(main())
