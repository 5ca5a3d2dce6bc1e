"""
levyarea - Command Line
Usage:
    python -m levyarea.main exponent  --config f.json --alpha-grid 0:5:11
    python -m levyarea.main lst       --config f.json --x 1 --alpha-grid 0:2:5 [--with-sim]
    python -m levyarea.main moments   --config f.json --x 1 --n 6
    python -m levyarea.main simulate  --config f.json --x 1 --reps 10000 --seed 7 [--raw-csv raw.csv]
    python -m levyarea.main longrun   --config f.json --x 2 --horizon 10000 --seed 7
    python -m levyarea.main clt       --config f.json --x 1 --scale 200 --reps 10000
    python -m levyarea.main inventory --config f.json
    python -m levyarea.main verify    --config f.json

Payloads (CSV or JSON) go to stdout or --out; logs go to stderr.
Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""
import argparse
import json
import logging
import sys
import time
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from .config import CLT_SCALE_DEFAULT, CSV_FLOAT_FORMAT, DEFAULT_REPS, DEFAULT_SEED
from .contracts import (
    CheckResultModel, CLTResponse, FixedProportionsResponse, InventoryResponse, LongRunResponse,
    MulticlassResponse, RunConfig, SimEstimateModel, SimulateResponse, VerifySummary,
    build_holding, build_process, dump_json, holding_model, load_config, process_model,
)
from .engine.area import (
    corr_area, longrun_average, lst_area, mean_area, moments_area, steady_state_mean_reflected, var_area,
)
from .engine.errors import InvalidParameter, LevyAreaError, SpecError
from .engine.exponent import build_exponent, hitting_time_mean, hitting_time_var, idle_rate, phi
from .engine.holding import ONE
from .engine.inventory import (
    CostModel, break_even_penalty, multiclass_fixed_proportions, multiclass_linear, optimal_order,
    unimodality_certificate,
)
from .engine.sim import EstimateTargets, clt_experiment, estimate, longrun_experiment, write_samples_csv
from .engine.verify import VerifyHarness

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2


# ============================================================================
# Helpers
# ============================================================================

def parse_alpha_grid(text: str) -> List[float]:
    """`start:stop:count`, endpoints inclusive; count=1 is the single point start."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidParameter(f"alpha grid must look like start:stop:count, got '{text}'")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise InvalidParameter(f"alpha grid '{text}' is not numeric") from e
    if count < 1:
        raise InvalidParameter(f"alpha grid count must be >= 1, got {count}")
    if start < 0 or stop < 0:
        raise InvalidParameter(f"alpha grid must be non-negative, got '{text}'")
    if count == 1:
        return [start]
    return np.linspace(start, stop, count).tolist()


def _to_csv(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def _pick(cli_value, config_value, default=None):
    """Command-line value, else the config's, else `default`; an explicit 0 counts as given."""
    if cli_value is not None:
        return cli_value
    return config_value if config_value is not None else default


def _require(value, name: str):
    if value is None:
        raise InvalidParameter(f"'{name}' must be given on the command line or in the config")
    return value


def _estimate_model(est) -> SimEstimateModel:
    return SimEstimateModel(**est.to_dict())


# ============================================================================
# Subcommands (each returns the payload text and an exit code)
# ============================================================================

def cmd_exponent(args, config: RunConfig):
    exp = build_exponent(build_process(config.process))
    grid = parse_alpha_grid(_require(_pick(args.alpha_grid, config.alpha_grid), "alpha_grid"))
    table = pd.DataFrame({
        "alpha": grid,
        "phi": [phi(exp, a) for a in grid],
        "dphi": [exp.dphi(a) for a in grid],
    })
    derivs = pd.DataFrame({"n": list(range(1, exp.n_max + 1)), "deriv0": list(exp.deriv0)})
    return _to_csv(table) + "\n" + _to_csv(derivs), EXIT_OK


def cmd_lst(args, config: RunConfig):
    spec = build_process(config.process)
    exp = build_exponent(spec)
    h = build_holding(config.holding)
    x = _require(_pick(args.x, config.x), "x")
    grid = parse_alpha_grid(_require(_pick(args.alpha_grid, config.alpha_grid), "alpha_grid"))
    table = pd.DataFrame({"alpha": grid, "lst": [lst_area(exp, h, x, a) for a in grid]})
    if args.with_sim:
        reps = _pick(args.reps, config.reps, DEFAULT_REPS)
        seed = _seed(args, config)
        est = estimate(spec, h, x, reps, seed, targets=EstimateTargets(var=False, corr_with_T=False, lst=grid),
                       threads=args.threads)
        table["mc_lst"] = [est[f"lst[{a:g}]"].value for a in grid]
        table["mc_stderr"] = [est[f"lst[{a:g}]"].stderr for a in grid]
    return _to_csv(table), EXIT_OK


def cmd_moments(args, config: RunConfig):
    exp = build_exponent(build_process(config.process))
    h = build_holding(config.holding)
    x = _require(_pick(args.x, config.x), "x")
    n = _require(args.n if args.n is not None else config.n, "n")
    moments = moments_area(exp, h, x, n)
    table = pd.DataFrame({"k": list(range(1, n + 1)), "c_k": moments.c, "mu_k": moments.mu[1:]})
    return _to_csv(table), EXIT_OK


def _seed(args, config: RunConfig) -> int:
    return _pick(args.seed, config.seed, DEFAULT_SEED)


def cmd_simulate(args, config: RunConfig):
    spec = build_process(config.process)
    exp = build_exponent(spec)
    h = build_holding(config.holding)
    aux = [build_holding(m) for m in config.aux]
    x = _require(_pick(args.x, config.x), "x")
    reps = _pick(args.reps, config.reps, DEFAULT_REPS)
    seed = _seed(args, config)

    rows: Optional[list] = [] if args.raw_csv else None
    est = estimate(spec, h, x, reps, seed, targets=EstimateTargets(aux=aux), threads=args.threads, samples_out=rows)
    if rows is not None:
        write_samples_csv(rows, args.raw_csv)

    analytic = {
        "mean": mean_area(exp, h, x),
        "var": var_area(exp, h, x),
        "mean_T": hitting_time_mean(exp, x),
        "var_T": hitting_time_var(exp, x),
    }
    if not h.is_zero_on(x):
        analytic["corr_T"] = corr_area(h, ONE, x)
    response = SimulateResponse(
        process=process_model(spec), holding=holding_model(h),
        x=x, reps=reps, seed=seed,
        estimates={name: _estimate_model(e) for name, e in est.items()},
        analytic=analytic,
    )
    return dump_json(response), EXIT_OK


def cmd_longrun(args, config: RunConfig):
    spec = build_process(config.process)
    exp = build_exponent(spec)
    h = build_holding(config.holding)
    x = _require(_pick(args.x, config.x), "x")
    horizon = _require(_pick(args.horizon, config.horizon), "horizon")
    result = longrun_experiment(spec, h, x, horizon, _seed(args, config))
    response = LongRunResponse(
        x=x, horizon=horizon, cycles=result.cycles,
        average=_estimate_model(result.average),
        idle_rate=_estimate_model(result.idle_rate),
        mean_gap=_estimate_model(result.mean_gap),
        mean_reflected=_estimate_model(result.mean_reflected),
        limit_average=longrun_average(h, x),
        limit_idle_rate=idle_rate(exp),
        limit_mean_gap=x / 2.0,
        limit_mean_reflected=steady_state_mean_reflected(exp),
    )
    return dump_json(response), EXIT_OK


def cmd_clt(args, config: RunConfig):
    spec = build_process(config.process)
    h = build_holding(config.holding)
    x = _require(_pick(args.x, config.x), "x")
    scale = _pick(args.scale, config.scale, CLT_SCALE_DEFAULT)
    reps = _pick(args.reps, config.reps, DEFAULT_REPS)
    result = clt_experiment(spec, h, x, n_scale=scale, n_reps=reps, seed=_seed(args, config), threads=args.threads)
    response = CLTResponse(holding=holding_model(h), rv_index=h.rv_index, **result.to_dict())
    return dump_json(response), EXIT_OK


def cmd_inventory(args, config: RunConfig):
    inv = _require(config.inventory, "inventory")
    exp = build_exponent(build_process(config.process))
    cm = CostModel(K=inv.K, h=build_holding(config.holding), exp=exp, r=inv.r)

    order = optimal_order(cm)
    response = InventoryResponse(
        x_star=order.x_star,
        cost=order.cost,
        bounded=order.bounded,
        p_star=break_even_penalty(cm, order) if order.bounded else None,
        x_cap=order.x_cap,
        unimodal=unimodality_certificate(cm, order.x_star) if order.bounded else None,
    )
    if inv.class_costs:
        solution = multiclass_linear(inv.class_costs, inv.K, exp.dphi0)
        response.multiclass = MulticlassResponse(**solution.to_dict())
    if inv.class_holdings and inv.proportions:
        hs = [build_holding(m) for m in inv.class_holdings]
        fixed = multiclass_fixed_proportions(hs, inv.proportions, inv.K, exp.dphi0)
        response.fixed_proportions = FixedProportionsResponse(**fixed.to_dict())
    return dump_json(response), EXIT_OK


def cmd_verify(args, config: RunConfig):
    harness = VerifyHarness(
        spec=build_process(config.process),
        h=build_holding(config.holding),
        x=_pick(args.x, config.x, 1.0),
        reps=_pick(args.reps, config.reps, DEFAULT_REPS),
        seed=_seed(args, config),
        threads=args.threads,
        K=config.inventory.K if config.inventory is not None else 1.0,
    )
    results = harness.run_all()
    lines = [json.dumps(CheckResultModel(**r.to_dict()).model_dump(), sort_keys=True) for r in results]
    failed = [r.name for r in results if not r.passed]
    summary = VerifySummary(passed=not failed, total=len(results), failed=failed)
    lines.append(json.dumps(summary.model_dump(), sort_keys=True))
    return "\n".join(lines) + "\n", EXIT_VERIFY_FAILED if failed else EXIT_OK


COMMANDS = {
    "exponent": cmd_exponent,
    "lst": cmd_lst,
    "moments": cmd_moments,
    "simulate": cmd_simulate,
    "longrun": cmd_longrun,
    "clt": cmd_clt,
    "inventory": cmd_inventory,
    "verify": cmd_verify,
}


# ============================================================================
# Entry point
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levyarea", description="Area law of Levy-driven secondary jump inputs")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", default=None, help="Write the payload here instead of stdout")
    common.add_argument("--threads", type=int, default=None, help="Worker threads (overrides LEVYAREA_THREADS)")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("--verbose", action="store_true", help="DEBUG logging")
    noise.add_argument("--quiet", action="store_true", help="WARNING logging only")

    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--x", type=float, default=None, help="Level x > 0")
        p.add_argument("--alpha-grid", default=None, help="start:stop:count (inclusive)")
        p.add_argument("--n", type=int, default=None, help="Number of moments")
        p.add_argument("--reps", type=int, default=None, help="Monte Carlo replications")
        p.add_argument("--seed", type=int, default=None, help="Master seed")
        p.add_argument("--horizon", type=float, default=None, help="Long-run time horizon")
        p.add_argument("--scale", type=float, default=None, help="CLT scale n")
        p.add_argument("--with-sim", action="store_true", help="Add Monte Carlo columns to lst")
        p.add_argument("--raw-csv", default=None, help="simulate: write per-replication samples here")
    return parser


def _configure_logging(args) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args)

    t0 = time.time()
    try:
        config = load_config(args.config)
        payload, code = COMMANDS[args.command](args, config)
    except (ValidationError, json.JSONDecodeError, OSError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except SpecError as e:
        logger.error(f"Inadmissible specification: {e}")
        return EXIT_CONFIG
    except LevyAreaError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(payload)
        logger.info(f"Wrote {args.command} output to {args.out}")
    else:
        sys.stdout.write(payload)
    logger.info(f"{args.command} finished in {time.time() - t0:.2f}s")
    return code


if __name__ == "__main__":
    sys.exit(main())
