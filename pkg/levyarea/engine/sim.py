"""
levyarea Monte Carlo Oracle
Exact event-driven simulation of one excursion of X to level -x for
finite-activity specs (sigma2 = 0): between Poisson jump epochs the path is
linear with slope d < 0, so first passages, local time and every area are
closed form per segment. Brownian specs get a biased Euler grid sampler.

Each replication i draws from its own Philox stream keyed by (seed, i), so
results do not depend on the number of workers.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from ..config import (
    CHUNK_SIZE, CLT_SCALE_DEFAULT, CSV_FLOAT_FORMAT, EXCURSION_EVENT_CAP, GRID_STEP_CAP,
    LONGRUN_MIN_CYCLES, REPS_MIN, worker_count,
)
from .area import mean_area, normalization, gaussian_limit, gaussian_limit_var
from .errors import DegenerateFunction, DomainError, HorizonExceeded, HorizonTooShort, InvalidParameter
from .exponent import ProcessSpec, build_exponent
from .holding import ONE, HoldingFunction

logger = logging.getLogger(__name__)

_BATCH = 128  # random numbers drawn per refill
LINEAR = HoldingFunction.linear(1.0)


# ============================================================================
# Types
# ============================================================================

@dataclass
class PathRecord:
    """One excursion of X from 0 down to -level."""
    level: float
    T_x: float
    area: float                       # int_0^{T_x} h(x - L_t) dt, segment by segment
    area_stieltjes: float             # int_(0,x] h(x - y) T_dy
    w_area: float                     # int_0^{T_x} W_t dt
    descent_rate: float               # |d|; T grows at rate 1/|d| between its jumps
    busy_levels: np.ndarray           # levels y at which T jumps
    busy_lengths: np.ndarray          # sizes of those jumps
    aux_areas: List[float] = field(default_factory=list)
    jump_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    jump_sizes: np.ndarray = field(default_factory=lambda: np.empty(0))
    local_time_knots: Tuple[np.ndarray, np.ndarray] = (np.empty(0), np.empty(0))
    path_knots: Tuple[np.ndarray, np.ndarray] = (np.empty(0), np.empty(0))
    horizon: float = 0.0              # L knots are valid on [0, horizon], horizon >= T_x
    exact: bool = True

    def local_time(self, t):
        """L_t on [0, horizon] (piecewise linear)."""
        times, values = self.local_time_knots
        if len(times) == 0:
            raise DomainError("path knots were not kept for this record")
        return np.interp(t, times, values)


@dataclass
class SimEstimate:
    """Monte Carlo point estimate with its standard error."""
    name: str
    value: float
    stderr: float
    n: int
    seed: int

    def within(self, target: float, k: float = 3.0, atol: float = 1e-9) -> bool:
        """|value - target| <= k standard errors (plus atol for zero-variance samples)."""
        return abs(self.value - target) <= k * self.stderr + atol * max(1.0, abs(target))

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "stderr": self.stderr, "n": self.n, "seed": self.seed}


@dataclass
class EstimateTargets:
    """What `estimate` reports besides the mean of A_x."""
    var: bool = True
    corr_with_T: bool = True
    lst: Sequence[float] = ()                        # alpha grid for E exp(-alpha A_x)
    aux: Sequence[HoldingFunction] = ()              # B_x holding functions
    joint: Sequence[Tuple[float, float]] = ()        # (alpha, beta) for E exp(-alpha A - beta B), B = aux[0] or T_x
    two_level_lower: Optional[float] = None          # x' < x for A_{x', x}
    two_level_lst: Sequence[float] = ()
    fidi_levels: Sequence[float] = ()                # s_1 < ... < s_n <= x
    fidi_alphas: Sequence[float] = ()
    fidi_betas: Sequence[float] = ()


@dataclass
class LongRunEstimate:
    """Regenerative time averages over whole cycles."""
    average: SimEstimate              # (1/t) int h(W^x - W)
    idle_rate: SimEstimate            # L_t / t
    mean_gap: SimEstimate             # (1/t) int (W^x - W)
    mean_reflected: SimEstimate       # (1/t) int W
    cycles: int
    elapsed: float


@dataclass
class CLTResult:
    """Standardized samples of A_{n x} and their distance to the Gaussian limit."""
    samples: np.ndarray
    sample_var: float
    limit_var: float
    ks_distance: float
    ks_pvalue: float
    sample_mean: float
    n_scale: float
    reps: int

    def to_dict(self) -> dict:
        return {
            "sample_var": self.sample_var,
            "limit_var": self.limit_var,
            "ks_distance": self.ks_distance,
            "ks_pvalue": self.ks_pvalue,
            "sample_mean": self.sample_mean,
            "n_scale": self.n_scale,
            "reps": self.reps,
        }


# ============================================================================
# Random streams
# ============================================================================

def replication_rng(seed: int, rep: int, tag: int = 0) -> np.random.Generator:
    """Counter-based stream for replication `rep` of master `seed`."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(rep), int(tag)))
    return np.random.Generator(np.random.Philox(ss))


class _EventStream:
    """Batched draws of inter-jump times and jump sizes from one Generator."""

    def __init__(self, spec: ProcessSpec, rng: np.random.Generator):
        self.spec = spec
        self.rng = rng
        self._gaps: List[float] = []
        self._sizes: List[float] = []

    def next_gap(self) -> float:
        if self.spec.jump_rate <= 0:
            return math.inf
        if not self._gaps:
            self._gaps = self.rng.exponential(1.0 / self.spec.jump_rate, _BATCH).tolist()[::-1]
        return self._gaps.pop()

    def next_size(self) -> float:
        if not self._sizes:
            self._sizes = np.asarray(self.spec.jump_dist.sample(self.rng, _BATCH), dtype=float).tolist()[::-1]
        return self._sizes.pop()


# ============================================================================
# Exact excursion
# ============================================================================

def sample_excursion(spec: ProcessSpec, h: HoldingFunction, x: float, rng: np.random.Generator,
                     aux: Sequence[HoldingFunction] = (), keep_path: bool = True) -> PathRecord:
    """
    Simulate X until T_x = inf{t : X_t < -x}. X falls at rate r = |d| between
    jumps; L_t = -min_{s<=t} X_s grows at rate r only while X sits at its
    running minimum, so T_x is always reached on a drift segment.
    """
    if not spec.is_finite_activity:
        raise InvalidParameter("exact excursions need sigma2 = 0; use grid_sample for Brownian specs")
    if x <= 0:
        raise DomainError(f"level must be positive, got x={x}")
    r = -spec.drift
    if r <= 0:
        raise InvalidParameter(f"exact excursions need a negative drift, got d={spec.drift}")

    stream = _EventStream(spec, rng)
    H = h.antiderivative

    t = 0.0
    X = 0.0
    L = 0.0
    area = 0.0
    w_area = 0.0
    busy_start: Optional[float] = None
    busy_levels: List[float] = []
    busy_lengths: List[float] = []
    jump_times: List[float] = []
    jump_sizes: List[float] = []
    l_times, l_vals = [0.0], [0.0]
    x_times, x_vals = [0.0], [0.0]

    for _ in range(EXCURSION_EVENT_CAP):
        gap = stream.next_gap()
        height = X + L   # W_t
        if height > 0:
            reach = height / r
            if reach >= gap:
                # whole segment above the running minimum; L is flat
                area += h.at(x - L) * gap
                w_area += height * gap - 0.5 * r * gap * gap
                X -= r * gap
                t += gap
                gap = 0.0
            else:
                area += h.at(x - L) * reach
                w_area += 0.5 * height * reach
                t += reach
                X = -L
                busy_lengths.append(t - busy_start)
                busy_start = None
                gap -= reach
                if keep_path:
                    l_times.append(t)
                    l_vals.append(L)
        if busy_start is None:
            # descending along the running minimum
            if L + r * gap >= x:
                dt = (x - L) / r
                area += H(x - L) / r
                t += dt
                next_jump = t + (gap - dt) if math.isfinite(gap) else 2.0 * t
                horizon = max(next_jump, t)
                if keep_path:
                    l_times += [t, horizon]
                    l_vals += [x, x + r * (horizon - t)]
                    x_times.append(t)
                    x_vals.append(-x)
                return PathRecord(
                    level=x,
                    T_x=t,
                    area=area,
                    area_stieltjes=_stieltjes(h, x, r, busy_levels, busy_lengths),
                    w_area=w_area,
                    descent_rate=r,
                    busy_levels=np.array(busy_levels),
                    busy_lengths=np.array(busy_lengths),
                    aux_areas=[_stieltjes(g, x, r, busy_levels, busy_lengths) for g in aux],
                    jump_times=np.array(jump_times),
                    jump_sizes=np.array(jump_sizes),
                    local_time_knots=(np.array(l_times), np.array(l_vals)) if keep_path else (np.empty(0), np.empty(0)),
                    path_knots=(np.array(x_times), np.array(x_vals)) if keep_path else (np.empty(0), np.empty(0)),
                    horizon=horizon,
                )
            area += (H(x - L) - H(x - L - r * gap)) / r
            L += r * gap
            t += gap
            X = -L
            if keep_path:
                l_times.append(t)
                l_vals.append(L)
        # jump
        size = stream.next_size()
        if keep_path:
            x_times += [t, t]
            x_vals += [X, X + size]
            jump_times.append(t)
            jump_sizes.append(size)
        if busy_start is None:
            busy_start = t
            busy_levels.append(L)
        X += size

    raise HorizonExceeded(f"excursion to level {x} exceeded {EXCURSION_EVENT_CAP} events")


def _stieltjes(h: HoldingFunction, s: float, r: float, levels: Sequence[float], lengths: Sequence[float]) -> float:
    """int_(0,s] h(s - y) T_dy: drift part H(s)/r plus the jumps of T at levels y <= s."""
    total = h.antiderivative(s) / r
    for y, length in zip(levels, lengths):
        if y <= s:
            total += h.at(s - y) * length
    return total


def stieltjes_area(record: PathRecord, h: HoldingFunction, s: float) -> float:
    """A_s read off the hitting-time path of `record`, for any s <= record.level."""
    if s > record.level * (1 + 1e-12):
        raise DomainError(f"record reaches level {record.level}, asked for {s}")
    if not record.exact:
        raise DomainError("Stieltjes areas need an exact record")
    return _stieltjes(h, s, record.descent_rate, record.busy_levels, record.busy_lengths)


def hitting_time_at(record: PathRecord, s: float) -> float:
    """T_s = s/|d| + jumps of T at levels y <= s."""
    if not record.exact:
        raise DomainError("hitting-time paths need an exact record")
    mask = record.busy_levels <= s
    return s / record.descent_rate + float(record.busy_lengths[mask].sum())


def two_level_area(record: PathRecord, h: HoldingFunction, lower: float) -> float:
    """A_{x,y} with y = record.level: h(y-x) T_x plus the area over levels (x, y]."""
    y = record.level
    if lower > y:
        raise DomainError(f"lower level {lower} above {y}")
    r = record.descent_rate
    total = h.at(y - lower) * hitting_time_at(record, lower) + h.antiderivative(y - lower) / r
    for level, length in zip(record.busy_levels, record.busy_lengths):
        if level > lower:
            total += h.at(y - level) * length
    return total


def path_invariants(record: PathRecord, grid_points: int = 100) -> Dict[str, bool]:
    """
    Pathwise checks on one kept record:
      crossing    (T_x >= t) <=> (L_t <= x) on a grid over [0, horizon]
      endpoint    L_{T_x} = x and W_{T_x} = 0
      ordering    W^x_t - W_t = x - L_t >= 0 on [0, T_x], W_t >= 0 at path knots
      identity    time-integral area = Stieltjes area (1e-9 absolute)
    """
    x = record.level
    grid = np.linspace(0.0, record.horizon, grid_points)
    lt = record.local_time(grid)
    crossing = bool(np.all((record.T_x >= grid) == (lt <= x)))

    l_end = float(record.local_time(record.T_x))
    x_times, x_vals = record.path_knots
    x_end = float(x_vals[-1]) if len(x_vals) else -x
    endpoint = abs(l_end - x) <= 1e-9 * max(1.0, x) and abs(x_end + l_end) <= 1e-9 * max(1.0, x)

    before = grid[grid <= record.T_x]
    gaps = x - record.local_time(before)
    w_at_knots = x_vals + record.local_time(x_times)
    ordering = bool(np.all(gaps >= -1e-12) and np.all(w_at_knots >= -1e-9 * max(1.0, x)))

    identity = abs(record.area - record.area_stieltjes) <= 1e-9
    return {"crossing": crossing, "endpoint": endpoint, "ordering": ordering, "identity": identity}


# ============================================================================
# Euler fallback for sigma2 > 0
# ============================================================================

def grid_sample(spec: ProcessSpec, h: HoldingFunction, x: float, dt: float, rng: np.random.Generator,
                block: int = 4096) -> PathRecord:
    """
    Euler scheme on a dt-grid. First passage is only detected at grid points,
    so T_x is biased upward by O(sqrt(dt)); use for convergence trends only.
    """
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    if x <= 0:
        raise DomainError(f"level must be positive, got x={x}")
    sd = math.sqrt(spec.sigma2 * dt)
    lam_dt = spec.jump_rate * dt

    X = 0.0
    running_min = 0.0
    area = 0.0
    steps = 0
    while steps < GRID_STEP_CAP:
        incr = spec.drift * dt + sd * rng.standard_normal(block)
        if lam_dt > 0:
            counts = rng.poisson(lam_dt, block)
            hit = np.nonzero(counts)[0]
            for i in hit:
                incr[i] += float(np.sum(spec.jump_dist.sample(rng, int(counts[i]))))
        path = X + np.cumsum(incr)
        mins = np.minimum.accumulate(np.minimum(path, running_min))
        local = -np.minimum(mins, 0.0)
        # L at the left end of each step
        local_left = np.concatenate(([-min(running_min, 0.0)], local[:-1]))
        crossed = np.nonzero(path < -x)[0]
        if len(crossed):
            k = int(crossed[0])
            area += float(np.sum(h.value(np.maximum(x - local_left[:k + 1], 0.0)))) * dt
            t_x = (steps + k + 1) * dt
            return PathRecord(
                level=x, T_x=t_x, area=area, area_stieltjes=area, w_area=math.nan,
                descent_rate=-spec.drift, busy_levels=np.empty(0), busy_lengths=np.empty(0),
                horizon=t_x, exact=False,
            )
        area += float(np.sum(h.value(np.maximum(x - local_left, 0.0)))) * dt
        X = float(path[-1])
        running_min = float(mins[-1])
        steps += block
    raise HorizonExceeded(f"grid path did not reach level {x} within {GRID_STEP_CAP} steps of dt={dt}")


# ============================================================================
# Replication driver
# ============================================================================

def run_replications(task: Callable[[np.random.Generator, int], object], n_reps: int, seed: int,
                     threads: Optional[int] = None, tag: int = 0) -> List[object]:
    """
    Run task(rng_i, i) for i in range(n_reps) on a thread pool and return the
    results ordered by i. Chunk boundaries do not depend on the worker count.

    The event loop is pure Python and holds the GIL, so threads fan the
    chunks out without a wall-clock speedup. Tasks are closures over the
    spec and holding function and would not pickle for a process pool.
    """
    chunks = [(lo, min(lo + CHUNK_SIZE, n_reps)) for lo in range(0, n_reps, CHUNK_SIZE)]

    def _run_chunk(bounds):
        lo, hi = bounds
        return [task(replication_rng(seed, i, tag), i) for i in range(lo, hi)]

    workers = min(worker_count(threads), max(len(chunks), 1))
    t0 = time.time()
    if workers == 1:
        results = [_run_chunk(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, chunks))
    logger.debug(f"{n_reps} replications on {workers} workers in {time.time() - t0:.2f}s")
    return [item for chunk in results for item in chunk]


def _mean_estimate(name: str, values: np.ndarray, seed: int) -> SimEstimate:
    n = len(values)
    return SimEstimate(name=name, value=float(np.mean(values)),
                       stderr=float(np.std(values, ddof=1) / math.sqrt(n)), n=n, seed=seed)


def _var_estimate(name: str, values: np.ndarray, seed: int) -> SimEstimate:
    n = len(values)
    centered = values - values.mean()
    s2 = float(np.var(values, ddof=1))
    m4 = float(np.mean(centered ** 4))
    return SimEstimate(name=name, value=s2, stderr=math.sqrt(max(m4 - s2 * s2, 0.0) / n), n=n, seed=seed)


def _corr_estimate(name: str, a: np.ndarray, b: np.ndarray, seed: int) -> SimEstimate:
    n = len(a)
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        # undefined for a degenerate sample
        return SimEstimate(name=name, value=math.nan, stderr=math.nan, n=n, seed=seed)
    rho = float(np.corrcoef(a, b)[0, 1])
    return SimEstimate(name=name, value=rho, stderr=(1.0 - rho * rho) / math.sqrt(n), n=n, seed=seed)


def estimate(spec: ProcessSpec, h: HoldingFunction, x: float, n_reps: int, seed: int,
             targets: Optional[EstimateTargets] = None, threads: Optional[int] = None,
             samples_out: Optional[List[dict]] = None) -> Dict[str, SimEstimate]:
    """
    Monte Carlo estimates for A_x (and T_x, B_x, A_{x',x}, fidi transforms).
    Returns {name: SimEstimate}; identical for a given seed whatever the worker count.
    If `samples_out` is a list, per-replication rows are appended to it.
    """
    if n_reps < REPS_MIN:
        raise InvalidParameter(f"n_reps must be >= {REPS_MIN}, got {n_reps}")
    targets = targets or EstimateTargets()
    aux = list(targets.aux)
    if targets.fidi_levels and max(targets.fidi_levels) > x:
        raise DomainError(f"fidi levels must not exceed x={x}")
    if len(targets.fidi_alphas) != len(targets.fidi_levels):
        raise InvalidParameter(f"got {len(targets.fidi_alphas)} fidi alphas for {len(targets.fidi_levels)} levels")
    if targets.fidi_betas and len(targets.fidi_betas) != len(targets.fidi_levels):
        raise InvalidParameter(f"got {len(targets.fidi_betas)} fidi betas for {len(targets.fidi_levels)} levels")

    def _one(rng: np.random.Generator, i: int) -> PathRecord:
        return sample_excursion(spec, h, x, rng, aux=aux, keep_path=False)

    logger.info(f"Simulating {n_reps} excursions to level {x} (seed={seed})")
    records: List[PathRecord] = run_replications(_one, n_reps, seed, threads)

    T = np.array([rec.T_x for rec in records])
    A = np.array([rec.area for rec in records])
    out = {
        "mean": _mean_estimate("mean", A, seed),
        "mean_T": _mean_estimate("mean_T", T, seed),
    }
    if targets.var:
        out["var"] = _var_estimate("var", A, seed)
        out["var_T"] = _var_estimate("var_T", T, seed)
    if targets.corr_with_T:
        out["corr_T"] = _corr_estimate("corr_T", A, T, seed)
    for alpha in targets.lst:
        name = f"lst[{alpha:g}]"
        out[name] = _mean_estimate(name, np.exp(-alpha * A), seed)

    B = np.array([rec.aux_areas[0] for rec in records]) if aux else T
    for j, g in enumerate(aux):
        Bj = np.array([rec.aux_areas[j] for rec in records])
        out[f"mean_aux[{j}]"] = _mean_estimate(f"mean_aux[{j}]", Bj, seed)
        out[f"corr_aux[{j}]"] = _corr_estimate(f"corr_aux[{j}]", A, Bj, seed)
    for alpha, beta in targets.joint:
        name = f"joint[{alpha:g},{beta:g}]"
        out[name] = _mean_estimate(name, np.exp(-alpha * A - beta * B), seed)

    if targets.two_level_lower is not None:
        two = np.array([two_level_area(rec, h, targets.two_level_lower) for rec in records])
        out["mean_two_level"] = _mean_estimate("mean_two_level", two, seed)
        out["var_two_level"] = _var_estimate("var_two_level", two, seed)
        for alpha in targets.two_level_lst:
            name = f"lst_two_level[{alpha:g}]"
            out[name] = _mean_estimate(name, np.exp(-alpha * two), seed)

    if targets.fidi_levels:
        levels = list(targets.fidi_levels)
        betas = list(targets.fidi_betas) or [0.0] * len(levels)
        exponent = np.zeros(len(records))
        for s, a, b in zip(levels, targets.fidi_alphas, betas):
            exponent += np.array([a * stieltjes_area(rec, h, s) + b * hitting_time_at(rec, s) for rec in records])
        out["fidi"] = _mean_estimate("fidi", np.exp(-exponent), seed)

    if samples_out is not None:
        for i, rec in enumerate(records):
            row = {"rep": i, "T_x": rec.T_x, "area": rec.area}
            for j, value in enumerate(rec.aux_areas):
                row[f"aux{j}"] = value
            samples_out.append(row)
    return out


def write_samples_csv(rows: List[dict], path: str) -> None:
    """Raw per-replication samples: rep,T_x,area[,aux...], header row, LF endings."""
    df = pd.DataFrame(rows)
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(df)} samples to {path}")


def estimate_random_order(spec: ProcessSpec, rate: float, n_reps: int, seed: int,
                          threads: Optional[int] = None) -> SimEstimate:
    """E A_xi for h(t) = t and an independent xi ~ Exp(rate) drawn per replication."""
    if rate <= 0:
        raise DomainError(f"order-size rate must be positive, got {rate}")
    if n_reps < REPS_MIN:
        raise InvalidParameter(f"n_reps must be >= {REPS_MIN}, got {n_reps}")

    def _one(rng: np.random.Generator, i: int) -> float:
        xi = float(rng.exponential(1.0 / rate))
        if xi <= 0:
            return 0.0
        return sample_excursion(spec, LINEAR, xi, rng, keep_path=False).area

    values = np.array(run_replications(_one, n_reps, seed, threads))
    return _mean_estimate("mean_random_order", values, seed)


def additivity_check(spec: ProcessSpec, x: float, y: float, n_reps: int, seed: int,
                     threads: Optional[int] = None) -> Tuple[float, float]:
    """Two-sample KS (statistic, p-value) of T_{x+y} against independent T_x + T_y."""
    joint = run_replications(lambda rng, i: sample_excursion(spec, ONE, x + y, rng, keep_path=False).T_x,
                             n_reps, seed, threads, tag=0)
    first = run_replications(lambda rng, i: sample_excursion(spec, ONE, x, rng, keep_path=False).T_x,
                             n_reps, seed, threads, tag=1)
    second = run_replications(lambda rng, i: sample_excursion(spec, ONE, y, rng, keep_path=False).T_x,
                              n_reps, seed, threads, tag=2)
    result = stats.ks_2samp(np.array(joint), np.array(first) + np.array(second))
    return float(result.statistic), float(result.pvalue)


# ============================================================================
# Long-run averages
# ============================================================================

def longrun_experiment(spec: ProcessSpec, h: HoldingFunction, x: float, horizon: float,
                       seed: int) -> LongRunEstimate:
    """
    Concatenate independent cycles (W^x regenerates at every T_x) until the
    next cycle would end past `horizon`; that partial cycle is discarded.
    Ratio estimators sum(A)/sum(T) with delta-method standard errors.
    """
    if horizon <= 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    t0 = time.time()
    elapsed = 0.0
    areas: List[float] = []
    lengths: List[float] = []
    gaps: List[float] = []
    w_areas: List[float] = []
    cycle = 0
    while True:
        rec = sample_excursion(spec, h, x, replication_rng(seed, cycle), aux=[LINEAR], keep_path=False)
        if elapsed + rec.T_x > horizon:
            break
        elapsed += rec.T_x
        areas.append(rec.area)
        lengths.append(rec.T_x)
        gaps.append(rec.aux_areas[0])
        w_areas.append(rec.w_area)
        cycle += 1
    if cycle < LONGRUN_MIN_CYCLES:
        raise HorizonTooShort(f"only {cycle} cycles fit in horizon {horizon}; need {LONGRUN_MIN_CYCLES}")

    T = np.array(lengths)
    levels = np.full(cycle, x)
    result = LongRunEstimate(
        average=_ratio_estimate("longrun_average", np.array(areas), T, seed),
        idle_rate=_ratio_estimate("idle_rate", levels, T, seed),
        mean_gap=_ratio_estimate("mean_gap", np.array(gaps), T, seed),
        mean_reflected=_ratio_estimate("mean_reflected", np.array(w_areas), T, seed),
        cycles=cycle,
        elapsed=time.time() - t0,
    )
    logger.info(f"Long-run: {cycle} cycles, average={result.average.value:.6g} +/- {result.average.stderr:.2g}")
    return result


def _ratio_estimate(name: str, num: np.ndarray, den: np.ndarray, seed: int) -> SimEstimate:
    n = len(num)
    ratio = float(num.sum() / den.sum())
    resid = num - ratio * den
    stderr = math.sqrt(float(np.var(resid, ddof=1)) / n) / float(den.mean())
    return SimEstimate(name=name, value=ratio, stderr=stderr, n=n, seed=seed)


# ============================================================================
# Gaussian limit experiment
# ============================================================================

def clt_experiment(spec: ProcessSpec, h: HoldingFunction, x: float, n_scale: float = CLT_SCALE_DEFAULT,
                   n_reps: int = 10_000, seed: int = 0, threads: Optional[int] = None) -> CLTResult:
    """
    Samples of (A_{n x} - E A_{n x}) / (h(n) sqrt(n)) for the given h,
    compared with the N(0, Var T_1 x^{2a+1}/(2a+1)) limit where a is the
    regular-variation index of h (a = 0 for constant h, the hitting-time CLT).

    h must be regularly varying: monomials always are, piecewise-linear h is
    eventually constant and qualifies only when that constant is positive.
    """
    if n_scale <= 0 or x <= 0:
        raise DomainError(f"need n_scale > 0 and x > 0, got {n_scale}, {x}")
    if h.kind == "piecewise_linear" and h.knots[-1][1] == 0.0:
        raise DegenerateFunction("piecewise-linear h vanishes beyond its last knot, so it has no Gaussian limit")
    if h.at(n_scale) <= 0:
        raise DegenerateFunction(f"h({n_scale:g}) = 0 gives a zero normalization")
    exp = build_exponent(spec)
    level = n_scale * x
    centre = mean_area(exp, h, level)
    scale = normalization(h, n_scale)

    values = run_replications(lambda rng, i: sample_excursion(spec, h, level, rng, keep_path=False).area,
                              n_reps, seed, threads)
    samples = (np.array(values) - centre) / scale
    limit_var = gaussian_limit_var(gaussian_limit(exp, h), x)

    if limit_var > 0:
        ks = stats.kstest(samples, "norm", args=(0.0, math.sqrt(limit_var)))
        ks_distance, ks_pvalue = float(ks.statistic), float(ks.pvalue)
    else:
        # degenerate limit: the statistic should vanish identically
        degenerate = bool(np.all(np.abs(samples) <= 1e-9))
        ks_distance, ks_pvalue = (0.0, 1.0) if degenerate else (1.0, 0.0)

    result = CLTResult(
        samples=samples,
        sample_var=float(np.var(samples, ddof=1)),
        limit_var=limit_var,
        ks_distance=ks_distance,
        ks_pvalue=ks_pvalue,
        sample_mean=float(np.mean(samples)),
        n_scale=n_scale,
        reps=n_reps,
    )
    logger.info(f"CLT n={n_scale}: sample_var={result.sample_var:.6g}, limit_var={limit_var:.6g}, "
                f"KS={ks_distance:.4f}")
    return result
