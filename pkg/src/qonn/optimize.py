"""Derivative-free training: bounded local search, seeded multi-start with
basin deduplication, and a mirrored-sampling evolutionary strategy.

The local engine is scipy's Powell direction-set method wrapped behind a
budget/target/trace harness; every optimizer here is bit-reproducible given
(seed, config, objective).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize as sp_optimize
from scipy.stats import rankdata

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LocalSearchConfig:
    max_evaluations: int = 100_000
    initial_radius: float = 0.5
    tol_step: float = 1e-10
    tol_cost: float = 1e-12
    cost_target: float | None = None
    bounds: tuple | None = None
    engine: str = "powell"

    def __post_init__(self):
        if self.tol_step <= 0 or self.tol_cost <= 0:
            raise ValueError("tolerances must be positive")
        if self.initial_radius <= 0:
            raise ValueError("initial trust-region radius must be positive")
        if self.engine not in ("powell", "nelder-mead"):
            raise ValueError(f"unknown local engine {self.engine!r}")

    def to_dict(self) -> dict:
        return {
            "max_evaluations": self.max_evaluations,
            "initial_radius": self.initial_radius,
            "tol_step": self.tol_step,
            "tol_cost": self.tol_cost,
            "cost_target": self.cost_target,
            "bounds": None if self.bounds is None else [list(b) for b in self.bounds],
            "engine": self.engine,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LocalSearchConfig":
        data = dict(data)
        if data.get("bounds") is not None:
            data["bounds"] = tuple(tuple(b) for b in data["bounds"])
        return cls(**data)


@dataclass(frozen=True)
class LocalResult:
    x: np.ndarray
    fun: float
    evaluations: int
    converged: bool
    # (evaluation index, best cost) at every improvement
    trace: tuple = ()
    non_finite: int = 0


class _BudgetExhausted(Exception):
    pass


class _TargetReached(Exception):
    pass


def minimize_local(f, x0, config: LocalSearchConfig) -> LocalResult:
    """Minimize a deterministic objective without derivatives.

    Never returns a value worse than f(x0); the trace of best-so-far values
    is non-increasing by construction.  Non-finite objective values are
    counted and treated as +inf.  A zero budget returns x0 untouched with
    fun = +inf and converged False.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64)).copy()
    if config.max_evaluations <= 0:
        return LocalResult(x0, math.inf, 0, False)

    state = {"count": 0, "best_f": math.inf, "best_x": x0.copy(), "non_finite": 0}
    trace = []

    def wrapped(x):
        if state["count"] >= config.max_evaluations:
            raise _BudgetExhausted
        state["count"] += 1
        value = f(np.asarray(x, dtype=np.float64))
        value = float(value)
        if not math.isfinite(value):
            state["non_finite"] += 1
            value = math.inf
        if value < state["best_f"]:
            state["best_f"] = value
            state["best_x"] = np.array(x, dtype=np.float64)
            trace.append((state["count"], value))
        if config.cost_target is not None and state["best_f"] <= config.cost_target:
            raise _TargetReached
        return value

    converged = False
    try:
        if config.engine == "powell":
            res = sp_optimize.minimize(
                wrapped,
                x0,
                method="Powell",
                bounds=config.bounds,
                options={
                    "maxfev": config.max_evaluations,
                    "xtol": config.tol_step,
                    "ftol": config.tol_cost,
                },
            )
        else:
            res = sp_optimize.minimize(
                wrapped,
                x0,
                method="Nelder-Mead",
                bounds=config.bounds,
                options={
                    "maxfev": config.max_evaluations,
                    "xatol": config.tol_step,
                    "fatol": config.tol_cost,
                    "initial_simplex": _initial_simplex(x0, config.initial_radius),
                },
            )
        converged = bool(res.success)
    except _BudgetExhausted:
        converged = False
    except _TargetReached:
        converged = True

    return LocalResult(
        state["best_x"],
        state["best_f"],
        state["count"],
        converged,
        tuple(trace),
        state["non_finite"],
    )


def _initial_simplex(x0, radius):
    d = x0.size
    simplex = np.tile(x0, (d + 1, 1))
    for i in range(d):
        simplex[i + 1, i] += radius
    return simplex


@dataclass(frozen=True)
class MultiStartConfig:
    starts: int = 5
    local: LocalSearchConfig = field(default_factory=LocalSearchConfig)
    dedup_radius: float = 1e-9
    sample_low: float = 0.0
    sample_high: float = TWO_PI
    stop_at_target: bool = True

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("need at least one start")

    def to_dict(self) -> dict:
        return {
            "starts": self.starts,
            "local": self.local.to_dict(),
            "dedup_radius": self.dedup_radius,
            "sample_low": self.sample_low,
            "sample_high": self.sample_high,
            "stop_at_target": self.stop_at_target,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MultiStartConfig":
        data = dict(data)
        data["local"] = LocalSearchConfig.from_dict(data.get("local", {}))
        return cls(**data)


@dataclass(frozen=True)
class StartRecord:
    index: int
    x0: np.ndarray
    status: str  # "done", "skipped-duplicate", "skipped-basin", "failed"
    result: LocalResult | None = None
    detail: str = ""


@dataclass(frozen=True)
class MultiStartResult:
    x: np.ndarray
    fun: float
    records: tuple


def minimize_multistart(f, dimension: int, config: MultiStartConfig, rng) -> MultiStartResult:
    """Best local minimum over seeded uniform restarts.

    A sampled start is skipped when it lies within the rejection radius of a
    previously used start or of an already-found minimum (basin dedup).
    Failures of the local engine become records, not exceptions.
    """
    gen = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    records = []
    used, minima = [], []
    best_x, best_f = None, math.inf
    for s in range(config.starts):
        x0 = gen.uniform(config.sample_low, config.sample_high, size=dimension)
        near_used = any(
            np.linalg.norm(x0 - p) <= config.dedup_radius for p in used
        )
        near_minimum = any(
            np.linalg.norm(x0 - p) <= config.dedup_radius for p in minima
        )
        if near_used or near_minimum:
            status = "skipped-duplicate" if near_used else "skipped-basin"
            records.append(StartRecord(s, x0, status))
            continue
        used.append(x0)
        try:
            result = minimize_local(f, x0, config.local)
        except Exception as exc:  # noqa: BLE001 - recorded, not fatal
            records.append(StartRecord(s, x0, "failed", None, repr(exc)))
            continue
        minima.append(result.x)
        records.append(StartRecord(s, x0, "done", result))
        if result.fun < best_f:
            best_f = result.fun
            best_x = result.x
        if (
            config.stop_at_target
            and config.local.cost_target is not None
            and best_f <= config.local.cost_target
        ):
            break
    if best_x is None:
        best_x = np.full(dimension, np.nan)
    return MultiStartResult(best_x, best_f, tuple(records))


def rank_shape_fitness(raw) -> np.ndarray:
    """Centered rank transform onto [-0.5, 0.5] with mean 0 (ties averaged)."""
    values = np.asarray(raw, dtype=np.float64)
    if values.size < 2:
        raise ValueError("rank shaping needs at least two values")
    ranks = rankdata(values, method="average")
    return (ranks - 1.0) / (values.size - 1.0) - 0.5


@dataclass(frozen=True)
class EsConfig:
    population: int = 100
    sigma: float = 0.1
    alpha: float = 0.05
    generations: int = 200
    fitness_avg: int = 1
    eval_center: bool = True

    def __post_init__(self):
        if self.population < 2 or self.population % 2 != 0:
            raise ValueError("population must be even and at least 2 (mirrored pairs)")
        if self.sigma <= 0 or self.alpha < 0:
            raise ValueError("need sigma > 0 and alpha >= 0")
        if self.fitness_avg < 1:
            raise ValueError("fitness averaging count must be at least 1")

    def to_dict(self) -> dict:
        return {
            "population": self.population,
            "sigma": self.sigma,
            "alpha": self.alpha,
            "generations": self.generations,
            "fitness_avg": self.fitness_avg,
            "eval_center": self.eval_center,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EsConfig":
        return cls(**data)


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    mean_fitness: float
    max_fitness: float
    center_fitness: float


@dataclass(frozen=True)
class EsResult:
    x: np.ndarray
    trace: tuple
    evaluations: int


def maximize_es(fitness, x0, config: EsConfig, rng, map_fn=None) -> EsResult:
    """Evolutionary-strategy ascent with mirrored Gaussian perturbations.

    ``fitness(x, seeds)`` must return one fitness value per seed; the values
    are averaged before rank shaping, so noisy objectives are smoothed ahead
    of each update x += alpha/(P sigma) * sum_p shaped_p eps_p.  Non-finite
    member fitnesses are replaced by the generation's minimum finite value.
    ``map_fn`` (an optional map-like taking (func, iterable)) evaluates the
    population; results are reduced in member order either way.
    """
    gen = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    x = np.atleast_1d(np.asarray(x0, dtype=np.float64)).copy()
    pop = config.population
    half = pop // 2
    evaluations = 0
    trace = []
    mapper = map_fn if map_fn is not None else map
    for g in range(config.generations):
        eps = gen.normal(size=(half, x.size))
        seeds = gen.integers(0, 2**63 - 1, size=(pop, config.fitness_avg))
        members = np.empty((pop, x.size))
        members[0::2] = x + config.sigma * eps
        members[1::2] = x - config.sigma * eps
        per_run = list(mapper(_FitnessCall(fitness), zip(members, seeds)))
        raw = np.array([np.mean(np.asarray(v, dtype=np.float64)) for v in per_run])
        evaluations += pop * config.fitness_avg
        finite = np.isfinite(raw)
        if not finite.any():
            raw = np.zeros(pop)
        elif not finite.all():
            raw = raw.copy()
            raw[~finite] = raw[finite].min()
        shaped = rank_shape_fitness(raw)
        step = (shaped[0::2] - shaped[1::2]) @ eps
        x = x + config.alpha / (pop * config.sigma) * step
        if config.eval_center:
            center_seeds = gen.integers(0, 2**63 - 1, size=config.fitness_avg)
            center = float(
                np.mean(np.asarray(fitness(x, center_seeds), dtype=np.float64))
            )
            evaluations += config.fitness_avg
        else:
            center = float(raw.mean())
        trace.append(
            GenerationRecord(g, float(raw.mean()), float(raw.max()), center)
        )
    return EsResult(x, tuple(trace), evaluations)


class _FitnessCall:
    """Picklable adapter so population evaluation can run on a process pool."""

    def __init__(self, fitness):
        self.fitness = fitness

    def __call__(self, args):
        member, seeds = args
        return self.fitness(member, seeds)
