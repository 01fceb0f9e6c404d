"""Genetic search for inputs that drive a program down a target path.

Each generation is evaluated, the ``elite_count`` best chromosomes are
copied through unchanged, and the rest of the next generation comes from a
roulette-wheel mating pool that is paired off for two-point crossover and
then mutated bit by bit.

All randomness comes from one ``numpy.random.Generator`` (PCG64) seeded from
``GaConfig.seed`` and consumed in a fixed sequential order, so a run is
reproducible bit for bit whatever the number of evaluation workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .cfg import ControlFlowGraph, build_cfg
from .executor import DEFAULT_STEP_LIMIT, NORMAL, execute
from .fitness import DEFAULT_THRESHOLDS, FLOOR, FitnessConfig, FitnessValue, classify
from .lang import Program

__all__ = [
    "Chromosome", "ConfigError", "Evaluator", "GaConfig", "GenerationStats", "RunResult",
    "decode", "decode_inputs", "evolve", "hit_probability", "initialize_population", "mutate",
    "random_search", "select_mating_pool", "two_point_crossover",
]


class ConfigError(ValueError):
    pass


ENCODINGS = ("binary", "gray")


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 100
    bits_per_var: int = 15
    pc: float = 0.5
    pm: float = 0.05
    elite_count: int = 2
    max_generations: int = 500
    seed: int = 0
    early_stop: bool = False
    step_limit: int = DEFAULT_STEP_LIMIT
    workers: int = 1
    thresholds: tuple = DEFAULT_THRESHOLDS
    encoding: str = "binary"

    def check(self) -> None:
        if self.population_size < 1:
            raise ConfigError("population_size must be positive")
        if not 1 <= self.bits_per_var <= 62:
            raise ConfigError("bits_per_var must be in [1, 62]")
        if not 0 <= self.pc <= 1 or not 0 <= self.pm <= 1:
            raise ConfigError("pc and pm must be probabilities")
        if not 0 <= self.elite_count < self.population_size:
            raise ConfigError("elite_count must be in [0, population_size)")
        if self.max_generations < 0:
            raise ConfigError("max_generations must be non-negative")
        if self.step_limit < 1:
            raise ConfigError("step_limit must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if list(self.thresholds) != sorted(set(self.thresholds)):
            raise ConfigError("thresholds must be strictly increasing")
        if self.encoding not in ENCODINGS:
            raise ConfigError(f"encoding must be one of {ENCODINGS}")


@dataclass(eq=False)
class Chromosome:
    bits: np.ndarray
    decoded: Optional[dict] = None
    fitness: Optional[FitnessValue] = None

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)

    def __len__(self):
        return len(self.bits)

    def bitstring(self) -> str:
        return "".join(map(str, self.bits.tolist()))

    def same_bits(self, other: "Chromosome") -> bool:
        return np.array_equal(self.bits, other.bits)


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    class_histogram: tuple
    covered: bool


@dataclass
class RunResult:
    best: Chromosome
    stats: list
    covered: bool
    evaluations: int
    method: str
    evaluations_to_coverage: Optional[int] = None
    final_fitness: tuple = ()
    seed: Optional[int] = None

    @property
    def generations(self) -> int:
        return len(self.stats)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def _unsigned(bits: Sequence[int]) -> int:
    u = 0
    for b in bits:
        u = (u << 1) | int(b)
    return u


def gray_to_binary(bits: Sequence[int]) -> list[int]:
    out, acc = [], 0
    for b in bits:
        acc ^= int(b)
        out.append(acc)
    return out


def decode(bits: Sequence[int], lo: int, hi: int, encoding: str = "binary") -> int:
    """Map a big-endian bit string onto ``[lo, hi]`` by uniform scaling.

    >>> decode([0, 0, 1, 0, 1], 0, 31)
    5
    """
    if encoding == "gray":
        bits = gray_to_binary(bits)
    k = len(bits)
    return lo + (_unsigned(bits) * (hi - lo + 1) >> k)


def decode_inputs(bits: np.ndarray, program: Program, bits_per_var: int, encoding: str = "binary") -> dict:
    out = {}
    for i, decl in enumerate(program.inputs):
        out[decl.name] = decode(bits[i * bits_per_var:(i + 1) * bits_per_var], decl.lo, decl.hi, encoding)
    return out


def _decode_matrix(bits: np.ndarray, program: Program, k: int, encoding: str = "binary") -> np.ndarray:
    """Vectorised :func:`decode` over a ``(rows, k * n_inputs)`` bit matrix."""
    if encoding == "gray":
        bits = bits.copy()
        for i in range(len(program.inputs)):
            block = bits[:, i * k:(i + 1) * k]
            np.bitwise_xor.accumulate(block, axis=1, out=block)
    weights = (1 << np.arange(k - 1, -1, -1, dtype=np.int64))
    cols = []
    for i, decl in enumerate(program.inputs):
        u = bits[:, i * k:(i + 1) * k].astype(np.int64) @ weights
        span = decl.hi - decl.lo + 1
        if span * (1 << k) < 2 ** 62:
            cols.append(decl.lo + ((u * span) >> k))
        else:
            cols.append(np.array([decl.lo + ((int(x) * span) >> k) for x in u], dtype=object))
    return np.stack(cols, axis=1) if cols else np.zeros((len(bits), 0), dtype=np.int64)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

_worker_state: dict = {}


def _worker_init(program, fitness, step_limit):
    _worker_state.update(program=program, fitness=fitness, step_limit=step_limit, cfg=build_cfg(program))


def _worker_eval(values):
    s = _worker_state
    return _score(s["program"], s["cfg"], s["fitness"], s["step_limit"], values)


def _score(program, cfg, fitness, step_limit, values) -> FitnessValue:
    inputs = dict(zip(program.input_names, values))
    trace = execute(program, inputs, step_limit, cfg)
    if trace.terminated != NORMAL:
        return FitnessValue(FLOOR, False)
    return fitness.score(trace, cfg)


class Evaluator:
    """Memoising fitness oracle for one (program, target) pair.

    Execution is deterministic, so each distinct input vector is run once.
    Every chromosome passed in still counts as one evaluation.
    """

    def __init__(self, program: Program, fitness: FitnessConfig,
                 step_limit: int = DEFAULT_STEP_LIMIT, workers: int = 1,
                 cfg: Optional[ControlFlowGraph] = None):
        self.program = program
        self.fitness = fitness
        self.step_limit = step_limit
        self.workers = workers
        self.cfg = cfg if cfg is not None else build_cfg(program)
        self.cache: dict = {}
        self.count = 0
        self._pool = None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def score_values(self, rows: Sequence[tuple]) -> list[FitnessValue]:
        missing = list(dict.fromkeys(r for r in rows if r not in self.cache))
        if missing:
            if self.workers > 1 and len(missing) > 1:
                if self._pool is None:
                    self._pool = ProcessPoolExecutor(
                        self.workers, initializer=_worker_init,
                        initargs=(self.program, self.fitness, self.step_limit))
                chunk = max(1, len(missing) // (4 * self.workers))
                results = list(self._pool.map(_worker_eval, missing, chunksize=chunk))
            else:
                results = [_score(self.program, self.cfg, self.fitness, self.step_limit, r) for r in missing]
            self.cache.update(zip(missing, results))
        self.count += len(rows)
        return [self.cache[r] for r in rows]

    def evaluate(self, population: list, bits_per_var: int, encoding: str = "binary") -> list:
        bits = np.stack([c.bits for c in population])
        values = _decode_matrix(bits, self.program, bits_per_var, encoding)
        rows = [tuple(int(v) for v in row) for row in values]
        scores = self.score_values(rows)
        names = self.program.input_names
        return [replace(c, decoded=dict(zip(names, row)), fitness=f)
                for c, row, f in zip(population, rows, scores)]


def evaluate(population: list, program: Program, fitness: FitnessConfig, config: GaConfig) -> list:
    """One-shot evaluation without a shared cache."""
    with Evaluator(program, fitness, config.step_limit, config.workers) as ev:
        return ev.evaluate(population, config.bits_per_var, config.encoding)


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

def initialize_population(config: GaConfig, n_inputs: int, rng: np.random.Generator) -> list:
    config.check()
    bits = rng.integers(0, 2, size=(config.population_size, config.bits_per_var * n_inputs), dtype=np.uint8)
    return [Chromosome(row) for row in bits]


def select_mating_pool(population: list, config: GaConfig, rng: np.random.Generator) -> tuple[list, list]:
    """Return ``(elites, pool)``.

    Elites are the ``elite_count`` fittest chromosomes (ties go to the lower
    index). The pool holds ``population_size - elite_count`` chromosomes
    drawn by roulette wheel with replacement.
    """
    values = np.array([c.fitness.value for c in population], dtype=float)
    order = sorted(range(len(population)), key=lambda i: (-values[i], i))
    elites = [population[i] for i in order[:config.elite_count]]
    size = len(population) - config.elite_count
    total = values.sum()
    if size <= 0:
        return elites, []
    if not math.isfinite(total) or total <= 0:
        picks = rng.integers(0, len(population), size=size)
    else:
        cum = np.cumsum(values)
        picks = np.searchsorted(cum, rng.random(size) * total, side="right")
        picks = np.minimum(picks, len(population) - 1)
    return elites, [population[i] for i in picks]


def swap_segment(a: np.ndarray, b: np.ndarray, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    c1, c2 = a.copy(), b.copy()
    c1[i:j], c2[i:j] = b[i:j], a[i:j]
    return c1, c2


def two_point_crossover(p1: Chromosome, p2: Chromosome, pc: float, rng: np.random.Generator,
                        cuts: Optional[tuple] = None) -> tuple[Chromosome, Chromosome]:
    """Swap the segment ``[i, j)`` with probability ``pc``.

    Cut points satisfy ``0 <= i < j <= L`` and are uniform over such pairs
    unless given explicitly.
    """
    if len(p1) != len(p2):
        raise ValueError("parents differ in length")
    if rng.random() >= pc:
        return Chromosome(p1.bits.copy()), Chromosome(p2.bits.copy())
    if cuts is None:
        i, j = sorted(rng.choice(len(p1) + 1, size=2, replace=False).tolist())
    else:
        i, j = cuts
    c1, c2 = swap_segment(p1.bits, p2.bits, i, j)
    return Chromosome(c1), Chromosome(c2)


def mutate(c: Chromosome, pm: float, rng: np.random.Generator) -> Chromosome:
    mask = (rng.random(len(c)) < pm).astype(np.uint8)
    return Chromosome(c.bits ^ mask)


def _breed(population, config, rng):
    elites, pool = select_mating_pool(population, config, rng)
    children = []
    for k in range(0, len(pool) - 1, 2):
        children.extend(two_point_crossover(pool[k], pool[k + 1], config.pc, rng))
    if len(pool) % 2:
        children.append(Chromosome(pool[-1].bits.copy()))
    children = [mutate(c, config.pm, rng) for c in children]
    return [Chromosome(e.bits.copy()) for e in elites] + children


def _stats(generation, population, thresholds) -> GenerationStats:
    values = [c.fitness.value for c in population]
    hist = [0] * (len(thresholds) + 1)
    for v in values:
        hist[classify(v, thresholds)] += 1
    return GenerationStats(generation, max(values), float(np.mean(values)), tuple(hist),
                           any(c.fitness.covered for c in population))


def evolve(program: Program, fitness: FitnessConfig, config: GaConfig = GaConfig(),
           evaluator: Optional[Evaluator] = None) -> RunResult:
    """Run the GA for ``max_generations`` evaluated generations.

    Generation 0 is the random initial population. ``max_generations=0``
    still evaluates it, so the result always carries a best chromosome.
    """
    config.check()
    rng = np.random.default_rng(config.seed)
    own = evaluator is None
    if own:
        evaluator = Evaluator(program, fitness, config.step_limit, config.workers)
    start = evaluator.count
    try:
        population = initialize_population(config, len(program.inputs), rng)
        stats, best, to_cover = [], None, None
        for gen in range(max(1, config.max_generations)):
            if gen:
                population = _breed(population, config, rng)
            before = evaluator.count - start
            population = evaluator.evaluate(population, config.bits_per_var, config.encoding)
            stats.append(_stats(gen, population, config.thresholds))
            for i, c in enumerate(population):
                if best is None or c.fitness.value > best.fitness.value:
                    best = c
                if to_cover is None and c.fitness.covered:
                    to_cover = before + i + 1
            if config.early_stop and to_cover is not None:
                break
    finally:
        if own:
            evaluator.close()
    return RunResult(best, stats, bool(best.fitness.covered), evaluator.count - start, "ga",
                     to_cover, tuple(c.fitness.value for c in population), config.seed)


def random_search(program: Program, fitness: FitnessConfig, budget: int, seed: int = 0,
                  bits_per_var: int = 15, step_limit: int = DEFAULT_STEP_LIMIT,
                  thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
                  evaluator: Optional[Evaluator] = None, encoding: str = "binary") -> RunResult:
    """Evaluate ``budget`` independent uniform chromosomes and keep the best."""
    if budget < 1:
        raise ConfigError("budget must be positive")
    rng = np.random.default_rng(seed)
    if evaluator is None:
        evaluator = Evaluator(program, fitness, step_limit)
    start = evaluator.count
    width = bits_per_var * len(program.inputs)
    bits = rng.integers(0, 2, size=(budget, width), dtype=np.uint8)
    values = _decode_matrix(bits, program, bits_per_var, encoding)
    rows = [tuple(int(v) for v in row) for row in values]
    scores = evaluator.score_values(rows)
    best_i = max(range(budget), key=lambda i: (scores[i].value, -i))
    to_cover = next((i + 1 for i, f in enumerate(scores) if f.covered), None)
    best = Chromosome(bits[best_i], dict(zip(program.input_names, rows[best_i])), scores[best_i])
    hist = [0] * (len(thresholds) + 1)
    for f in scores:
        hist[classify(f.value, thresholds)] += 1
    vals = [f.value for f in scores]
    stat = GenerationStats(0, max(vals), float(np.mean(vals)), tuple(hist), to_cover is not None)
    return RunResult(best, [stat], best.fitness.covered, evaluator.count - start, "random",
                     to_cover, tuple(vals), seed)


def hit_probability(program: Program, fitness: FitnessConfig, bits_per_var: int = 15,
                    encoding: str = "binary", evaluator: Optional[Evaluator] = None,
                    max_bits: int = 20) -> float:
    """Share of all chromosomes that cover the target, by enumeration.

    Only feasible for small chromosome spaces (``<= 2**max_bits``).
    """
    width = bits_per_var * len(program.inputs)
    if width > max_bits:
        raise ConfigError(f"chromosome space 2**{width} too large to enumerate")
    if evaluator is None:
        evaluator = Evaluator(program, fitness)
    u = np.arange(1 << width, dtype=np.int64)
    bits = ((u[:, None] >> np.arange(width - 1, -1, -1)) & 1).astype(np.uint8)
    values = _decode_matrix(bits, program, bits_per_var, encoding)
    rows = [tuple(int(v) for v in row) for row in values]
    saved = evaluator.count
    hits = sum(f.covered for f in evaluator.score_values(rows))
    evaluator.count = saved
    return hits / len(rows)
