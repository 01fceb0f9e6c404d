"""Run records, fitness-class histograms and GA-vs-random comparisons.

Everything here serialises to plain JSON (sorted keys, fixed float repr) so
repeated runs with the same seed produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from .fitness import DEFAULT_THRESHOLDS, class_labels, classify

__all__ = [
    "ComparisonReport", "FitnessReport", "MethodSummary", "ReportError", "RunRecord",
    "dumps", "stats_csv",
]

FINAL, ALL = "final_generation", "all_generations"


class ReportError(ValueError):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass
class RunRecord:
    """One target's outcome as written by ``pathga generate``."""

    target: int
    signature: str
    mode: str
    method: str
    seed: int
    covered: bool
    path_traversed: bool
    best_inputs: dict
    best_fitness: float
    generations: int
    evaluations: int
    evaluations_to_coverage: Optional[int]
    thresholds: list
    final_fitness: list
    histograms: list = field(default_factory=list)
    best_mean: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        try:
            return cls(**data)
        except TypeError as exc:
            raise ReportError(f"malformed run record: {exc}") from None

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ReportError(f"malformed run record: {exc}") from None
        if not isinstance(data, dict):
            raise ReportError("malformed run record: expected an object")
        return cls.from_dict(data)


def stats_csv(record: RunRecord) -> str:
    """Per-generation statistics as CSV: generation, best, mean, class counts."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    labels = class_labels(record.thresholds)
    writer.writerow(["generation", "best_fitness", "mean_fitness", *labels])
    for gen, ((best, mean), hist) in enumerate(zip(record.best_mean, record.histograms)):
        writer.writerow([gen, repr(best), repr(mean), *hist])
    return buf.getvalue()


@dataclass
class FitnessReport:
    class_bounds: list
    counts: list
    percentages: list
    population_source: str = FINAL

    @classmethod
    def from_values(cls, values: Sequence[float], thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
                    source: str = FINAL) -> "FitnessReport":
        if not values:
            raise ReportError("nothing to classify: population is empty")
        counts = [0] * (len(thresholds) + 1)
        for v in values:
            counts[classify(v, thresholds)] += 1
        return cls._from_counts(list(thresholds), counts, source)

    @classmethod
    def from_record(cls, record: RunRecord, source: str = FINAL) -> "FitnessReport":
        if source == FINAL:
            return cls.from_values(record.final_fitness, record.thresholds, source)
        if source == ALL:
            if not record.histograms:
                raise ReportError("nothing to classify: record has no generation histograms")
            counts = [sum(col) for col in zip(*record.histograms)]
            return cls._from_counts(list(record.thresholds), counts, source)
        raise ReportError(f"unknown population source {source!r}")

    @classmethod
    def _from_counts(cls, thresholds, counts, source):
        total = sum(counts)
        if total == 0:
            raise ReportError("nothing to classify: population is empty")
        return cls(thresholds, list(counts), [100.0 * c / total for c in counts], source)

    def render(self) -> str:
        labels = class_labels(self.class_bounds)
        width = max(len("Fitness Value Range"), *(len(s) for s in labels))
        lines = [f"{'Fitness Value Range':<{width}}  % of Test Data  count",
                 f"{'-' * width}  --------------  -----"]
        for label, pct, count in zip(labels, self.percentages, self.counts):
            lines.append(f"{label:<{width}}  {pct:>14.0f}  {count:>5}")
        lines.append(f"({sum(self.counts)} individuals, {self.population_source.replace('_', ' ')})")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "FitnessReport":
        return cls(**data)


@dataclass
class MethodSummary:
    method: str
    runs: int
    covered: int
    success_rate: float
    median_evaluations: Optional[float]  # None stands for "never covered" (infinite)
    evaluations_to_coverage: list
    best_fitness: list

    @classmethod
    def from_results(cls, method: str, results: Sequence) -> "MethodSummary":
        to_cover = [r.evaluations_to_coverage for r in results]
        covered = sum(r.covered for r in results)
        return cls(method, len(results), covered, covered / len(results),
                   median_evaluations(to_cover), to_cover, [r.best.fitness.value for r in results])


def median_evaluations(values: Sequence[Optional[int]]) -> Optional[float]:
    """Median with ``None`` treated as +inf; returns ``None`` when infinite."""
    inf = float("inf")
    med = statistics.median([inf if v is None else v for v in values])
    return None if med == inf else float(med)


@dataclass
class ComparisonReport:
    target: int
    budget: int
    seeds: list
    ga: MethodSummary
    random: MethodSummary
    closed_form_hit_rate: Optional[float] = None

    @property
    def ga_median(self) -> float:
        return float("inf") if self.ga.median_evaluations is None else self.ga.median_evaluations

    @property
    def random_median(self) -> float:
        return float("inf") if self.random.median_evaluations is None else self.random.median_evaluations

    def render(self) -> str:
        def med(m):
            return "inf" if m.median_evaluations is None else f"{m.median_evaluations:g}"
        lines = [f"target path {self.target}, {len(self.seeds)} seeds, budget {self.budget} evaluations per run",
                 f"{'method':<8}{'covered':>10}{'rate':>8}{'median evals':>15}"]
        for m in (self.ga, self.random):
            lines.append(f"{m.method:<8}{m.covered:>6}/{m.runs:<3}{m.success_rate:>8.2f}{med(m):>15}")
        if self.closed_form_hit_rate is not None:
            lines.append(f"closed-form random hit rate: {self.closed_form_hit_rate:.4f}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ComparisonReport":
        data = dict(data)
        data["ga"] = MethodSummary(**data["ga"])
        data["random"] = MethodSummary(**data["random"])
        return cls(**data)
