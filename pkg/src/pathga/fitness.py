"""Fitness of candidate inputs.

Two modes share one shape, ``1 / (distance + delta)**2``:

* ``paper``: distance is ``|A - B|`` at a single target predicate; the
  optimum is the equality boundary ``A == B``.
* ``path``: distance is the branch distance where an execution leaves a
  target basis path, scaled by how much of the path was followed.
"""

from __future__ import annotations

import bisect
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from .cfg import PREDICATE, BasisPath, ControlFlowGraph
from .executor import NORMAL, ExecutionTrace, covers, divergence_point

__all__ = [
    "DEFAULT_DELTA", "DEFAULT_THRESHOLDS", "FLOOR", "FitnessConfig", "FitnessValue",
    "class_labels", "classify", "for_path", "paper_fitness", "path_fitness", "predicate_fitness",
]

DEFAULT_DELTA = 0.05
DEFAULT_THRESHOLDS = (0.3, 0.7, 1.0)
# assigned to runs that crash, loop forever or never reach the target
FLOOR = sys.float_info.min


@dataclass(frozen=True)
class FitnessValue:
    value: float
    covered: bool = False


@dataclass(frozen=True)
class FitnessConfig:
    delta: float = DEFAULT_DELTA
    mode: str = "paper"
    target_predicate: Optional[int] = None
    target_path: Optional[BasisPath] = None

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.mode not in ("paper", "path"):
            raise ValueError(f"mode must be 'paper' or 'path', got {self.mode!r}")
        if self.mode == "paper" and self.target_predicate is None:
            raise ValueError("paper mode needs a target_predicate node id")
        if self.mode == "path" and self.target_path is None:
            raise ValueError("path mode needs a target_path")

    @property
    def max_value(self) -> float:
        return 1.0 / self.delta ** 2

    def score(self, trace: ExecutionTrace, cfg: ControlFlowGraph) -> FitnessValue:
        if self.mode == "paper":
            return predicate_fitness(trace, self.target_predicate, self.delta)
        return path_fitness(trace, self.target_path, self.delta, cfg)


def paper_fitness(a: int, b: int, delta: float = DEFAULT_DELTA) -> FitnessValue:
    """``1 / (|a - b| + delta)**2``; covered exactly at ``a == b``.

    >>> round(paper_fitness(7, 7).value, 9)
    400.0
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    distance = abs(a - b)
    return FitnessValue(max(1.0 / (distance + delta) ** 2, FLOOR), distance == 0)


def predicate_fitness(trace: ExecutionTrace, node_id: int, delta: float = DEFAULT_DELTA) -> FitnessValue:
    """Paper-mode fitness of a whole run: operands at the first evaluation of
    ``node_id``. Runs that never evaluate it score :data:`FLOOR`."""
    if trace.terminated == NORMAL:
        for ob in trace.observations:
            if ob.node_id == node_id:
                return paper_fitness(ob.lhs, ob.rhs, delta)
    return FitnessValue(FLOOR, False)


def path_fitness(trace: ExecutionTrace, target: BasisPath, delta: float,
                 cfg: ControlFlowGraph) -> FitnessValue:
    if covers(trace, target):
        return FitnessValue(1.0 / delta ** 2, True)
    matched, ob = divergence_point(trace, target, cfg)
    if ob is None:
        return FitnessValue(FLOOR, False)
    ratio = matched / len(target.node_seq)
    return FitnessValue(max(ratio / (ob.distance + delta) ** 2, FLOOR), False)


def class_labels(thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> list[str]:
    bounds = [0.0, *thresholds]
    labels = [f"{lo:g} <= f < {hi:g}" for lo, hi in zip(bounds, bounds[1:])]
    labels.append(f"f >= {thresholds[-1]:g}")
    return labels


def classify(value: float, thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> int:
    """Index of the half-open class holding ``value``.

    With the default bounds the classes are ``[0, 0.3)``, ``[0.3, 0.7)``,
    ``[0.7, 1.0)`` and an overflow class ``>= 1.0`` that holds exact hits.
    """
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly increasing")
    if value < 0:
        raise ValueError("fitness values are non-negative")
    return bisect.bisect_right(thresholds, value)


def for_path(cfg: ControlFlowGraph, path: BasisPath, mode: str = "paper",
             delta: float = DEFAULT_DELTA) -> FitnessConfig:
    """Fitness target for a basis path.

    Paper mode aims at the boundary of the last predicate on the path; a
    path with no predicate at all falls back to path mode.
    """
    if mode == "paper":
        preds = [n for n in path.node_seq if cfg.node(n).kind == PREDICATE]
        if preds:
            return FitnessConfig(delta, "paper", target_predicate=preds[-1])
    return FitnessConfig(delta, "path", target_path=path)
