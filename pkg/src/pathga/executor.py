"""Tracing interpreter.

Runs a program on one integer input vector, walking the same node ids that
:func:`pathga.cfg.build_cfg` assigns, and records the branch-function value
of every predicate it evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .cfg import FALSE, PREDICATE, TRUE, UNCONDITIONAL, BasisPath, ControlFlowGraph, build_cfg
from .lang import Assign, BinOp, If, Neg, Num, Program, Record, Var, While

__all__ = [
    "ExecutionTrace", "PredicateObservation", "branch_function", "check_inputs",
    "covers", "divergence_point", "execute", "trace_edges", "predicate_holds", "NORMAL", "STEP_LIMIT",
    "RUNTIME_ERROR", "DEFAULT_STEP_LIMIT",
]

NORMAL, STEP_LIMIT, RUNTIME_ERROR = "normal", "step_limit", "runtime_error"
DEFAULT_STEP_LIMIT = 10_000


def branch_function(op: str, e1: int, e2: int) -> tuple[int, str]:
    """Rewrite ``e1 op e2`` as ``F rel 0``.

    ``F`` is negative, or zero at a non-strict boundary, exactly when the
    predicate holds.

    >>> branch_function(">", 5, 3)
    (-2, '<')
    """
    if op == ">":
        return e2 - e1, "<"
    if op == ">=":
        return e2 - e1, "<="
    if op == "<":
        return e1 - e2, "<"
    if op == "<=":
        return e1 - e2, "<="
    if op == "=":
        return abs(e1 - e2), "="
    if op == "!=":
        return abs(e1 - e2), "!="
    raise ValueError(f"unknown relational operator {op!r}")


def predicate_holds(f: int, rel: str) -> bool:
    """Decide the branch from ``F rel 0`` alone."""
    if rel == "<":
        return f < 0
    if rel == "<=":
        return f <= 0
    if rel == "=":
        return f == 0
    if rel == "!=":
        return f != 0
    raise ValueError(f"unknown relation {rel!r}")


@dataclass(frozen=True)
class PredicateObservation:
    node_id: int
    f_value: int
    rel: str
    outcome: bool
    lhs: int = 0
    rhs: int = 0

    @property
    def distance(self) -> int:
        return abs(self.f_value)


@dataclass(frozen=True)
class ExecutionTrace:
    node_seq: tuple
    observations: tuple
    records: tuple
    steps: int
    terminated: str
    error: Optional[str] = field(default=None, compare=False)

    def record_values(self, label: str) -> list[int]:
        return [v for lab, v in self.records if lab == label]

    def dump(self) -> str:
        lines = [f"terminated: {self.terminated}" + (f" ({self.error})" if self.error else ""),
                 "nodes: " + " ".join(map(str, self.node_seq))]
        for ob in self.observations:
            lines.append(f"  node {ob.node_id}: F={ob.f_value} {ob.rel} 0 -> {'T' if ob.outcome else 'F'}")
        for label, value in self.records:
            lines.append(f"  record {label} = {value}")
        return "\n".join(lines) + "\n"


class _Abort(Exception):
    def __init__(self, reason, message=None):
        self.reason = reason
        self.message = message


def _trunc_div(a: int, b: int) -> int:
    if b == 0:
        raise _Abort(RUNTIME_ERROR, "division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def eval_expr(expr, env: Mapping[str, int]) -> int:
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return env[expr.name]
        except KeyError:
            raise _Abort(RUNTIME_ERROR, f"{expr.name!r} is undefined") from None
    if isinstance(expr, Neg):
        return -eval_expr(expr.operand, env)
    if isinstance(expr, BinOp):
        a = eval_expr(expr.left, env)
        b = eval_expr(expr.right, env)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if expr.op == "/":
            return _trunc_div(a, b)
    raise _Abort(RUNTIME_ERROR, f"cannot evaluate {expr!r}")


def check_inputs(program: Program, inputs: Mapping[str, int]) -> None:
    names = set(program.input_names)
    if set(inputs) != names:
        raise ValueError(f"input vector must cover exactly {sorted(names)}, got {sorted(inputs)}")
    for decl in program.inputs:
        value = inputs[decl.name]
        if not decl.lo <= value <= decl.hi:
            raise ValueError(f"{decl.name}={value} outside [{decl.lo}, {decl.hi}]")


def execute(program: Program, inputs: Mapping[str, int], step_limit: int = DEFAULT_STEP_LIMIT,
            cfg: Optional[ControlFlowGraph] = None) -> ExecutionTrace:
    """Interpret ``program`` and return the trace of visited CFG nodes.

    ``steps`` counts node visits, entry and exit included. A run that would
    exceed ``step_limit`` stops with ``terminated == "step_limit"``. Pass a
    prebuilt ``cfg`` when executing the same program many times.
    """
    check_inputs(program, inputs)
    if cfg is None:
        cfg = build_cfg(program)
    ids = cfg.stmt_ids
    env = dict(inputs)
    node_seq = [cfg.entry]
    observations = []
    records = []
    terminated, error = NORMAL, None

    def visit(node_id):
        if len(node_seq) >= step_limit:
            raise _Abort(STEP_LIMIT)
        node_seq.append(node_id)

    def test(stmt) -> bool:
        node_id = ids[id(stmt)]
        visit(node_id)
        lhs = eval_expr(stmt.cond.left, env)
        rhs = eval_expr(stmt.cond.right, env)
        f, rel = branch_function(stmt.cond.op, lhs, rhs)
        outcome = predicate_holds(f, rel)
        observations.append(PredicateObservation(node_id, f, rel, outcome, lhs, rhs))
        return outcome

    def run(block):
        for stmt in block:
            if isinstance(stmt, Assign):
                visit(ids[id(stmt)])
                env[stmt.target] = eval_expr(stmt.expr, env)
            elif isinstance(stmt, Record):
                visit(ids[id(stmt)])
                records.append((stmt.label, eval_expr(stmt.expr, env)))
            elif isinstance(stmt, If):
                run(stmt.then if test(stmt) else stmt.orelse)
                visit(cfg.joins[ids[id(stmt)]])
            elif isinstance(stmt, While):
                while test(stmt):
                    run(stmt.body)

    try:
        run(program.body)
        visit(cfg.exit)
    except _Abort as stop:
        terminated, error = stop.reason, stop.message
    except RecursionError:
        terminated, error = RUNTIME_ERROR, "expression nesting too deep"
    return ExecutionTrace(tuple(node_seq), tuple(observations), tuple(records),
                          len(node_seq), terminated, error)


def trace_edges(trace: ExecutionTrace, cfg: ControlFlowGraph) -> list[int]:
    """Edge indices walked by ``trace``; predicates resolve through their outcomes."""
    outcomes = iter(trace.observations)
    edges = []
    # only the final node of an aborted run can be a predicate without an observation
    for src in trace.node_seq[:-1]:
        if cfg.node(src).kind == PREDICATE:
            label = TRUE if next(outcomes).outcome else FALSE
        else:
            label = UNCONDITIONAL
        edges.append(cfg.edge_index(src, label))
    return edges


def divergence_point(trace: ExecutionTrace, target: BasisPath,
                     cfg: ControlFlowGraph) -> tuple[int, Optional[PredicateObservation]]:
    """Length of the common node prefix with ``target``, plus the observation
    at the predicate where the trace left it.

    The observation is ``None`` when the trace covers the target or stopped
    (error, step limit, early exit) before taking a different branch.
    """
    edges = trace_edges(trace, cfg)
    matched = 0
    n_obs = 0
    for k, node in enumerate(target.node_seq):
        if k >= len(trace.node_seq) or trace.node_seq[k] != node:
            break
        matched = k + 1
        if k < len(edges) and k < len(target.edge_seq) and cfg.node(node).kind == PREDICATE:
            ob = trace.observations[n_obs]
            n_obs += 1
            if edges[k] != target.edge_seq[k]:
                return matched, ob
    return matched, None


def covers(trace: ExecutionTrace, target: BasisPath) -> bool:
    return trace.terminated == NORMAL and trace.node_seq == target.node_seq
