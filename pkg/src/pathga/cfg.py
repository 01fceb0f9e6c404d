"""Control flow graphs, cyclomatic complexity and basis paths.

Node ids are dense and assigned in source order: ``0`` is the entry node and
the exit node is always created last. Every ``if`` gets a join node after its
branches; every ``while`` predicate gets a back edge from the end of its body.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .lang import Assign, If, Program, Record, While, format_expr, format_predicate

__all__ = [
    "BasisPath", "ControlFlowGraph", "Edge", "Node", "basis_report",
    "build_cfg", "cyclomatic_complexity", "enumerate_basis_paths",
    "export_dot", "incidence_rank", "verify_independence",
]

ENTRY, EXIT, STATEMENT, PREDICATE = "entry", "exit", "statement", "predicate"
TRUE, FALSE, UNCONDITIONAL = "true", "false", "unconditional"


@dataclass(frozen=True)
class Node:
    id: int
    kind: str
    stmt: Optional[object] = None

    @property
    def is_loop(self) -> bool:
        return isinstance(self.stmt, While)

    def label(self) -> str:
        if self.kind in (ENTRY, EXIT):
            return self.kind
        if self.stmt is None:
            return "join"
        if isinstance(self.stmt, (If, While)):
            kw = "while" if isinstance(self.stmt, While) else "if"
            return f"{kw} {format_predicate(self.stmt.cond)}"
        if isinstance(self.stmt, Assign):
            return f"{self.stmt.target} := {format_expr(self.stmt.expr)}"
        if isinstance(self.stmt, Record):
            return f"record {self.stmt.label} {format_expr(self.stmt.expr)}"
        return self.kind


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    label: str


class ControlFlowGraph:
    """Single-entry single-exit CFG of a structured program."""

    def __init__(self, nodes: Sequence[Node], edges: Sequence[Edge], joins: Optional[dict] = None):
        self.nodes = tuple(nodes)
        self.edges = tuple(edges)
        # if-predicate id -> id of its join node
        self.joins = dict(joins or {})
        self.stmt_ids = {id(node.stmt): node.id for node in self.nodes if node.stmt is not None}
        self._out = {node.id: {} for node in self.nodes}
        self._edge_index = {}
        for i, edge in enumerate(self.edges):
            self._out[edge.src][edge.label] = edge.dst
            self._edge_index[(edge.src, edge.label)] = i
        self.entry = self.nodes[0].id
        self.exit = self.nodes[-1].id

    @property
    def e(self) -> int:
        return len(self.edges)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def predicates(self) -> list[int]:
        return [node.id for node in self.nodes if node.kind == PREDICATE]

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def successor(self, node_id: int, label: str = UNCONDITIONAL) -> int:
        return self._out[node_id][label]

    def out_edges(self, node_id: int) -> dict:
        return dict(self._out[node_id])

    def edge_index(self, src: int, label: str) -> int:
        return self._edge_index[(src, label)]

    def has_edge(self, src: int, dst: int) -> bool:
        return dst in self._out.get(src, {}).values()

    def node_for_stmt(self, stmt) -> int:
        return self.stmt_ids[id(stmt)]

    def check(self) -> list[str]:
        """Return a list of broken structural invariants (empty when sound)."""
        problems = []
        indeg = {node.id: 0 for node in self.nodes}
        for edge in self.edges:
            indeg[edge.dst] += 1
        if [n for n, d in indeg.items() if d == 0] != [self.entry]:
            problems.append("entry must be the only node with in-degree 0")
        if [n for n, out in self._out.items() if not out] != [self.exit]:
            problems.append("exit must be the only node with out-degree 0")
        for node in self.nodes:
            labels = sorted(self._out[node.id])
            if node.kind == PREDICATE and labels != [FALSE, TRUE]:
                problems.append(f"predicate {node.id} needs true/false out-edges, has {labels}")
            if node.kind in (ENTRY, STATEMENT) and labels != [UNCONDITIONAL]:
                problems.append(f"node {node.id} needs one unconditional out-edge, has {labels}")
        fwd = _reach(self.entry, {n: list(out.values()) for n, out in self._out.items()})
        back = {node.id: [] for node in self.nodes}
        for edge in self.edges:
            back[edge.dst].append(edge.src)
        bwd = _reach(self.exit, back)
        for node in self.nodes:
            if node.id not in fwd or node.id not in bwd:
                problems.append(f"node {node.id} is not on any entry-exit walk")
        return problems


def _reach(start, adjacency) -> set:
    seen, stack = {start}, [start]
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def build_cfg(program: Program) -> ControlFlowGraph:
    nodes: list[Node] = []
    edges: list[Edge] = []
    joins = {}

    def new(kind, stmt=None) -> int:
        nodes.append(Node(len(nodes), kind, stmt))
        return nodes[-1].id

    def link(pending, dst):
        for src, label in pending:
            edges.append(Edge(src, dst, label))

    def block(stmts, pending):
        for stmt in stmts:
            if isinstance(stmt, If):
                pred = new(PREDICATE, stmt)
                link(pending, pred)
                then_out = block(stmt.then, [(pred, TRUE)])
                else_out = block(stmt.orelse, [(pred, FALSE)])
                join = joins[pred] = new(STATEMENT)
                link(then_out + else_out, join)
                pending = [(join, UNCONDITIONAL)]
            elif isinstance(stmt, While):
                pred = new(PREDICATE, stmt)
                link(pending, pred)
                link(block(stmt.body, [(pred, TRUE)]), pred)
                pending = [(pred, FALSE)]
            else:
                node = new(STATEMENT, stmt)
                link(pending, node)
                pending = [(node, UNCONDITIONAL)]
        return pending

    entry = new(ENTRY)
    tail = block(program.body, [(entry, UNCONDITIONAL)])
    link(tail, new(EXIT))
    return ControlFlowGraph(nodes, edges, joins)


def cyclomatic_complexity(cfg: ControlFlowGraph) -> int:
    return cfg.e - cfg.n + 2


@dataclass(frozen=True)
class BasisPath:
    node_seq: tuple
    edge_seq: tuple
    edge_vector: tuple
    signature: tuple  # branch outcomes, "T"/"F", in visiting order

    def __len__(self):
        return len(self.node_seq)

    @property
    def signature_text(self) -> str:
        return ",".join(self.signature)


def _walk(cfg: ControlFlowGraph, prefix: Sequence[tuple], flip_at: Optional[int]) -> BasisPath:
    """Follow ``prefix`` (node, label) decisions, optionally flip the next
    decision at ``flip_at``, then fall back to baseline choices.

    Baseline: ``if`` predicates take the true edge, ``while`` predicates exit.
    A flipped ``while`` runs its body exactly once.
    """
    decisions = list(prefix)
    node_seq, edge_seq = [], []
    visits: dict[int, int] = {}
    pos = cfg.entry
    step = 0
    while True:
        node_seq.append(pos)
        if pos == cfg.exit:
            break
        visits[pos] = visits.get(pos, 0) + 1
        node = cfg.node(pos)
        if node.kind != PREDICATE:
            label = UNCONDITIONAL
        elif step < len(decisions):
            label = decisions[step][1]
            step += 1
        elif pos == flip_at and visits[pos] == 1:
            label = TRUE if node.is_loop else FALSE
        else:
            label = FALSE if node.is_loop else TRUE
        edge_seq.append(cfg.edge_index(pos, label))
        pos = cfg.successor(pos, label)
        if len(node_seq) > 4 * cfg.n + 4:
            raise RuntimeError("basis walk failed to terminate")
    vector = [0] * cfg.e
    for idx in edge_seq:
        vector[idx] = 1
    signature = tuple(
        "T" if cfg.edges[idx].label == TRUE else "F"
        for idx in edge_seq if cfg.edges[idx].label != UNCONDITIONAL
    )
    return BasisPath(tuple(node_seq), tuple(edge_seq), tuple(vector), signature)


def _decisions_until(cfg: ControlFlowGraph, path: BasisPath, node_id: int) -> list:
    """Branch decisions taken by ``path`` strictly before its first visit to ``node_id``."""
    out = []
    for src, idx in zip(path.node_seq, path.edge_seq):
        if src == node_id:
            break
        label = cfg.edges[idx].label
        if label != UNCONDITIONAL:
            out.append((src, label))
    return out


def enumerate_basis_paths(cfg: ControlFlowGraph) -> list[BasisPath]:
    """Baseline method: one baseline path, then one path per predicate.

    Predicates are flipped in ascending node id. Each flip reuses the prefix
    of the earliest existing path that reaches the predicate, takes the
    other branch, then follows baseline choices to the exit.
    """
    paths = [_walk(cfg, [], None)]
    for pred in cfg.predicates:
        carrier = next(p for p in paths if pred in p.node_seq)
        prefix = _decisions_until(cfg, carrier, pred)
        paths.append(_walk(cfg, prefix, pred))
    return paths


def incidence_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank over the rationals by exact Gaussian elimination."""
    matrix = [[Fraction(v) for v in row] for row in rows]
    if not matrix:
        return 0
    rank, ncols = 0, len(matrix[0])
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(matrix)) if matrix[r][col] != 0), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        lead = matrix[rank][col]
        for r in range(len(matrix)):
            if r != rank and matrix[r][col] != 0:
                factor = matrix[r][col] / lead
                matrix[r] = [a - factor * b for a, b in zip(matrix[r], matrix[rank])]
        rank += 1
    return rank


def verify_independence(paths: Sequence[BasisPath], cfg: ControlFlowGraph) -> bool:
    for path in paths:
        if len(path.edge_vector) != cfg.e:
            raise ValueError("path does not belong to this graph")
    return incidence_rank([p.edge_vector for p in paths]) == len(paths)


_SHAPES = {ENTRY: "circle", EXIT: "doublecircle", STATEMENT: "box", PREDICATE: "diamond"}


def export_dot(cfg: ControlFlowGraph, name: str = "cfg") -> str:
    lines = [f"digraph {name} {{"]
    for node in cfg.nodes:
        label = node.label().replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  n{node.id} [shape={_SHAPES[node.kind]}, label="{node.id}: {label}"];')
    for edge in sorted(cfg.edges, key=lambda e: (e.src, e.label != TRUE, e.dst)):
        attr = "" if edge.label == UNCONDITIONAL else f' [label="{edge.label}"]'
        lines.append(f"  n{edge.src} -> n{edge.dst}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def basis_report(cfg: ControlFlowGraph, paths: Sequence[BasisPath]) -> str:
    """Plain-text listing: index, predicate-outcome signature, node sequence."""
    lines = []
    for i, path in enumerate(paths):
        sig = path.signature_text or "-"
        lines.append(f"path {i}: [{sig}] " + " -> ".join(str(n) for n in path.node_seq))
    return "\n".join(lines) + "\n"
