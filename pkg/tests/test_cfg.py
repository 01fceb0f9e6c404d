import random
import re

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pathga.cfg import (
    ENTRY, EXIT, PREDICATE, build_cfg, cyclomatic_complexity, enumerate_basis_paths,
    export_dot, incidence_rank, verify_independence,
)
from pathga.lang import parse

from .progs import count_predicates, random_program

STRAIGHT = "input x in [0, 9]; a := x; b := a + 1; c := b * 2;"
IF_ELSE = "input x in [0, 9]; if x > 4 { y := 1; } else { y := 2; }"
NESTED3 = """
input x in [0, 9];
if x > 1 {
    if x > 2 {
        if x > 3 { y := 3; } else { y := 2; }
    } else { y := 1; }
} else { y := 0; }
"""


def test_straight_line_chain():
    cfg = build_cfg(parse(STRAIGHT))
    assert (cfg.e, cfg.n) == (4, 5)
    assert [(e.src, e.dst) for e in cfg.edges] == [(0, 1), (1, 2), (2, 3), (3, 4)]
    assert cyclomatic_complexity(cfg) == 1


def test_if_else_counts_match_hand_drawing():
    # entry -> P -> {then, else} -> join -> exit
    cfg = build_cfg(parse(IF_ELSE))
    assert [n.kind for n in cfg.nodes] == [ENTRY, PREDICATE, "statement", "statement", "statement", EXIT]
    assert (cfg.n, cfg.e) == (6, 6)
    assert cyclomatic_complexity(cfg) == 2


def test_atm_graph(atm_cfg):
    # entry, 3 assignments, 2 predicates, fail, success, 2 joins, exit
    assert atm_cfg.n == 11 and atm_cfg.e == 12
    assert len(atm_cfg.predicates) == 2
    labels = [atm_cfg.node(p).label() for p in atm_cfg.predicates]
    assert labels == ["if wd_amt < net_amt", "if bal < min_bal"]
    assert cyclomatic_complexity(atm_cfg) == 3 == len(atm_cfg.predicates) + 1
    assert atm_cfg.check() == []


def test_nested_ifs():
    cfg = build_cfg(parse(NESTED3))
    assert cyclomatic_complexity(cfg) == 4 == len(cfg.predicates) + 1


def test_while_shape():
    cfg = build_cfg(parse("input x in [0, 3]; while x > 0 { x := x - 1; } record r x;"))
    pred = cfg.predicates[0]
    body = cfg.successor(pred, "true")
    assert cfg.successor(body) == pred  # back edge
    assert cfg.node(cfg.successor(pred, "false")).label() == "record r x"
    assert cyclomatic_complexity(cfg) == 2


def test_empty_body():
    cfg = build_cfg(parse("input x in [0, 1];"))
    assert (cfg.n, cfg.e) == (2, 1)
    assert len(enumerate_basis_paths(cfg)) == 1


def test_basis_straight_line():
    cfg = build_cfg(parse(STRAIGHT))
    [path] = enumerate_basis_paths(cfg)
    assert path.node_seq == (0, 1, 2, 3, 4)


def test_basis_if_else():
    cfg = build_cfg(parse(IF_ELSE))
    paths = enumerate_basis_paths(cfg)
    assert [p.signature for p in paths] == [("T",), ("F",)]
    assert np.linalg.matrix_rank(np.array([p.edge_vector for p in paths])) == 2


def test_basis_atm(atm_cfg, atm_paths):
    assert [p.signature_text for p in atm_paths] == ["T,T", "F", "T,F"]
    assert atm_paths[0].node_seq == (0, 1, 2, 3, 4, 5, 6, 8, 9, 10)
    assert atm_paths[1].node_seq == (0, 1, 2, 3, 4, 9, 10)
    assert atm_paths[2].node_seq == (0, 1, 2, 3, 4, 5, 7, 8, 9, 10)
    assert np.linalg.matrix_rank(np.array([p.edge_vector for p in atm_paths])) == 3
    assert verify_independence(atm_paths, atm_cfg)


def test_verify_independence_rejects_duplicates(atm_cfg, atm_paths):
    assert not verify_independence([atm_paths[0], atm_paths[0]], atm_cfg)


def test_verify_independence_overfull_if_else():
    cfg = build_cfg(parse(IF_ELSE))
    then_path, else_path = enumerate_basis_paths(cfg)
    assert not verify_independence([then_path, else_path, then_path], cfg)


def test_incidence_rank_exact():
    assert incidence_rank([[1, 1, 0], [0, 1, 1], [1, 2, 1]]) == 2
    assert incidence_rank([]) == 0


def test_loop_basis_runs_body_once():
    src = "input x in [0, 9]; while x < 5 { if x = 2 { x := x + 2; } x := x + 1; }"
    cfg = build_cfg(parse(src))
    paths = enumerate_basis_paths(cfg)
    assert [p.signature_text for p in paths] == ["F", "T,T,F", "T,F,F"]
    loop = cfg.predicates[0]
    assert all(p.node_seq.count(loop) <= 2 for p in paths)


def test_dot_atm(atm_cfg):
    text = export_dot(atm_cfg)
    assert text.count("shape=diamond") == 2
    for pred in atm_cfg.predicates:
        out = re.findall(rf"^  n{pred} -> n\d+ \[label=\"(true|false)\"\];$", text, re.M)
        assert sorted(out) == ["false", "true"]
    assert len(re.findall(r'\[label="(true|false)"\]', text)) == 4
    assert text == export_dot(atm_cfg)


def test_dot_empty_program():
    text = export_dot(build_cfg(parse("input x in [0, 1];")))
    assert len(re.findall(r"^  n\d+ \[", text, re.M)) == 2
    assert "n0 -> n1;" in text


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_basis_properties_random(seed):
    prog = random_program(random.Random(seed))
    cfg = build_cfg(prog)
    assert cfg.check() == []
    vg = cyclomatic_complexity(cfg)
    assert vg == count_predicates(prog) + 1 == cfg.e - cfg.n + 2
    paths = enumerate_basis_paths(cfg)
    assert len(paths) == vg
    assert verify_independence(paths, cfg)
    assert np.linalg.matrix_rank(np.array([p.edge_vector for p in paths])) == vg
    covered = np.array([p.edge_vector for p in paths]).sum(axis=0)
    assert (covered > 0).all(), "every edge lies on some basis path"
    for path in paths:
        assert path.node_seq[0] == cfg.entry and path.node_seq[-1] == cfg.exit
        assert all(cfg.has_edge(a, b) for a, b in zip(path.node_seq, path.node_seq[1:]))
        assert max(path.node_seq.count(n) for n in set(path.node_seq)) <= 2


def test_verify_independence_wrong_graph(atm_paths):
    with pytest.raises(ValueError):
        verify_independence(atm_paths, build_cfg(parse(STRAIGHT)))
