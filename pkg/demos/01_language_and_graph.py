"""
From source text to a basis set of paths
=========================================

Parse the bundled ATM program, build its control flow graph and list a
basis set of independent paths.
"""

from pathga import bundled, load_program
from pathga.cfg import (basis_report, build_cfg, cyclomatic_complexity,
                        enumerate_basis_paths, export_dot, verify_independence)
from pathga.lang import pretty_print

program = load_program(bundled("atm"))
print(pretty_print(program))

# one node per statement, one per predicate, plus a join after every if
cfg = build_cfg(program)
for node in cfg.nodes:
    print(node.id, node.kind, node.label())

print("e =", cfg.e, " n =", cfg.n, " V(G) =", cyclomatic_complexity(cfg))

# the baseline walk takes every if's true edge; each later path flips one predicate
paths = enumerate_basis_paths(cfg)
print(basis_report(cfg, paths))
print("independent:", verify_independence(paths, cfg))

# paste into `dot -Tpng` to draw it
print(export_dot(cfg))
