"""
Running a program and measuring branch distance
================================================

Each predicate evaluation is rewritten as ``F rel 0``. The magnitude of
``F`` says how far an input is from taking the other branch.
"""

from pathga import bundled, load_program
from pathga.cfg import build_cfg, enumerate_basis_paths
from pathga.executor import branch_function, divergence_point, execute
from pathga.lang import parse

program = load_program(bundled("atm"))
cfg = build_cfg(program)
fail_path, refused_path, success_path = enumerate_basis_paths(cfg)

print(branch_function("<", 500, 1000))   # (-500, '<'): true, 500 away from false
print(branch_function(">=", 500, 1000))  # (500, '<='): false, 500 away from true

for wd in (10000, 24500, 30000):
    trace = execute(program, {"wd_amt": wd}, cfg=cfg)
    print(f"--- wd_amt = {wd}")
    print(trace.dump(), end="")
    matched, ob = divergence_point(trace, success_path, cfg)
    if ob is None:
        print("follows the success path")
    else:
        print(f"leaves the success path at node {ob.node_id} after {matched} nodes, distance {ob.distance}")

print(execute(load_program(bundled("gcd")), {"a": 12, "b": 18}).records)

# loops are bounded by a step budget rather than hanging the search
spin = parse("input n in [0, 9]; while n >= 0 { n := n + 1; }")
print(execute(spin, {"n": 3}, step_limit=200).terminated)
