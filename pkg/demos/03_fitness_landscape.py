"""
The shape of the fitness function
==================================

Fitness is ``1 / (|A - B| + delta)**2`` at the inner ATM decision. It is
flat almost everywhere and spikes at the single input where ``A == B``.
"""

import numpy as np

from pathga import bundled, load_program
from pathga.cfg import build_cfg
from pathga.executor import execute
from pathga.fitness import FitnessConfig, class_labels, classify

program = load_program(bundled("atm"))
cfg = build_cfg(program)
target = FitnessConfig(target_predicate=cfg.predicates[1])

for wd in (0, 20000, 23990, 23998, 23999, 24000, 24001, 24002, 25000, 30000):
    fv = target.score(execute(program, {"wd_amt": wd}, cfg=cfg), cfg)
    print(f"wd_amt={wd:>5}  fitness={fv.value:.6g}  class={class_labels()[classify(fv.value)]}")

# share of the whole input domain per fitness class
values = np.array([target.score(execute(program, {"wd_amt": wd}, cfg=cfg), cfg).value
                   for wd in range(32768)])
counts = np.bincount([classify(v) for v in values], minlength=4)
for label, count in zip(class_labels(), counts):
    print(f"{label:<16} {count:>6}")
