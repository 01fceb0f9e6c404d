"""
Genetic search against random sampling
=======================================

Evolve inputs for the inner ATM boundary, look at the final population the
way a fitness-class table would, then compare with uniform random search on
the same budget.
"""

import dataclasses

from pathga import bundled, load_program
from pathga.cfg import build_cfg
from pathga.fitness import FitnessConfig
from pathga.ga import Evaluator, GaConfig, evolve, random_search
from pathga.report import FitnessReport

program = load_program(bundled("atm"))
cfg = build_cfg(program)
target = FitnessConfig(target_predicate=cfg.predicates[1])
config = GaConfig(seed=0)

result = evolve(program, target, config)
print("covered:", result.covered, "best:", result.best.decoded,
      "after", result.evaluations_to_coverage, "evaluations")
print(FitnessReport.from_values(result.final_fitness).render())

# a run that gets stuck one step below the optimum: 23999 and 24000 differ in 7 bits
stuck = evolve(program, target, dataclasses.replace(config, seed=3))
print("seed 3 best:", stuck.best.decoded, "covered:", stuck.covered)
gray = evolve(program, target, dataclasses.replace(config, seed=3, encoding="gray"))
print("seed 3 with Gray coding:", gray.best.decoded, "covered:", gray.covered)

with Evaluator(program, target) as ev:
    for seed in range(5):
        ga = evolve(program, target, dataclasses.replace(config, seed=seed), evaluator=ev)
        rnd = random_search(program, target, ga.evaluations, seed=seed, evaluator=ev)
        print(f"seed {seed}: GA {ga.evaluations_to_coverage}  random {rnd.evaluations_to_coverage}")
