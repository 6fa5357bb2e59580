"""
Ten diverse solutions three ways
================================

Compare the sequential and interleaving drivers with the ranked
multi-region baseline on 2-D rastrigin, which has many local minima.
"""

import numpy as np

from divturbo import harness
from divturbo.meta import budget_rule

f = harness.make_objective("rastrigin", 2)
budget = budget_rule(2, m=10)
tau = 1.0

for algo in ("seq", "int", "robot"):
    res = harness.run_algorithm(algo, f, tau, budget, m=10, seed=0)
    X = res.elites.as_array()
    d = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))[np.triu_indices(10, 1)]
    print(f"{algo:6s} mean {res.mean_value:8.4f}  min gap {d.min():.3f}  "
          f"all feasible {all(res.elites.flags)}  evals {res.evals_used}")
