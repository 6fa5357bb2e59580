"""
Benchmark functions and budgeted evaluation
===========================================

Every objective is a formula on ``z = x - shift`` over the box [-5, 5]^D.
Evaluations go through a counter that enforces a hard budget.
"""

import io

import numpy as np

from divturbo.objectives import BudgetedEvaluator, ObjectiveFunction, catalogue, describe

# the catalogue, in its fixed order
for fid in catalogue():
    print(f"{fid:22s} {describe(fid)}")

# a shifted rastrigin: the optimum moves with the shift
f = ObjectiveFunction.create("rastrigin", 2, shift=[1.0, -2.0])
print(f.optimum_location, f(f.optimum_location), f([0.0, 0.0]))

# functions accept a batch of rows as well as a single point
X = np.random.default_rng(0).uniform(-5, 5, size=(4, 2))
print(f(X))

# the budget is hard; every call lands in the audit log
log = io.StringIO()
ev = BudgetedEvaluator(f, max_evals=3, stream=log)
for x in X[:3]:
    ev.evaluate(x)
print(ev.remaining)
print(log.getvalue())
