"""
One diverse trust-region run
============================

A single run looks for the best point that keeps at least ``tau`` away from
a fixed set of elites. With no elites it is plain TuRBO-1.
"""

import numpy as np

from divturbo.diversity import EliteSet, min_distance_to_set
from divturbo.divturbo1 import DivTurboConfig, run
from divturbo.objectives import BudgetedEvaluator, ObjectiveFunction

f = ObjectiveFunction.create("sphere", 2)

best, state = run(BudgetedEvaluator(f, 200), EliteSet(1.0), DivTurboConfig(seed=0))
print("unconstrained:", best.x, best.value)

# exclude a disc of radius 1.5 around the optimum
elites = EliteSet(1.5, (np.zeros(2),), (0.0,))
best, state = run(BudgetedEvaluator(f, 200), elites, DivTurboConfig(seed=0))
print("constrained:  ", best.x, best.value, best.feasible)
print("distance to the elite:", min_distance_to_set(best.x, elites))
print("trust-region restarts:", state.restarts)
