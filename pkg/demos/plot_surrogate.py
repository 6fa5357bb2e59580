"""
A Matern-5/2 surrogate and Thompson sampling
============================================

Fit a GP to a few noise-free samples of a 1-D function with two equally deep
minima, then let Thompson sampling pick a batch from a candidate grid.
"""

import numpy as np

from divturbo.surrogate import fit, posterior, thompson_select

rng = np.random.default_rng(1)
X = np.linspace(0, 1, 9)[:, None]
y = np.cos(4 * np.pi * X[:, 0])

model = fit(X, y, rng=rng)
print(model.hyper)

grid = np.linspace(0, 1, 201)[:, None]
mean, var = posterior(model, grid)
print("largest posterior sd:", np.sqrt(var.max()))

# paths disagree about which basin is lower, so both get picked
idx = thompson_select(model, grid, 8, rng)
print(np.sort(grid[idx, 0]))
