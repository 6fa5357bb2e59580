"""
A tiny experiment and its summary table
=======================================

The harness runs every (algorithm, function, D, tau, repeat) cell with its
own derived seed, appends one line per cell to a results file and renders
mean, st.dev and significance symbols per algorithm.
"""

import tempfile

from divturbo import harness

CONFIG = """
[experiment]
functions = sphere
dims = 2
taus = 1.0
m = 3
repeats = 4
budget_rule = 60
algorithms = seq, robot
"""

with tempfile.TemporaryDirectory() as out:
    records = harness.run_experiment(harness.parse_config(CONFIG), out)
    print(open(f"{out}/results.csv").readline().strip())
    print(harness.format_summary(harness.summarize(records)))
