"""
Solving a small lasso with Douglas-Rachford splitting
=====================================================

Generate a sparse regression problem, solve it with batch DRs, and check the
answer against the proximal-gradient reference solver.
"""

import numpy as np

from odrs import SolverConfig, generate_lasso, run

# The classic scaling (b = A x0 + noise) keeps the objective O(1), which makes
# the printed numbers easier to read than the tiny default scaling.
problem = generate_lasso(seed=0, N=200, n=30, k=4, scaling="classic")
print("mu =", problem.mu)

x, trace = run(problem, "drs", SolverConfig(lam=1.0, iterations=2000))

# The trace has one record per iteration: objective, accuracy measure and
# average regret.
for rec in trace[:5] + trace[-1:]:
    print(f"t={rec.t:4d}  f={rec.objective:.10f}  |eps|={rec.eps_norm:.2e}")

x_ref = problem.reference(1e-10)
print("gap to reference:", problem.objective(x) - problem.objective(x_ref))

# Support recovery against the planted vector
print("planted support:  ", np.flatnonzero(problem.ground_truth))
print("recovered support:", np.flatnonzero(np.abs(x) > 1e-8))
