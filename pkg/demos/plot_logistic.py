"""
Sparse logistic regression
==========================

Batch DRs on an l1-regularized logistic loss. Each z-update is itself a prox
of the logistic loss, solved by a few damped Newton steps.
"""

import numpy as np

from odrs import SolverConfig, generate_logistic, run

problem = generate_logistic(seed=0, N=200, n=10, k=3)

# The loss is flat compared with the prox term at lam = 1, so progress per
# iteration is slow there. A larger step converges in far fewer iterations.
for lam in (1.0, 10.0):
    cb = problem.callbacks(lam)
    x, trace = run(problem, "drs", SolverConfig(lam=lam, iterations=3000), callbacks=cb)
    print(f"lam={lam:g}: objective {trace[-1].objective:.10f}")

f_ref = problem.objective(problem.reference(1e-10))
print("objective gap:", problem.objective(x) - f_ref)
print("Newton steps per prox: max", max(cb.inner_iterations),
      "mean", np.mean(cb.inner_iterations))

# Training accuracy of the sign classifier
pred = np.sign(problem.samples @ x)
print("training accuracy:", np.mean(pred == problem.labels))
