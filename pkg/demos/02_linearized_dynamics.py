#!/usr/bin/env python3
"""Show that the tangent kernel predicts the output change of one small
gradient-descent step.

For a model linear in its parameters the prediction is exact; for a relu
network it is first order in the step size, so halving the step roughly
halves the relative error.
"""

import numpy as np

import ntklens as nl
from ntklens.training import linearized_step_check

rng = np.random.default_rng(3)

print("linear model + mse: prediction is exact at machine precision")
linear = nl.init_network(nl.NetworkSpec((5, 1), activation="linear"), seed=0)
x, y = rng.normal(size=(12, 5)), rng.normal(size=(12, 1))
for eta in (1e-1, 1e-3, 1e-5):
    check = linearized_step_check(linear, x, y, "mse", eta=eta)
    print(f"  eta={eta:8.0e}  rel_err={check.rel_err:.3e}")

print()
print("relu (8, 8, 1) + mse: first-order accuracy, error shrinks with eta")
relu = nl.init_network(nl.NetworkSpec((8, 8, 1)), seed=1)
xr, yr = rng.normal(size=(10, 8)), rng.normal(size=(10, 1))
eta = 1e-3
previous = None
for _ in range(6):
    check = linearized_step_check(relu, xr, yr, "mse", eta=eta)
    ratio = "" if previous is None else f"   (x{check.rel_err / previous:.2f} vs previous)"
    print(f"  eta={eta:8.1e}  rel_err={check.rel_err:.3e}{ratio}")
    previous = check.rel_err
    eta /= 2.0
