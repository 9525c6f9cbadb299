#!/usr/bin/env python3
"""Desk-scale version of the correlation study on the fuel-economy table.

Each run draws a training-subset size at random, measures the kernel
entropy and trace of a freshly initialized network on that subset before
any optimizer step, trains, and logs the outcomes.  The Pearson matrix over
the ensemble shows larger starting trace/entropy lining up with lower test
loss and higher train loss.

Takes about a minute; pass --runs to change the ensemble.
"""

import argparse

from ntklens.experiments import CorrelationConfig, run_correlation_experiment

parser = argparse.ArgumentParser()
parser.add_argument("--runs", type=int, default=40)
args = parser.parse_args()

cfg = CorrelationConfig(preset="fuel", runs=args.runs, size_min=16, size_max=200,
                        master_seed=0, workers=2)
outcome = run_correlation_experiment(cfg)

records = [r for r in outcome.records if not r.diverged]
print(f"{len(records)} runs ({outcome.n_diverged} diverged), "
      f"sizes {min(r.dataset_size for r in records)}..{max(r.dataset_size for r in records)}")
print(f"best min_test_loss: {min(r.min_test_loss for r in records):.4f}")
print()

matrix = outcome.matrix
width = max(len(n) for n in matrix.variable_names)
print("pearson matrix:")
print(" " * (width + 1) + "  ".join(f"{n[:9]:>9s}" for n in matrix.variable_names))
for name, row in zip(matrix.variable_names, matrix.entries):
    print(f"{name:>{width}s} " + "  ".join(f"{v:+9.3f}" for v in row))

print()
for a, b in [("starting_trace", "min_test_loss"),
             ("starting_entropy", "min_test_loss"),
             ("starting_trace", "min_train_loss")]:
    print(f"r({a}, {b}) = {matrix.value(a, b):+.3f}")
