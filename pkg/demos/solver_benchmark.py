"""A small version of the replicated solver benchmark.

Each replication draws a fresh truth from the chosen model, samples 200
Gaussian rows, tunes the penalty by 5-fold cross-validation and scores the
estimate by RMSE and Stein's entropy loss.  The full study uses 100
replications; ten keep this script under a minute.

Usage: ``python demos/solver_benchmark.py [n_reps]``
"""

import sys

from spectral_cggm.simbench import (BENCH_MAX_OUTER_ITERS, MODELS, GeneratorSpec,
                                    run_benchmark)
from spectral_cggm.solvers import SolverConfig


def main(n_reps):
    cfg = SolverConfig(max_outer_iters=BENCH_MAX_OUTER_ITERS)
    for model in MODELS:
        report = run_benchmark(GeneratorSpec(model), n_reps=n_reps, seed=0, cfg=cfg)
        print(f"\n{model} model, {n_reps} replications")
        print(report.to_text(), end="")
        fastest = min(report.rows, key=lambda r: r["exec_time_seconds"]["mean"])
        for row in report.rows:
            ratio = row["exec_time_seconds"]["mean"] / fastest["exec_time_seconds"]["mean"]
            print(f"  {row['solver']:<12} {ratio:6.1f}x the time of {fastest['solver']}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 10)
