"""Maximize an invariant integral functional on the unit energy sphere.

Projected gradient ascent with periodic recentering maximizes the
integral of F(u) d(mu) subject to a(u, u) = t.  The recentering step
quotients out the noncompact Moebius symmetry: starting from a shifted
seed lands on the same maximum value.
"""

import warnings

from moebiusdisk import (
    OptimizerConfig,
    TruncationWarning,
    make_grid,
    maximize,
    polar_lift,
    pullback,
    quartic,
    smooth_bump,
)


def main():
    grid = make_grid(256, 128, 8.0)
    seed = smooth_bump(grid, 1.5, energy=1.0)
    config = OptimizerConfig(t=1.0, step=1.0, max_iters=300, grad_tol=1e-6,
                             recenter_every=10)
    F = quartic()

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        trace = maximize(seed, F, config)
        shifted = pullback(seed, polar_lift(1.0, 0.7))
        trace_shifted = maximize(shifted, F, config)

    print(f"centered seed:  {trace.status} after "
          f"{len(trace.objective_history)} iterations")
    print(f"  objective = {trace.final_objective:.8f}, "
          f"residual = {trace.final_residual:.2e}, "
          f"energy drift = {max(trace.drift_history):.2e}")
    print(f"shifted seed:   {trace_shifted.status}, "
          f"objective = {trace_shifted.final_objective:.8f}")
    diff = abs(trace.final_objective - trace_shifted.final_objective)
    print(f"  objective gap between the two runs: {diff:.2e} "
          "(the symmetry is quotiented out)")

    print("\nobjective history (every 5th iteration):")
    for i, v in enumerate(trace.objective_history):
        if i % 5 == 0:
            print(f"  iter {i:3d}: {v:.8f}")


if __name__ == "__main__":
    main()
