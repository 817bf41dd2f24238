#!/usr/bin/env python3
"""Race plain gradient descent with and without label smoothing.

Both runs start from the same random initialization and stop when the loss gap
drops below a fixed fraction of its initial value.  Smoothing flattens the
sharpest Hessian directions at the optimum, so the smoothed run should reach
the threshold in fewer iterations for most seeds.

Example:
    python scripts/run_convergence_race.py --seeds 10 --delta 0.1
"""

import argparse
from dataclasses import replace

from ufmlab.config import OptimizerConfig, ProblemConfig
from ufmlab.descent import iterations_to_epsilon, run


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--K", type=int, default=10)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--d", type=int, default=12)
    p.add_argument("--lam", type=float, default=5e-3)
    p.add_argument("--delta", type=float, default=0.1,
                   help="smoothing value to race against delta=0")
    p.add_argument("--lr", type=float, default=10.0)
    p.add_argument("--max-iters", type=int, default=30_000)
    p.add_argument("--rel-eps", type=float, default=1e-4,
                   help="stop when loss gap < rel_eps * initial gap")
    p.add_argument("--seeds", type=int, default=10)
    return p.parse_args()


def main():
    args = parse_args()
    base = ProblemConfig(K=args.K, n=args.n, d=args.d,
                         lambda_w=args.lam, lambda_h=args.lam, lambda_b=args.lam)
    wins = 0
    print(f"{'seed':>4s}  {'iters(0)':>9s}  {'iters(' + str(args.delta) + ')':>10s}")
    for seed in range(args.seeds):
        iters = {}
        for delta in (0.0, args.delta):
            opt = OptimizerConfig(learning_rate=args.lr, momentum=0.0,
                                  max_iters=args.max_iters, loss_tol=1e-12,
                                  record_every=10**9, seed=seed)
            traj = run(replace(base, delta=delta), opt, compute_metrics=False)
            init_gap = traj.loss_history[0] - traj.optimal_value
            iters[delta] = iterations_to_epsilon(
                traj, traj.optimal_value, args.rel_eps * init_gap
            )
        smoothed_wins = iters[args.delta] is not None and (
            iters[0.0] is None or iters[args.delta] < iters[0.0]
        )
        wins += smoothed_wins
        fmt = lambda v: "n/a" if v is None else str(v)
        print(f"{seed:4d}  {fmt(iters[0.0]):>9s}  {fmt(iters[args.delta]):>10s}")
    print(f"\nsmoothing won {wins}/{args.seeds} seeds")


if __name__ == "__main__":
    main()
