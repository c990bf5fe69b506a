"""Lanczos backend on the eps = 0.35 Westervelt run: Krylov cost and breakdown time.

Prints iterations per product, the slope error at T = 0.3 and whether
the Krylov tolerance failed before t_end.
"""

import argparse

import numpy as np

from singsurf.lwe_solver import (LweBreakdown, LweConfig, SigmaSchedule, fit_front,
                                 solve_lwe)
from singsurf.surface import LweParams, lwe_jumps


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--cfl", type=float, default=10.0)
    ap.add_argument("--tol", type=float, default=1e-4)
    ap.add_argument("--t-end", type=float, default=0.8)
    args = ap.parse_args()

    p = LweParams(1.4, 0.35).with_bullet_alpha()
    cfg = LweConfig(params=p, n=args.n, cfl=args.cfl, t_end=args.t_end, backend="lanczos",
                    tol=args.tol, schedule=SigmaSchedule.utt_only(4096.0), snapshots=(0.3,))
    with np.errstate(all="ignore"):
        try:
            res, broke = solve_lwe(cfg), None
        except LweBreakdown as exc:
            res, broke = exc.partial, exc.time
    its = np.array(res.counter.krylov_iterations)
    s = res.at(0.3)
    slope = fit_front(s.X, s.P, cfg.grid.dx)[1]
    print(f"krylov iterations per product: min {its.min()}, median {np.median(its):g}, "
          f"max {its.max()}")
    print(f"slope error at T=0.3: {100 * (slope / lwe_jumps(p, 0.3).jump_px - 1):+.1f}%")
    print(f"breakdown at T={broke:.4f}" if broke is not None
          else f"no Krylov breakdown by T={args.t_end:g}"
          + (f" (run truncated at T={res.truncated_at:.4f})" if res.truncated_at else ""))


if __name__ == "__main__":
    main()
