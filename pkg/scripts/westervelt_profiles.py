"""Westervelt fronts for eps = 0.35 and 0.4 with theory tangents and an FDS overlay.

For each snapshot the script prints the fitted front offset, slope error
and the KSS-vs-FDS difference behind the front, and writes an SVG with
the predicted front and tangent line dashed.
"""

import argparse
from pathlib import Path

import numpy as np

from singsurf import svgplot
from singsurf.fds_reference import fds_solve
from singsurf.lwe_solver import LweConfig, fit_front, solve_lwe, theory_front_slope
from singsurf.surface import LweParams, lwe_times


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8192)
    ap.add_argument("--m", type=int, default=2048)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.35, 0.4])
    ap.add_argument("--times", type=float, nargs="+", default=[0.3, 0.6])
    ap.add_argument("--out", type=Path, default=Path("out/westervelt"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for eps in args.eps:
        p = LweParams(1.4, eps).with_bullet_alpha()
        res = solve_lwe(LweConfig(params=p, n=args.n, t_end=max(args.times),
                                  snapshots=tuple(args.times)))
        fds = fds_solve(p, args.m, lwe_times(p).t_f, tuple(args.times))
        dx = res.config.grid.dx
        for T in args.times:
            s, f = res.at(T), fds.at(T)
            ram, jump = theory_front_slope(p, T)
            front, slope = fit_front(s.X, s.P, dx)
            behind = f.X <= ram - 20 * dx
            diff = np.abs(np.interp(f.X[behind], s.X, s.P) - f.P[behind]).max()
            print(f"eps={eps} T={T:g}: front {(front - ram) / dx:+.2f} dx, "
                  f"slope {100 * (slope / jump - 1):+.2f}%, FDS diff {diff:.1e}")
            xs = np.array([ram - 0.1, ram])
            svgplot.profile_svg(args.out / f"lwe_eps{eps:g}_T{T:g}.svg", s.X, s.P,
                                title=f"eps = {eps:g}, T = {T:g} (dashed: theory, FDS)",
                                xlabel="X", ylabel="P", vlines=[ram],
                                lines=[(xs, jump * (xs - ram)), (f.X, f.P)])


if __name__ == "__main__":
    main()
