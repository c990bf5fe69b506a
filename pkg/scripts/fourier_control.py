"""Negative control: the Fourier backend with a constant sigma^192 filter.

The jump at t = 10 should miss the exact amplitude by more than 20%;
the default KSS run is printed alongside for contrast.
"""

import argparse
from pathlib import Path

from singsurf import svgplot
from singsurf.shock_solver import (RegularizationSchedule, ShockConfig, measure_jump,
                                   measure_shock_front, solve_shock)
from singsurf.surface import IsothermalShockParams, shock_amplitude


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8192)
    ap.add_argument("--t", type=float, default=10.0)
    ap.add_argument("--power", type=float, default=192.0)
    ap.add_argument("--out", type=Path, default=Path("out/fourier"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    p = IsothermalShockParams()
    rows = {}
    constant = RegularizationSchedule.constant(args.power, args.t)
    # reference row: KSS with its default regularization schedule
    for backend, extra in (("fourier", dict(schedule=constant)), ("kss", {})):
        cfg = ShockConfig(n=args.n, t_end=args.t, snapshots=(args.t,), backend=backend, **extra)
        s = solve_shock(cfg).at(args.t)
        dz = cfg.grid.dx
        jump = measure_jump(s.z, s.w, measure_shock_front(s.z, s.w, dz), dz)
        rows[backend] = jump / float(shock_amplitude(p, args.t)) - 1
        svgplot.profile_svg(args.out / f"{backend}_t{args.t:g}.svg", s.z, s.w,
                            title=f"{backend}, t = {args.t:g}",
                            xlabel="z", ylabel="w", vlines=[p.c0 * args.t])
    for backend, err in rows.items():
        print(f"{backend:8s} jump error {100 * err:+.1f}%")


if __name__ == "__main__":
    main()
