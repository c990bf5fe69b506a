"""Isothermal shock: KSS profiles at t = 0.5, 5, 10 against the exact solution.

Writes one SVG per time and prints front offset, jump error and the
behind-front error.
"""

import argparse
from pathlib import Path

import numpy as np

from singsurf import svgplot
from singsurf.analytic_shock import exact_profile
from singsurf.shock_solver import ShockConfig, measure_jump, measure_shock_front, solve_shock
from singsurf.surface import IsothermalShockParams, shock_amplitude


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8192)
    ap.add_argument("--out", type=Path, default=Path("out/shock"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    p = IsothermalShockParams()
    times = (0.5, 5.0, 10.0)
    res = solve_shock(ShockConfig(n=args.n, t_end=times[-1], snapshots=times))
    dz = res.config.grid.dx
    for t in times:
        s = res.at(t)
        front = measure_shock_front(s.z, s.w, dz)
        amp = float(shock_amplitude(p, t))
        jump = measure_jump(s.z, s.w, front, dz)
        behind = s.z <= p.c0 * t - 20 * dz
        exact = exact_profile(p, s.z[behind], t) if behind.any() else np.empty(0)
        err = np.abs(s.w[behind] - exact).max() if behind.any() else float("nan")
        print(f"t={t:5g}  front {(front - p.c0 * t) / dz:+6.2f} dz  "
              f"jump {100 * (jump / amp - 1):+6.1f}%  behind-front max err {err:.3e}")
        keep = s.z <= p.c0 * t + 0.25 * p.c0 * max(t, 1.0)
        svgplot.profile_svg(args.out / f"shock_t{t:g}.svg", s.z[keep], s.w[keep],
                            title=f"shock profile t = {t:g}", xlabel="z", ylabel="w",
                            vlines=[p.c0 * t], lines=[(s.z[behind], exact)] if behind.any() else [])


if __name__ == "__main__":
    main()
