"""Command-line front end: run experiments, write CSV/SVG artifacts, diff results.

Every run writes ``manifest.txt`` in the flat ``key = value`` format that
``--config`` reads, so a manifest can be fed back to reproduce a run.
Derived quantities are written under ``derived.*`` keys, which the config
reader ignores.

Exit codes: 0 success, 2 bad configuration, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from singsurf import svgplot
from singsurf.analytic_shock import QuadratureError, exact_profile
from singsurf.fds_reference import DegenerateCoefficient, fds_solve
from singsurf.kss import BACKENDS, KrylovConvergenceError
from singsurf.lwe_solver import (LweBreakdown, LweConfig, SigmaSchedule, fit_front,
                                 lwe_default_schedule, solve_lwe)
from singsurf.shock_solver import (LIFT_SOURCES, NumericalBlowUp, RegularizationSchedule,
                                   ShockConfig, measure_jump, measure_shock_front, solve_shock)
from singsurf.surface import (IsothermalShockParams, LweParams, jump_report, lwe_critical,
                              lwe_front, lwe_front_inverse, lwe_jumps, lwe_times,
                              shock_amplitude, shock_front)

__all__ = ["RunConfig", "ConfigError", "parse_config_text", "run", "compare_files", "main"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
EXPERIMENTS = ("shock", "shock-analytic", "lwe", "lwe-fds", "analyze")
NUMERICAL_ERRORS = (NumericalBlowUp, LweBreakdown, QuadratureError, DegenerateCoefficient,
                    KrylovConvergenceError, FloatingPointError)


class ConfigError(ValueError):
    """A configuration value is missing, malformed or violates a constraint."""


# {{{ configuration

def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _opt_float(text):
    if text is None or str(text).strip().lower() in ("", "none", "auto"):
        return None
    return float(text)


@dataclass
class RunConfig:
    """Full description of one CLI run.

    ``schedule`` is ``default``, ``none``, ``constant:<p>`` (shock: both
    powers; Westervelt: ``U_TT`` only) or ``increasing:<w_ut>:<w_utt>``
    (Westervelt) / ``decreasing:<s_u>:<s_ut>`` (shock).
    """

    experiment: str = "analyze"
    # shock
    c0: float = 347.26
    gamma: float = 1.40
    g: float = 9.81
    mu_hat: float | None = None
    omega: float = 2.0 * math.pi
    W0: float = 1.0
    t_end: float | None = None
    lift_source: str = "frozen"
    # Westervelt
    epsilon: float = 0.35
    alpha: float | None = None
    # numerics
    n: int = 8192
    m: int = 4096
    cfl: float | None = None
    backend: str = "kss"
    schedule: str = "default"
    snapshots: tuple[float, ...] = ()
    analytic_points: int = 400
    out: str = "singsurf_out"
    seed: int = 0

    FLOAT_KEYS = ("c0", "gamma", "g", "omega", "W0", "epsilon")
    OPT_FLOAT_KEYS = ("mu_hat", "t_end", "alpha", "cfl")
    INT_KEYS = ("n", "m", "analytic_points", "seed")

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        kw = {}
        for key, raw in values.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                if key in cls.FLOAT_KEYS:
                    kw[key] = float(raw)
                elif key in cls.OPT_FLOAT_KEYS:
                    kw[key] = _opt_float(raw)
                elif key in cls.INT_KEYS:
                    kw[key] = int(raw)
                elif key == "snapshots":
                    kw[key] = _floats(raw)
                else:
                    kw[key] = str(raw).strip()
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
        return cls(**kw)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.lift_source not in LIFT_SOURCES:
            raise ConfigError(f"lift_source must be one of {LIFT_SOURCES}")
        if self.n < 8:
            raise ConfigError(f"n must be at least 8, got {self.n}")
        if self.m < 2:
            raise ConfigError(f"m must be at least 2, got {self.m}")
        if self.cfl is not None and not self.cfl > 0:
            raise ConfigError(f"cfl must be positive, got {self.cfl}")
        if self.t_end is not None and not self.t_end >= 0:
            raise ConfigError(f"t_end must be nonnegative, got {self.t_end}")
        if any(not t >= 0 for t in self.snapshots):
            raise ConfigError("snapshot times must be nonnegative")
        try:
            if self.experiment.startswith("shock"):
                self.shock_params()
            elif self.experiment.startswith("lwe"):
                self.lwe_params()
            else:
                self.shock_params()
                LweParams(self.gamma, self.epsilon, self.alpha)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def shock_params(self) -> IsothermalShockParams:
        return IsothermalShockParams(self.c0, self.gamma, self.g, self.mu_hat, self.omega, self.W0)

    def lwe_params(self) -> LweParams:
        p = LweParams(self.gamma, self.epsilon, self.alpha)
        return p if self.alpha is not None else p.with_bullet_alpha()

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(float(t)) for t in v)
            elif isinstance(v, float):
                v = repr(v)
            elif v is None:
                v = "none"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment, ``derived.*`` keys are skipped."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key.startswith("derived."):
            continue
        values[key.replace("-", "_")] = val
    return values

# }}}


# {{{ artifacts

def _write_csv(path: Path, header, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([f"{float(v):.17g}" for v in row])


def _read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty file")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    return rows[0], data.reshape(-1, len(rows[0]))


def _tag(t: float) -> str:
    return f"{t:.6g}".replace(".", "p")


def _manifest(path: Path, cfg: RunConfig, derived: dict) -> None:
    text = cfg.to_text()
    for k, v in derived.items():
        text += f"derived.{k} = {v!r}\n" if isinstance(v, float) else f"derived.{k} = {v}\n"
    path.write_text(text)

# }}}


# {{{ experiments

def _shock_schedule(spec: str, t_end: float):
    kind, *args = spec.split(":")
    if kind == "default":
        return None
    if kind == "none":
        return RegularizationSchedule.none()
    if kind == "constant" and len(args) == 1:
        return RegularizationSchedule.constant(float(args[0]), t_end)
    if kind == "decreasing" and len(args) == 2:
        return RegularizationSchedule.decreasing(t_end, float(args[0]), float(args[1]))
    raise ConfigError(f"bad shock schedule {spec!r}")


def _lwe_schedule(spec: str, t_end: float, n: int):
    kind, *args = spec.split(":")
    if kind == "default":
        return None
    if kind == "none":
        return SigmaSchedule.none()
    if kind == "constant" and len(args) == 1:
        return SigmaSchedule.utt_only(float(args[0]))
    if kind == "increasing" and len(args) == 2:
        return SigmaSchedule.increasing(t_end, float(args[0]), float(args[1]))
    raise ConfigError(f"bad Westervelt schedule {spec!r}")


def _run_shock(cfg: RunConfig, out: Path) -> dict:
    p = cfg.shock_params()
    t_end = cfg.t_end if cfg.t_end is not None else 11.0
    snaps = cfg.snapshots or tuple(t for t in (0.5, 5.0, 10.0) if t <= t_end)
    kw = dict(params=p, n=cfg.n, t_end=t_end, backend=cfg.backend, snapshots=snaps,
              schedule=_shock_schedule(cfg.schedule, t_end), lift_source=cfg.lift_source)
    if cfg.cfl is not None:
        kw["cfl"] = cfg.cfl
    res = solve_shock(ShockConfig(**kw))
    dz = res.config.grid.dx
    rows = []
    for s in res.snapshots:
        tag = _tag(s.t)
        _write_csv(out / f"shock_t{tag}.csv", ("z", "w"), (s.z, s.w))
        front_th = float(shock_front(p, s.t))
        amp = float(shock_amplitude(p, s.t))
        front = measure_shock_front(s.z, s.w, dz) if s.t > 0 else 0.0
        jump = measure_jump(s.z, s.w, front, dz) if s.t > 0 else 0.0
        rows.append((s.t, front, jump, front_th, amp))
        svgplot.profile_svg(out / f"shock_t{tag}.svg", s.z, s.w,
                            title=f"shock, t = {s.t:g}", xlabel="z", ylabel="w",
                            vlines=[front_th], hlines=[amp, -amp])
    _write_csv(out / "shock_fronts.csv",
               ("t", "measured_front", "measured_jump", "theory_front", "theory_jump"),
               list(zip(*rows)) if rows else [[]] * 5)
    return {"mu_c": p.mu_c, "H": p.H, "mu_hat": p.mu_hat, "steps": res.steps,
            "dt": res.config.time_step}


def _run_shock_analytic(cfg: RunConfig, out: Path) -> dict:
    p = cfg.shock_params()
    snaps = cfg.snapshots or (0.5, 5.0, 10.0)
    for t in snaps:
        zmax = max(shock_front(p, t) * 1.25, p.c0)
        z = np.linspace(0.0, zmax, cfg.analytic_points)
        w = exact_profile(p, z, t)
        tag = _tag(t)
        _write_csv(out / f"shock_analytic_t{tag}.csv", ("z", "w"), (z, w))
        amp = float(shock_amplitude(p, t))
        svgplot.profile_svg(out / f"shock_analytic_t{tag}.svg", z, w,
                            title=f"exact shock solution, t = {t:g}", xlabel="z", ylabel="w",
                            vlines=[float(shock_front(p, t))], hlines=[amp, -amp])
    return {"mu_c": p.mu_c, "H": p.H, "mu_hat": p.mu_hat}


def _lwe_derived(p: LweParams) -> dict:
    tm = lwe_times(p)
    d = {"alpha": p.alpha, "beta_hat": p.beta_hat, "epsilon_bullet": p.epsilon_bullet,
         "T1": tm.t1, "T_f": tm.t_f, "alpha_crt": tm.alpha_crt}
    d["T_infty"] = tm.t_infty if tm.t_infty is not None else "none"
    try:
        d["alpha_bullet"] = lwe_critical(p).alpha_bullet
    except ValueError:
        d["alpha_bullet"] = "none"
    return d


def _lwe_outputs(out: Path, prefix: str, p: LweParams, snaps, dx: float) -> None:
    rows = []
    for T, X, P in snaps:
        tag = _tag(T)
        _write_csv(out / f"{prefix}_T{tag}.csv", ("X", "P"), (X, P))
        th_front = float(lwe_front(p, T)[0])
        th_slope = lwe_jumps(p, T).jump_px if T > 0 else 0.0
        try:
            front, slope = fit_front(X, P, dx)
        except ValueError:
            front, slope = math.nan, math.nan
        rows.append((T, front, slope, th_front, th_slope))
        xs = np.array([max(th_front - 0.15, 0.0), th_front])
        svgplot.profile_svg(out / f"{prefix}_T{tag}.svg", X, P,
                            title=f"{prefix}, T = {T:g}", xlabel="X", ylabel="P",
                            vlines=[th_front], lines=[(xs, th_slope * (xs - th_front))])
    _write_csv(out / f"{prefix}_fronts.csv",
               ("T", "measured_front", "measured_slope", "theory_front", "theory_slope"),
               list(zip(*rows)) if rows else [[]] * 5)


def _run_lwe(cfg: RunConfig, out: Path) -> dict:
    p = cfg.lwe_params()
    d = _lwe_derived(p)
    t_end = cfg.t_end if cfg.t_end is not None else lwe_front_inverse(p, 0.95)
    snaps = cfg.snapshots or tuple(T for T in (0.3, 0.6) if T <= t_end)
    kw = dict(params=p, n=cfg.n, t_end=t_end, backend=cfg.backend, snapshots=snaps,
              schedule=_lwe_schedule(cfg.schedule, lwe_front_inverse(p, 0.95), cfg.n))
    if cfg.cfl is not None:
        kw["cfl"] = cfg.cfl
    lcfg = LweConfig(**kw)
    try:
        res = solve_lwe(lcfg)
    except LweBreakdown as exc:
        _lwe_outputs(out, "lwe", p, [(s.T, s.X, s.P) for s in exc.partial.snapshots],
                     lcfg.grid.dx)
        raise
    _lwe_outputs(out, "lwe", p, [(s.T, s.X, s.P) for s in res.snapshots], lcfg.grid.dx)
    d.update(steps=res.steps, dT=lcfg.time_step, schedule=lcfg.schedule.label,
             truncated_at=res.truncated_at if res.truncated_at is not None else "none")
    return d


def _run_lwe_fds(cfg: RunConfig, out: Path) -> dict:
    p = cfg.lwe_params()
    d = _lwe_derived(p)
    t_f = min(d["T_f"], 1.0) if cfg.t_end is None else cfg.t_end
    snaps = cfg.snapshots or (0.3, 0.6)
    res = fds_solve(p, cfg.m, t_f, snaps)
    _lwe_outputs(out, "fds", p, [(s.T_requested, s.X, s.P) for s in res.snapshots],
                 res.grid.dX)
    d.update(dX=res.grid.dX, dT=res.grid.dT, fds_cfl=res.grid.cfl, fds_T_f=t_f,
             offsets=",".join(f"{s.offset:.3g}" for s in res.snapshots))
    return d


def _run_analyze(cfg: RunConfig, out: Path) -> dict:
    sp = cfg.shock_params()
    d = {"mu_c": sp.mu_c, "H": sp.H, "mu_hat": sp.mu_hat}
    p = cfg.lwe_params()
    d.update(_lwe_derived(p))
    t_f = lwe_times(p).t_f
    rep = jump_report(p, np.linspace(0.0, 0.999 * t_f, 201))
    rep.to_csv(out / "jump_report.csv")
    return d


RUNNERS = {"shock": _run_shock, "shock-analytic": _run_shock_analytic, "lwe": _run_lwe,
           "lwe-fds": _run_lwe_fds, "analyze": _run_analyze}


def run(cfg: RunConfig) -> int:
    """Validate, dispatch and write artifacts; return the exit status."""
    try:
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(os.environ.get("SINGSURF_OUT") or cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    derived: dict = {}
    status = EXIT_OK
    try:
        derived = RUNNERS[cfg.experiment](cfg, out)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        derived = {"failure": str(exc).replace("\n", " ")}
        status = EXIT_NUMERIC
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        _manifest(out / "manifest.txt", cfg, derived)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return status

# }}}


# {{{ compare

def compare_files(file_a, file_b, xmin: float = -math.inf, xmax: float = math.inf) -> dict:
    """Max and mean absolute difference of the second columns over ``[xmin, xmax]``.

    ``file_b`` is linearly interpolated onto the abscissae of ``file_a``.
    """
    ha, a = _read_csv(file_a)
    hb, b = _read_csv(file_b)
    if ha != hb or len(ha) != 2:
        raise ConfigError(f"incompatible columns {ha} and {hb}")
    mask = (a[:, 0] >= xmin) & (a[:, 0] <= xmax)
    if not mask.any():
        raise ConfigError(f"region [{xmin}, {xmax}] contains no samples")
    x = a[mask, 0]
    if b.shape == a.shape and np.array_equal(a[:, 0], b[:, 0]):
        yb = b[mask, 1]
    else:
        yb = np.interp(x, b[:, 0], b[:, 1])
    diff = np.abs(a[mask, 1] - yb)
    return {"max_abs": float(diff.max()), "mean_abs": float(diff.mean()),
            "n": int(mask.sum()), "xmin": float(x[0]), "xmax": float(x[-1])}


def _compare_main(args) -> int:
    try:
        rec = compare_files(args.file_a, args.file_b, args.xmin, args.xmax)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(" ".join(f"{k}={v:.17g}" if isinstance(v, float) else f"{k}={v}"
                   for k, v in rec.items()))
    return EXIT_OK

# }}}


# {{{ argument parsing

def _add_common(sp, experiment: str):
    sp.add_argument("--config", help="flat key = value file; flags override it")
    sp.add_argument("--out", help="output directory (SINGSURF_OUT wins)")
    sp.add_argument("--snapshots", help="comma-separated output times")
    sp.add_argument("--t-end", dest="t_end")
    sp.add_argument("--gamma")
    if experiment.startswith("shock") or experiment == "analyze":
        for name in ("c0", "g", "omega", "W0"):
            sp.add_argument(f"--{name}")
        sp.add_argument("--mu-hat", dest="mu_hat")
    if experiment.startswith("lwe") or experiment == "analyze":
        sp.add_argument("--epsilon")
        sp.add_argument("--alpha", help="a number or 'auto' for the critical value")
    if experiment in ("shock", "lwe"):
        sp.add_argument("--n")
        sp.add_argument("--cfl")
        sp.add_argument("--backend", choices=BACKENDS)
        sp.add_argument("--schedule")
    if experiment == "shock":
        sp.add_argument("--lift-source", dest="lift_source", choices=LIFT_SOURCES)
    if experiment == "shock-analytic":
        sp.add_argument("--points", dest="analytic_points")
    if experiment == "lwe-fds":
        sp.add_argument("--m")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="singsurf", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for exp in EXPERIMENTS:
        _add_common(sub.add_parser(exp), exp)
    cp = sub.add_parser("compare", help="difference report of two profile CSVs")
    cp.add_argument("file_a")
    cp.add_argument("file_b")
    cp.add_argument("--xmin", type=float, default=-math.inf)
    cp.add_argument("--xmax", type=float, default=math.inf)
    return ap


def config_from_args(args) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(parse_config_text(Path(args.config).read_text()))
    values["experiment"] = args.command
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        values[key] = val
    return RunConfig.from_mapping(values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "compare":
        return _compare_main(args)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

# }}}
