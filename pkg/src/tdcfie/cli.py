"""Command-line front end; every subcommand writes CSV.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from .errors import ConfigError, HistoryError, NumericalFailure, TdcfieError
from .laplace import Rectangle, find_roots
from .mode import BoundarySignal, ModeParams, eval_signal
from .oracles import residual_norm, series_solution_beta1
from .solver import SolverConfig, solve_mode
from .stationary import ConvexSurface, cancellation_ratio, cancellation_residual, critical_points

log = logging.getLogger("tdcfie")

# name -> (alpha, beta, signal, dt)
PRESETS = {
    "fig-a0b0-osc": (0.0, 0.0, "osc", "97/12800"),
    "fig-a0b0-nonosc": (0.0, 0.0, "nonosc", "97/6400"),
    "fig-a1b0-osc": (1.0, 0.0, "osc", "97/12800"),
    "fig-a1b0-nonosc": (1.0, 0.0, "nonosc", "97/6400"),
    "fig-a1bh-osc": (1.0, 0.5, "osc", "97/12800"),
    "fig-a1bh-nonosc": (1.0, 0.5, "nonosc", "97/6400"),
}
PRESET_T_END = 10.0

DEFAULTS = {
    "n": 0,
    "alpha": 1.0,
    "beta": 0.5,
    "dt": "97/6400",
    "order": 6,
    "t_end": 10.0,
    "signal": "nonosc",
    "residual": False,
    "levels": 4,
    "re_min": -4.0,
    "re_max": 1.0,
    "im_min": -30.0,
    "im_max": 30.0,
    "surface": "spheroid",
    "axes": "1,1.5",
    "x": None,
    "k": "25,50,100",
    "a": 1.0,
    "ppw": 20.0,
    "jobs": 1,
}


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def write_csv(out, header, rows) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    cfg = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS and key != "preset":
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
        cfg[key] = value
    return cfg


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, preset, config file and explicit flags (later wins)."""
    file_cfg = read_config_file(args.config) if args.config else {}
    cfg = dict(DEFAULTS)
    preset = args.preset if args.preset is not None else file_cfg.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; see 'tdcfie presets'")
        alpha, beta, signal, dt = PRESETS[preset]
        cfg.update(alpha=alpha, beta=beta, signal=signal, dt=dt, t_end=PRESET_T_END, n=0, order=6)
    cfg.update({k: v for k, v in file_cfg.items() if k != "preset"})
    cfg.update({k: v for k, v in vars(args).items() if k in DEFAULTS and v is not None})
    return cfg


def _num(cfg, key, kind=float):
    try:
        return kind(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for {key}: {cfg[key]!r}") from exc


def _dt(value) -> Fraction:
    try:
        dt = Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"invalid time step {value!r}") from exc
    if dt <= 0:
        raise ConfigError("time step must be positive")
    return dt


def _signal(name: str) -> BoundarySignal:
    if name == "osc":
        return BoundarySignal.oscillatory()
    if name == "nonosc":
        return BoundarySignal.non_oscillatory()
    if name in ("none", "zero"):
        return BoundarySignal.zero()
    raise ConfigError(f"unknown signal {name!r}")


def _mode(cfg) -> ModeParams:
    return ModeParams(_num(cfg, "n", int), _num(cfg, "alpha"), _num(cfg, "beta"))


def _solver_cfg(cfg, dt=None) -> SolverConfig:
    return SolverConfig(dt=dt if dt is not None else _dt(cfg["dt"]), t_end=_num(cfg, "t_end"), order=_num(cfg, "order", int))


def _flag(v) -> bool:
    return v if isinstance(v, bool) else str(v).lower() in ("1", "true", "yes", "on")


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(cfg: dict, out) -> None:
    p = _mode(cfg)
    sig = _signal(cfg["signal"])
    h = solve_mode(p, sig, _solver_cfg(cfg))
    t = h.times
    g = eval_signal(sig, t)
    header = ["t", "mu", "g"]
    cols = [t, h.values, g]
    if _flag(cfg["residual"]):
        from .mode import apply_operator

        res = np.full(len(t), np.nan)
        live = t >= 2.0 - 1e-12
        if np.any(live):
            res[live] = apply_operator(p, h, t[live], subpanels=4) - g[live]
        header.append("residual")
        cols.append(res)
    write_csv(out, header, zip(*cols))


def _ladder(cfg) -> list[Fraction]:
    levels = _num(cfg, "levels", int)
    if levels < 3:
        raise ConfigError("convergence study needs at least 3 dt levels")
    base = _dt(cfg["dt"])
    return [base / 2**j for j in range(levels)]


def convergence_table(p: ModeParams, sig: BoundarySignal, dts, t_end: float, order: int, jobs: int = 1):
    """Rows ``(dt, error, observed_order)``.

    Errors are measured against the series solution when it applies
    (mode 0, beta = 1, 0 < alpha <= 1).  Otherwise the error of level ``j``
    is its distance to level ``j + 1``, so the finest level has no row;
    differences of consecutive levels give an unbiased observed order,
    which a fixed finest-grid reference would not.
    """
    runs = lambda dt: solve_mode(p, sig, SolverConfig(dt=dt, t_end=t_end, order=order))  # noqa: E731
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        sols = list(pool.map(runs, dts))
    exact = p.n == 0 and p.beta == 1.0 and 0.0 < p.alpha <= 1.0
    rows = []
    if exact:
        errs = [float(np.max(np.abs(h.values - series_solution_beta1(p.alpha, sig, h.times)))) for h in sols]
        used = dts
    else:
        errs = []
        for h, finer in zip(sols, sols[1:]):
            stride = round(h.dt / finer.dt)
            m = min(len(h), (len(finer) - 1) // stride + 1)
            errs.append(float(np.max(np.abs(h.values[:m] - finer.values[: stride * (m - 1) + 1 : stride]))))
        used = dts[:-1]
    for j, (dt, e) in enumerate(zip(used, errs)):
        rate = math.log2(errs[j - 1] / e) if j > 0 and e > 0 and errs[j - 1] > 0 else float("nan")
        rows.append((float(dt), e, rate))
    return rows


def cmd_convergence(cfg: dict, out) -> None:
    p = _mode(cfg)
    rows = convergence_table(
        p, _signal(cfg["signal"]), _ladder(cfg), _num(cfg, "t_end"), _num(cfg, "order", int), _num(cfg, "jobs", int)
    )
    write_csv(out, ["dt", "error", "observed_order"], rows)


def cmd_roots(cfg: dict, out) -> None:
    p = _mode(cfg)
    rect = Rectangle(_num(cfg, "re_min"), _num(cfg, "re_max"), _num(cfg, "im_min"), _num(cfg, "im_max"))
    roots = find_roots(p, rect)
    rate = -max(r.location.real for r in roots) if roots else math.inf
    header = ["re", "im", "residual", "multiplicity", "newton_iterations", "predicted_decay_rate"]
    if not roots:
        write_csv(out, header, [("", "", "", "", "", rate)])
        return
    rows = [(r.location.real, r.location.imag, r.residual, r.multiplicity, r.newton_iterations, rate) for r in roots]
    write_csv(out, header, rows)


def _surface(cfg) -> ConvexSurface:
    try:
        axes = [float(v) for v in str(cfg["axes"]).split(",")]
    except ValueError as exc:
        raise ConfigError(f"invalid semi-axes {cfg['axes']!r}") from exc
    if cfg["surface"] == "sphere":
        return ConvexSurface.sphere(axes[0] if len(axes) == 1 else 1.0)
    if cfg["surface"] == "spheroid" and len(axes) == 2:
        return ConvexSurface.spheroid(*axes)
    raise ConfigError("surface must be 'sphere' or 'spheroid' with axes 'a,c'")


def cmd_asymptotics(cfg: dict, out) -> None:
    S = _surface(cfg)
    if cfg["x"] is None:
        x = np.array([0.0, 0.0, S.c])
    else:
        try:
            x = np.array([float(v) for v in str(cfg["x"]).split(",")])
        except ValueError as exc:
            raise ConfigError(f"invalid point {cfg['x']!r}") from exc
    try:
        ks = [float(v) for v in str(cfg["k"]).split(",")]
    except ValueError as exc:
        raise ConfigError(f"invalid k list {cfg['k']!r}") from exc
    a = _num(cfg, "a")
    ppw = _num(cfg, "ppw")
    cps = critical_points(S, x)

    def row(k):
        r = cancellation_residual(S, x, k, a, ppw, cps)
        ratio = cancellation_ratio(S, x, k, a, cps)
        d, g, s = r["direct"], r["diag"], r["stationary"]
        return (k, d.real, d.imag, g.real, g.imag, s.real, s.imag, ratio, r["residual"])

    with ThreadPoolExecutor(max_workers=max(1, _num(cfg, "jobs", int))) as pool:
        rows = list(pool.map(row, ks))
    header = ["k", "direct_re", "direct_im", "diag_re", "diag_im", "stationary_re", "stationary_im",
              "cancellation_ratio", "residual"]
    write_csv(out, header, rows)


def cmd_presets(cfg: dict, out) -> None:
    rows = [(name, 0, a, b, sig, dt, PRESET_T_END) for name, (a, b, sig, dt) in PRESETS.items()]
    write_csv(out, ["name", "n", "alpha", "beta", "signal", "dt", "t_end"], rows)


COMMANDS = {
    "solve": cmd_solve,
    "convergence": cmd_convergence,
    "roots": cmd_roots,
    "asymptotics": cmd_asymptotics,
    "presets": cmd_presets,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--preset", help="named experiment (see 'presets')")
    common.add_argument("--out", help="output CSV path (default stdout)")
    common.add_argument("--n", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--dt", help="time step, e.g. 97/6400")
    common.add_argument("--order", type=int, choices=(2, 4, 6))
    common.add_argument("--t-end", dest="t_end", type=float)
    common.add_argument("--signal", choices=("osc", "nonosc", "none"))
    common.add_argument("--jobs", type=int)

    parser = argparse.ArgumentParser(prog="tdcfie", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common], help="march one mode equation")
    s.add_argument("--residual", action="store_const", const=True, help="add an operator residual column")
    c = sub.add_parser("convergence", parents=[common], help="errors and observed orders over dt halvings")
    c.add_argument("--levels", type=int)
    r = sub.add_parser("roots", parents=[common], help="zeros of the Laplace symbol")
    for name in ("re-min", "re-max", "im-min", "im-max"):
        r.add_argument("--" + name, dest=name.replace("-", "_"), type=float)
    a = sub.add_parser("asymptotics", parents=[common], help="layer potentials vs. their high-frequency asymptotics")
    a.add_argument("--surface", choices=("sphere", "spheroid"))
    a.add_argument("--axes", help="semi-axes 'a,c' (spheroid) or radius (sphere)")
    a.add_argument("--x", help="point on the surface 'x,y,z' (default: north pole)")
    a.add_argument("--k", help="comma-separated wavenumbers")
    a.add_argument("--a", type=float, help="combined-field coefficient a")
    a.add_argument("--ppw", type=float, help="quadrature points per wavelength")
    sub.add_parser("presets", parents=[common], help="list named experiments")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = resolve(args)
        buf = io.StringIO()
        COMMANDS[args.command](cfg, buf)
    except (ConfigError, HistoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except TdcfieError as exc:  # pragma: no cover - every subclass is handled above
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
