"""Command line front end: ``numbl {assumptions,analyze,profile,simulate,converge}``.

Exit status is 0 on success, 1 on a numerical failure (failed assumption,
blow-up, root-finder trouble) and 2 on a usage or configuration error.
Output files go to ``--out``, else ``$BL_OUT_DIR``, else the current
directory.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .boundary_layer import ProfileError, build_corrector, build_profile, evaluate
from .initial import get_initial
from .scheme import SchemeSpec, scheme_from_mapping, scheme_names, tomllib
from .simulator import (
    AssumptionError,
    BlowUpError,
    Grid,
    approximate_solution,
    cell_averages,
    convergence_study,
    error_norms,
    n_steps,
    run,
)
from .symbol import SymbolError, check_assumptions

log = logging.getLogger("numbl")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scheme: str | None = None
    a: float | None = None
    cfl_lambda: float | None = None
    scheme_table: dict = field(default_factory=dict)
    cells: int = 216
    x_max: float = 1.0
    tfinal: float = 0.5
    snapshots: tuple[float, ...] = ()
    initial: str = "gaussian_bump"
    levels: tuple[int, ...] = tuple(2**m for m in range(5, 11))
    stopping: str | None = None
    horizon: int = 50
    samples: int = 1024
    tol: float = 1e-10
    force_unstable: bool = False
    out_dir: str | None = None

    def build_scheme(self) -> SchemeSpec:
        table = dict(self.scheme_table)
        if self.scheme is not None:
            if self.scheme in scheme_names():
                table = {"scheme": self.scheme}
            elif Path(self.scheme).is_file():
                table = _read_toml(self.scheme)
            else:
                raise ConfigError(
                    f"--scheme {self.scheme!r} is neither a builtin ({', '.join(scheme_names())}) nor a file"
                )
        if not table:
            raise ConfigError("no scheme given (use --scheme or a config file with scheme keys)")
        return scheme_from_mapping(table, self.a, self.cfl_lambda)

    def output_dir(self) -> Path:
        out = Path(self.out_dir or os.environ.get("BL_OUT_DIR") or ".")
        out.mkdir(parents=True, exist_ok=True)
        return out


_SCHEME_KEYS = {"scheme", "a", "lambda", "space_coeffs", "alpha", "beta", "name"}


def _read_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None


def _parse_levels(text: str) -> tuple[int, ...]:
    """``"5..10"`` -> ``(32, ..., 1024)``; ``"32,64,128"`` -> explicit cell counts."""
    try:
        if ".." in text:
            lo, hi = (int(v) for v in text.split(".."))
            return tuple(2**m for m in range(lo, hi + 1))
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --levels value {text!r}; use e.g. 5..10") from None


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad list of times {text!r}") from None


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        table = _read_toml(args.config)
        cfg.scheme_table = {k: v for k, v in table.items() if k in _SCHEME_KEYS}
        rest = {k: v for k, v in table.items() if k not in _SCHEME_KEYS}
        known = {f.name for f in fields(RunConfig)}
        for key, value in rest.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if key == "levels" and isinstance(value, str):
                value = _parse_levels(value)
            if key in ("levels", "snapshots"):
                value = tuple(value)
            setattr(cfg, key, value)
    for key in ("scheme", "a", "cfl_lambda", "cells", "x_max", "tfinal", "snapshots", "initial",
                "levels", "stopping", "horizon", "samples", "tol", "out_dir"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "force_unstable", False):
        cfg.force_unstable = True
    return cfg


# -- CSV ----------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# -- subcommands ------------------------------------------------------------------------


def cmd_assumptions(cfg: RunConfig) -> int:
    spec = cfg.build_scheme()
    report = check_assumptions(spec, cfg.tol, cfg.samples)
    print(f"scheme {spec.name}: a={spec.a_velocity:g} lambda={spec.cfl_lambda:g} "
          f"r={spec.r_left} p={spec.p_right} k={spec.k_levels}")
    for line in report.lines():
        print(line)
    print("ALL PASS" if report.all_pass else "SOME ASSUMPTIONS FAIL")
    return 0 if report.all_pass else 1


def cmd_analyze(cfg: RunConfig) -> int:
    spec = cfg.build_scheme()
    out = cfg.output_dir()
    report = check_assumptions(spec, cfg.tol, cfg.samples)
    an = report.analysis
    circle = an.circle
    write_csv(out / "circle_scan.csv", ["theta", "abs_A_sq", "re_A", "im_A"],
              zip(circle.theta, np.abs(circle.values) ** 2, circle.values.real, circle.values.imag))
    curve = an.cauchy.curve
    write_csv(out / "stability_curve.csv", ["eta", "re_minus_lambda_A", "im_minus_lambda_A"],
              zip(an.cauchy.eta, curve.real, curve.imag))
    roots = an.disk_roots or ()
    write_csv(out / "disk_roots.csv", ["re_z", "im_z", "multiplicity"],
              [(d.z.real, d.z.imag, d.multiplicity) for d in roots])

    lines = [f"scheme: {spec.name}", f"a: {spec.a_velocity:.17g}", f"lambda: {spec.cfl_lambda:.17g}",
             f"r: {spec.r_left}", f"p: {spec.p_right}", f"k: {spec.k_levels}"]
    lines += report.lines()
    lines.append("circle_roots: " + ", ".join(
        f"{r.theta:.12g}{'' if r.simple else ' (multiple)'}" for r in circle.roots))
    if circle.unresolved:
        lines.append("circle_scan: unresolved clustered roots")
    lines.append("disk_roots: " + ("n/a" if an.disk_roots is None else ", ".join(
        f"{d.z.real:.12g}{d.z.imag:+.12g}j (x{d.multiplicity})" for d in roots)))
    lines.append(f"disk_count_poly: {an.disk_count_poly}")
    lines.append(f"disk_count_contour: {an.disk_count_contour}")
    lines.append(f"lemma1_prediction: {an.lemma1_prediction}")
    lines += [f"note: {n}" for n in an.notes]
    text = "\n".join(lines) + "\n"
    (out / "analysis.txt").write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_profile(cfg: RunConfig) -> int:
    spec = cfg.build_scheme()
    profile = build_corrector(spec, build_profile(spec))
    j = np.arange(cfg.horizon + 1)
    w = evaluate(profile, "w", j)
    wt = evaluate(profile, "w_tilde", j)
    out = cfg.output_dir()
    write_csv(out / "profile.csv", ["j", "w", "w_tilde"], zip(j, w, wt))
    print(f"profile: decay rate {profile.decay_rate:.12g}, {cfg.horizon + 1} rows -> {out / 'profile.csv'}")
    return 0


def _profile_or_none(spec: SchemeSpec):
    try:
        return build_corrector(spec, build_profile(spec))
    except (ProfileError, SymbolError) as exc:
        log.warning("no boundary-layer profile (%s); u_app column set to nan", exc)
        return None


def cmd_simulate(cfg: RunConfig) -> int:
    spec = cfg.build_scheme()
    u0 = get_initial(cfg.initial)
    grid = Grid(cfg.cells, spec.cfl_lambda, cfg.x_max)
    stopping = cfg.stopping or "floor"
    times = tuple(cfg.snapshots) or (cfg.tfinal,)
    sol = run(spec, grid, u0, max(max(times), cfg.tfinal), times, stopping=stopping,
              force=cfg.force_unstable)
    profile = _profile_or_none(spec)
    out = cfg.output_dir()
    error_rows = []
    for t in times:
        n = n_steps(t, grid.dt, stopping)
        u = sol.snapshots[n]
        if profile is not None:
            u_int, bl0, bl1 = approximate_solution(spec, profile, u0, grid, n, parts=True)
            u_app = u_int + bl0 + grid.dx * bl1
        else:
            u_int = cell_averages(u0, spec.a_velocity, n * grid.dt, grid)
            u_app = np.full_like(u_int, np.nan)
        write_csv(out / f"solution_t{t:g}.csv", ["x", "u", "u_int", "u_app"],
                  zip(grid.x, u, u_int, u_app))
        error_rows.append((n * grid.dt, error_norms(u, u_int, grid.dx), error_norms(u, u_app, grid.dx)))
    write_csv(out / "errors.csv", ["t", "raw_l2", "corrected_l2"], error_rows)
    print(f"simulated N={grid.n_cells} to n={sol.time_index} (t={sol.time:.12g}); "
          f"sup_n ||u^n|| = {sol.semigroup_sup:.12g}, ||u^0|| = {sol.norms[0]:.12g}")
    for t, raw, cor in error_rows:
        print(f"t={t:.12g} raw_l2={raw:.6e} corrected_l2={cor:.6e}")
    return 0


def cmd_converge(cfg: RunConfig) -> int:
    spec = cfg.build_scheme()
    u0 = get_initial(cfg.initial)
    res = convergence_study(spec, u0, cfg.tfinal, cfg.levels, stopping=cfg.stopping or "ceil",
                            x_max=cfg.x_max, force=cfg.force_unstable)
    out = cfg.output_dir()
    write_csv(out / "convergence.csv", ["N", "dx", "raw", "corrected"],
              zip(res.n_cells, res.dx, res.raw, res.corrected))
    for n, raw, cor in zip(res.n_cells, res.raw, res.corrected):
        print(f"N={n:6d} raw={raw:.6e} corrected={cor:.6e}")
    print(f"slope raw={res.slope_raw:.4f} corrected={res.slope_corrected:.4f} "
          f"(trimmed: {res.slope_raw_trimmed:.4f} / {res.slope_corrected_trimmed:.4f})")
    if res.failed_at is not None:
        print(f"aborted at N={res.failed_at}: {res.message}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "assumptions": cmd_assumptions,
    "analyze": cmd_analyze,
    "profile": cmd_profile,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="numbl",
        description="Numerical boundary layers of multistep schemes for the transport equation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with scheme and run keys")
    common.add_argument("--scheme", help=f"builtin ({', '.join(scheme_names())}) or TOML scheme file")
    common.add_argument("--a", type=float, help="transport velocity a (nonzero)")
    common.add_argument("--lambda", dest="cfl_lambda", type=float, help="CFL parameter dt/dx")
    common.add_argument("--tol", type=float, help="consistency tolerance (default 1e-10)")
    common.add_argument("--samples", type=int, help="frequency samples for the symbol scans (default 1024)")
    common.add_argument("--out", dest="out_dir", help="output directory (default $BL_OUT_DIR or .)")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--initial", help="gaussian_bump (default), constant, linear, sine, or an 'x u' data file")
    sim.add_argument("--tfinal", type=float, help="final time T (default 0.5)")
    sim.add_argument("--xmax", dest="x_max", type=float, help="domain length (default 1)")
    sim.add_argument("--stopping", choices=("floor", "ceil"),
                     help="final level: largest n with n dt <= T (floor) or first n with n dt >= T (ceil)")
    sim.add_argument("--force-unstable", action="store_true",
                     help="run even if the scheme fails the assumptions")

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.add_parser("assumptions", parents=[common], help="check the four structural assumptions")
    sub.add_parser("analyze", parents=[common], help="symbol diagnostics and CSV data")
    p = sub.add_parser("profile", parents=[common], help="write the boundary-layer profile and corrector")
    p.add_argument("--horizon", type=int, help="last index j written (default 50)")
    p = sub.add_parser("simulate", parents=[common, sim], help="run the IBVP and write snapshots")
    p.add_argument("--cells", type=int, help="number of grid cells N (default 216)")
    p.add_argument("--snapshots", type=_parse_floats, help="comma separated output times")
    p = sub.add_parser("converge", parents=[common, sim], help="grid refinement study")
    p.add_argument("--levels", type=_parse_levels, help="M range 'lo..hi' meaning N = 2^M, or a list of N")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AssumptionError, BlowUpError, SymbolError, ProfileError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
