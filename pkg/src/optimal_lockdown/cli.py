"""Command-line front end: ``simulate``, ``optimize`` and ``sweep``.

Scenario files are TOML.  A file may name a ``preset`` and override any
field, e.g.::

    preset = "india"
    cost.c1 = 60000

Exit codes: 0 success, 2 usage, 3 parse, 4 validation, 5 I/O,
6 non-convergence (results are still written), 7 simulation failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .dynamics import DegenerateStateError
from .harness import SweepSpec, default_c1_grid, run_sweep
from .integrator import ControlPolicy, Trajectory, simulate, time_grid
from .model import (
    CostParams,
    EconomicParams,
    EpidemicParams,
    InvalidScenarioError,
    ScenarioParams,
    SystemState,
    preset,
    validate,
)
from .objective import evaluate
from .optimizer import LineSearch, OptimizerOptions, optimize

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_IO = 5
EXIT_NOT_CONVERGED = 6
EXIT_SIMULATION = 7

TRAJECTORY_COLUMNS = ["t", "S", "I", "R", "D", "N", "G", "l"]
POLICY_COLUMNS = ["t", "l"]
SWEEP_COLUMNS = [
    "c1", "J_opt", "J_unc", "deaths_opt", "deaths_unc", "infected_opt", "infected_unc",
    "G_opt", "G_unc", "mean_lockdown", "converged", "iterations",
]

log = logging.getLogger("optimal_lockdown")


class ScenarioParseError(ValueError):
    pass


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def fmt(x) -> str:
    """Shortest round-trip decimal for floats."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


# -- scenario files ---------------------------------------------------------

_SECTIONS = {
    "epidemic": EpidemicParams,
    "economic": EconomicParams,
    "cost": CostParams,
}
_TOP_LEVEL = {"preset", "name", "horizon", "dt", "initial_state", *_SECTIONS}


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def scenario_from_mapping(doc: dict) -> ScenarioParams:
    """Build scenario parameters from a parsed document (preset first, then overrides)."""
    unknown = set(doc) - _TOP_LEVEL
    if unknown:
        raise ScenarioParseError(f"unknown key(s): {', '.join(sorted(unknown))}")

    base = None
    if "preset" in doc:
        if not isinstance(doc["preset"], str):
            raise ScenarioParseError("preset: expected a string")
        base = preset(doc["preset"])

    parts = {}
    for section, cls in _SECTIONS.items():
        given = doc.get(section, {})
        if not isinstance(given, dict):
            raise ScenarioParseError(f"{section}: expected a table")
        names = [f.name for f in fields(cls)]
        extra = set(given) - set(names)
        if extra:
            raise ScenarioParseError(f"{section}: unknown field(s) {', '.join(sorted(extra))}")
        values = {k: _number(v, f"{section}.{k}") for k, v in given.items()}
        if base is not None:
            parts[section] = replace(getattr(base, section), **values)
        else:
            missing = [n for n in names if n not in values]
            if missing:
                raise ScenarioParseError(
                    f"{section}: missing field(s) {', '.join(missing)} (or name a preset)"
                )
            parts[section] = cls(**values)

    init = doc.get("initial_state", {})
    if not isinstance(init, dict):
        raise ScenarioParseError("initial_state: expected a table")
    extra = set(init) - set(SystemState._fields)
    if extra:
        raise ScenarioParseError(f"initial_state: unknown field(s) {', '.join(sorted(extra))}")
    init_values = {k: _number(v, f"initial_state.{k}") for k, v in init.items()}
    # a G0 override carries over to the starting economy unless G is given too
    if "G" not in init_values and "G0" in doc.get("economic", {}):
        init_values["G"] = parts["economic"].G0
    if base is not None:
        initial = base.initial_state._replace(**init_values)
    else:
        missing = [n for n in SystemState._fields if n not in init_values and n != "G"]
        if missing:
            raise ScenarioParseError(f"initial_state: missing field(s) {', '.join(missing)}")
        init_values.setdefault("G", parts["economic"].G0)
        initial = SystemState(**init_values)

    kwargs = dict(parts, initial_state=initial)
    for key in ("horizon", "dt"):
        if key in doc:
            kwargs[key] = _number(doc[key], key)
        elif base is None:
            raise ScenarioParseError(f"{key}: required when no preset is named")
    if "name" in doc:
        kwargs["name"] = str(doc["name"])
    if base is not None:
        return replace(base, **kwargs)
    return ScenarioParams(**kwargs)


def load_scenario(path) -> ScenarioParams:
    """Read a TOML scenario file, apply it over its preset and validate it.

    Raises ``OSError`` if unreadable, :class:`ScenarioParseError` for
    syntax or schema problems (including unknown presets) and
    :class:`InvalidScenarioError` listing every violated bound.
    """
    text = Path(path).read_text()
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc
    try:
        params = scenario_from_mapping(doc)
    except KeyError as exc:
        raise ScenarioParseError(f"{path}: {exc.args[0]}") from exc
    except ScenarioParseError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc
    violations = validate(params)
    if violations:
        raise InvalidScenarioError(violations)
    return params


# -- CSV ----------------------------------------------------------------------

def _open_out(path: Path):
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def write_trajectory(traj: Trajectory, path: Path) -> None:
    N = traj.column("N")
    with _open_out(path) as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for j, t in enumerate(traj.times):
            S, I, R, D, G = traj.states[j]
            l = fmt(traj.controls.values[j]) if j < len(traj.controls) else ""
            w.writerow([fmt(t), fmt(S), fmt(I), fmt(R), fmt(D), fmt(N[j]), fmt(G), l])


def write_policy(policy: ControlPolicy, params: ScenarioParams, path: Path) -> None:
    t = time_grid(params)
    with _open_out(path) as fh:
        w = csv.writer(fh)
        w.writerow(POLICY_COLUMNS)
        for j, v in enumerate(policy.values):
            w.writerow([fmt(t[j]), fmt(v)])


def read_policy_values(path) -> np.ndarray:
    """Per-step values from a CSV with an ``l`` column, or a bare single column."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ScenarioParseError(f"{path}: empty policy file")
    header = [c.strip() for c in rows[0]]
    col = 0
    if "l" in header:
        col = header.index("l")
        rows = rows[1:]
    else:
        try:
            float(header[0])
        except ValueError:
            raise ScenarioParseError(f"{path}: no 'l' column in header {header}") from None
    try:
        return np.array([float(r[col]) for r in rows if r[col].strip() != ""])
    except (ValueError, IndexError) as exc:
        raise ScenarioParseError(f"{path}: bad policy value ({exc})") from exc


def policy_from_spec(spec: str, params: ScenarioParams) -> ControlPolicy:
    if spec.startswith("constant:"):
        try:
            level = float(spec.split(":", 1)[1])
        except ValueError:
            raise CliError(f"bad policy spec {spec!r}", EXIT_USAGE) from None
        values = np.full(params.n_steps, level)
    else:
        try:
            values = read_policy_values(spec)
        except OSError as exc:
            raise CliError(f"cannot read policy {spec}: {exc}", EXIT_IO) from exc
        if values.size != params.n_steps:
            raise CliError(
                f"policy has {values.size} values but the scenario needs {params.n_steps}", EXIT_VALIDATION
            )
    try:
        return ControlPolicy.for_scenario(values, params)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc


# -- commands ---------------------------------------------------------------

def _scenario(args) -> ScenarioParams:
    if args.scenario:
        params = load_scenario(args.scenario)
    else:
        params = preset(args.preset)
    if args.dt is not None:
        params = replace(params, dt=args.dt)
    if args.c1 is not None or args.c2 is not None:
        params = params.with_cost(c1=args.c1, c2=args.c2)
    violations = validate(params)
    if violations:
        raise InvalidScenarioError(violations)
    return params


def _optimizer_options(args) -> OptimizerOptions:
    kw = {}
    if args.max_iters is not None:
        kw["max_iterations"] = args.max_iters
    if args.tol is not None:
        kw["tol_rel"] = args.tol
    if args.fd_step is not None:
        kw["fd_step"] = args.fd_step
    if args.starts is not None:
        kw["starts"] = args.starts
    return OptimizerOptions(line_search=LineSearch(), **kw)


def _print_summary(final: SystemState, cost) -> None:
    rows = [
        ("S", final.S), ("I", final.I), ("R", final.R), ("D", final.D),
        ("N", final.S + final.I + final.R), ("G", final.G),
        ("death_cost", cost.death_cost), ("infection_cost", cost.infection_cost),
        ("economy_value", cost.economy_value), ("J", cost.total),
    ]
    for key, value in rows:
        print(f"{key}={fmt(value)}")


def cmd_simulate(args) -> int:
    params = _scenario(args)
    policy = policy_from_spec(args.policy, params)
    traj = simulate(policy, params)
    write_trajectory(traj, Path(args.out))
    _print_summary(traj.final, evaluate(traj, params.cost))
    return EXIT_OK


def cmd_optimize(args) -> int:
    params = _scenario(args)
    opts = _optimizer_options(args)
    result = optimize(params, opts)
    write_policy(result.policy, params, Path(args.out))
    traj = simulate(result.policy, params)
    _print_summary(traj.final, result.cost)
    base = evaluate(simulate(ControlPolicy.constant(0.0, params), params), params.cost)
    print(f"J_uncontrolled={fmt(base.total)}")
    print(f"mean_lockdown={fmt(result.policy.mean())}")
    print(f"start_used={fmt(result.start_used)}")
    print(f"iterations={','.join(map(str, result.iterations))}")
    print(f"converged={fmt(result.converged)}")
    print(f"gradient_norm={fmt(result.gradient_norm)}")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def parse_c1_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("expected lo:hi:n")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1 or lo <= 0 or hi <= 0:
        raise ValueError("need lo > 0, hi > 0 and n >= 1")
    if n == 1:
        if lo != hi:
            raise ValueError("a single-point grid needs lo == hi")
        return [lo]
    return [float(v) for v in np.geomspace(lo, hi, n)]


def _profile_dir(out: Path) -> Path:
    return out.with_name(out.stem + "_profiles")


def cmd_sweep(args) -> int:
    params = _scenario(args)
    opts = _optimizer_options(args)
    grid = args.c1_grid if args.c1_grid is not None else default_c1_grid(params.cost.c1)
    records = run_sweep(SweepSpec(params, tuple(grid), opts), workers=args.workers)
    out = Path(args.out)
    with _open_out(out) as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in records:
            opt = r.optimal
            w.writerow([
                fmt(r.c1),
                fmt(opt.cost.total if opt else math.nan), fmt(r.uncontrolled.total),
                fmt(r.deaths_opt), fmt(r.deaths_unc),
                fmt(r.infected_opt), fmt(r.infected_unc),
                fmt(r.economy_opt), fmt(r.economy_unc),
                fmt(r.mean_lockdown),
                fmt(r.converged),
                ",".join(map(str, opt.iterations)) if opt else "",
            ])
    profiles = _profile_dir(out)
    try:
        profiles.mkdir(exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {profiles}: {exc}", EXIT_IO) from exc
    for i, r in enumerate(records):
        if r.optimal is not None:
            write_policy(r.optimal.policy, params, profiles / f"policy_{i:02d}_c1={fmt(r.c1)}.csv")

    for r in records:
        status = r.error or ("converged" if r.converged else "NOT converged")
        print(f"c1={fmt(r.c1)} mean_lockdown={r.mean_lockdown:.4f} {status}")
    if any(r.failed for r in records):
        return EXIT_SIMULATION
    return EXIT_OK if all(r.converged for r in records) else EXIT_NOT_CONVERGED


# -- argument parsing ---------------------------------------------------------

def _c1_grid_arg(text: str) -> list[float]:
    try:
        return parse_c1_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid --c1-grid {text!r}: {exc}") from None


def _starts_arg(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid --starts {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("--starts needs at least one value")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optimal-lockdown",
        description="Simulate and optimise lockdown policies for the coupled epidemic-economy model.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="TOML scenario file")
    src.add_argument("--preset", choices=["burundi", "india", "us"], help="built-in calibrated scenario")
    common.add_argument("--out", required=True, help="output CSV path")
    common.add_argument("--dt", type=float, help="override the step length (days)")
    common.add_argument("--c1", type=float, help="override the value of statistical life")
    common.add_argument("--c2", type=float, help="override the cost per infection")

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--max-iters", type=int, help="iterations per start (default 500)")
    opt.add_argument("--tol", type=float, help="relative improvement tolerance (default 1e-8)")
    opt.add_argument("--fd-step", type=float, help="finite-difference step (default 1e-4)")
    opt.add_argument("--starts", type=_starts_arg, help="comma-separated constant starting levels")

    p = sub.add_parser("simulate", parents=[common], help="integrate one policy")
    p.add_argument("--policy", required=True, help="constant:<level> or a CSV of per-step values")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", parents=[common, opt], help="compute the optimal lockdown")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", parents=[common, opt], help="optimise over a grid of c1 values")
    p.add_argument("--c1-grid", type=_c1_grid_arg, help="lo:hi:n, n log-spaced points")
    p.add_argument("--workers", type=int, default=1, help="processes for the sweep")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidScenarioError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DegenerateStateError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
