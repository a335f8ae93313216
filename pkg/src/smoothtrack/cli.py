"""Command-line front end.

Every mode writes one table (CSV) or object (JSON) to ``--out`` or stdout.
Exit codes: 0 success, 1 numerical failure, 2 usage error.  Errors are also
reported as a one-line JSON record on stderr.  Options may come from a flat
``key=value`` file given with ``--config``; command-line flags win.  Set
``SMOOTHTRACK_LOG_LEVEL`` (e.g. ``DEBUG``) for diagnostic logging.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from .design import certify, gain_from_gamma, solve_normalized_riccati
from .exceptions import NumericalError
from .optimize import DesignProblem, gamma_table, minimize_gamma
from .risk import cost as tracking_cost
from .simulation import (
    NOISE_KINDS,
    SIGNAL_KINDS,
    SignalSpec,
    SimConfig,
    boundary_profile,
    estimate_rate,
    generate_signal,
    simulate_observations,
)
from .tracker import MODES, TrackerConfig, run
from .validation import check_observations, check_order

log = logging.getLogger("smoothtrack")

RUN_MODES = ("design", "track", "simulate", "rate", "profile", "table")


class UsageError(ValueError):
    pass


def _float_list(text):
    text = text.strip()
    if not text:
        return []
    return [float(v) for v in text.split(",")]


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser():
    p = argparse.ArgumentParser(prog="smoothtrack", description=__doc__.split("\n")[0])
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--mode", choices=RUN_MODES, required=False)
    p.add_argument("--k", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--gamma-eps", type=float)
    p.add_argument("--gamma-max", type=float)
    p.add_argument("--gamma", type=float, help="fixed design parameter (skips optimization)")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--signal", choices=SIGNAL_KINDS)
    p.add_argument("--signal-param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--noise", choices=NOISE_KINDS, default="gaussian")
    p.add_argument("--in", dest="input", help="observation CSV for track mode")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tracker-mode", choices=MODES, default="forward")
    p.add_argument("--init", type=_float_list, help="comma-separated initial estimate")
    p.add_argument("--L-grid", type=_float_list, help="comma-separated L values (table mode)")
    p.add_argument("--n-list", type=_int_list, default="512,2048,8192")
    p.add_argument("--j", type=int, default=0, help="derivative index (rate mode)")
    p.add_argument("--t", type=float, default=0.5, help="evaluation time (rate mode)")
    return p


def _read_config(path):
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def parse_args(argv=None):
    parser = build_parser()
    pre, _ = parser.parse_known_args(argv)
    if pre.config:
        try:
            file_values = _read_config(pre.config)
        except OSError as exc:
            parser.error(f"cannot read config: {exc}")
        except UsageError as exc:
            parser.error(str(exc))
        known = {a.dest for a in parser._actions}
        unknown = set(file_values) - known
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "signal_param" in file_values:
            file_values["signal_param"] = file_values["signal_param"].split(";")
        parser.set_defaults(**file_values)
    args = parser.parse_args(argv)
    if args.mode is None:
        parser.error("--mode is required")
    return args


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"mode {args.mode} requires {flags}")


def _signal_params(args):
    params = {}
    for item in args.signal_param:
        if "=" not in item:
            raise UsageError(f"--signal-param expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        params[key.strip()] = float(value)
    return params


def _signal(args, default_kind):
    kind = args.signal or default_kind
    return SignalSpec(kind, args.k, args.L, _signal_params(args))


def _gain(args):
    """Gain from --gamma if given, else from the optimizer."""
    if args.gamma is not None:
        return gain_from_gamma(solve_normalized_riccati(args.k), args.gamma, args.sigma).q
    _require(args, "L")
    return minimize_gamma(
        DesignProblem(args.k, args.L, args.sigma, args.gamma_eps, args.gamma_max)
    ).q


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def render(table, fmt):
    """``table`` is ``{"columns": [...], "rows": [[...]], "meta": {...}}``."""
    if fmt == "json":
        doc = {
            "rows": [{c: _jsonable(v) for c, v in zip(table["columns"], row)}
                     for row in table["rows"]],
        }
        doc.update({k: _jsonable(v) for k, v in table.get("meta", {}).items()})
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table["columns"])
    for row in table["rows"]:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def run_design(args):
    _require(args, "k", "sigma")
    k = check_order(args.k)
    U = solve_normalized_riccati(k)
    if args.gamma is not None:
        design = gain_from_gamma(U, args.gamma, args.sigma)
        gamma_eps = args.gamma_eps if args.gamma_eps is not None else float("nan")
        active = False
        _require(args, "L")
        c = tracking_cost(design.q, args.L, args.sigma)
    else:
        _require(args, "L")
        result = minimize_gamma(
            DesignProblem(k, args.L, args.sigma, args.gamma_eps, args.gamma_max)
        )
        design, gamma_eps = result.design, result.problem.gamma_eps
        active, c = result.constraint_active, result.cost_opt
    report = certify(design)
    record = {
        "k": k,
        "L": args.L,
        "sigma": args.sigma,
        "gamma_eps": gamma_eps,
        "gamma_opt": design.gamma,
        "gamma_over_sigma": design.gamma / design.sigma,
        "constraint_active": active,
        "cost": c,
        "stable": report.stable,
        "distinct": report.distinct,
        "certified": report.passed,
    }
    for j in range(k + 1):
        record[f"U0{j}"] = U.U[0, j]
    for j in range(k + 1):
        record[f"q{j}"] = design.q[j]
    for j, w in enumerate(design.eigenvalues):
        record[f"eig{j}_re"] = w.real
        record[f"eig{j}_im"] = w.imag
    return {"columns": list(record), "rows": [list(record.values())]}


def read_observations(path):
    """Observations from a CSV file.

    A header row naming an ``x`` column selects that column; otherwise the
    file must have exactly one numeric column, with or without a header.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise UsageError(f"{path}: file is empty")
    col, start = 0, 0
    header = [h.strip() for h in rows[0]]
    try:
        [float(h) for h in header]
    except ValueError:
        start = 1
        if "x" in header:
            col = header.index("x")
        elif len(header) == 1:
            col = 0
        else:
            raise UsageError(f"{path}:1: header has no 'x' column") from None
    values = []
    for lineno, row in enumerate(rows[start:], start + 1):
        if not row or all(not c.strip() for c in row):
            continue
        if col >= len(row):
            raise UsageError(f"{path}:{lineno}: missing column {col + 1}")
        try:
            values.append(float(row[col]))
        except ValueError:
            raise UsageError(f"{path}:{lineno}: not a number: {row[col]!r}") from None
    return np.array(values)


def run_track(args):
    _require(args, "k", "sigma", "input")
    k = check_order(args.k)
    X = check_observations(read_observations(args.input), n_min=k + 3)
    n = X.size - 1
    cfg = TrackerConfig(k, n, _gain(args), init=args.init)
    traj = run(X, cfg, args.tracker_mode)
    t = np.arange(n + 1) / n
    columns = ["t"] + [f"f{j}" for j in range(k + 1)]
    rows = np.column_stack([t, traj]).tolist()
    return {"columns": columns, "rows": rows, "meta": {"tracker_mode": args.tracker_mode}}


def simulate_path(args):
    """Signal samples and one observation path, as the simulate mode produces."""
    signal = _signal(args, "sinusoid")
    F = generate_signal(signal, args.n)
    X = simulate_observations(F, args.sigma, args.noise, args.seed)
    return F, X


def run_simulate(args):
    _require(args, "k", "L", "sigma", "n")
    check_order(args.k)
    F, X = simulate_path(args)
    t = np.arange(args.n + 1) / args.n
    columns = ["t", "x"] + [f"f{j}" for j in range(args.k + 1)]
    return {"columns": columns, "rows": np.column_stack([t, X, F]).tolist()}


def run_rate(args):
    _require(args, "k", "L", "sigma")
    check_order(args.k)
    base = SimConfig(_signal(args, "worst-case-drift"), args.sigma, max(args.n_list),
                     args.noise, args.seed, args.reps)
    est = estimate_rate(base, _gain(args), args.n_list, j=args.j, t=args.t,
                        mode=args.tracker_mode, init=args.init)
    rows = [[int(n), m, s] for n, m, s in zip(est.n_list, est.mse, est.se)]
    return {
        "columns": ["n", "mse", "se"],
        "rows": rows,
        "meta": {"slope": est.slope, "expected_slope": est.expected, "j": est.j, "t": est.t},
    }


def run_profile(args):
    _require(args, "k", "L", "sigma", "n")
    check_order(args.k)
    cfg = SimConfig(_signal(args, "sinusoid"), args.sigma, args.n, args.noise, args.seed,
                    args.reps)
    prof = boundary_profile(cfg, _gain(args), init=args.init)
    columns = ["t"] + list(MODES)
    data = np.column_stack([prof.times] + [prof.mean_abs_error[m][:, 0] for m in MODES])
    return {"columns": columns, "rows": data.tolist()}


def run_table(args):
    _require(args, "k", "sigma", "L_grid")
    if not args.L_grid:
        raise UsageError("--L-grid is empty")
    tab = gamma_table(args.k, args.sigma, args.L_grid, args.gamma_eps, args.gamma_max)
    slope = float("nan") if tab.slope is None else tab.slope
    rows = [[L, g, c, slope] for L, g, c in zip(tab.L, tab.gamma_opt, tab.cost_opt)]
    return {
        "columns": ["L", "gamma_opt", "cost", "log_slope"],
        "rows": rows,
        "meta": {"slope": tab.slope, "max_log_residual": tab.max_residual},
    }


_HANDLERS = {
    "design": run_design,
    "track": run_track,
    "simulate": run_simulate,
    "rate": run_rate,
    "profile": run_profile,
    "table": run_table,
}


def _error(kind, exc, code):
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__,
                                 "message": str(exc)}) + "\n")
    return code


def main(argv=None):
    logging.basicConfig(level=os.environ.get("SMOOTHTRACK_LOG_LEVEL", "WARNING").upper())
    args = parse_args(argv)
    log.debug("arguments: %s", vars(args))
    try:
        table = _HANDLERS[args.mode](args)
    except NumericalError as exc:
        return _error("numeric", exc, 1)
    except (ValueError, OSError) as exc:
        return _error("usage", exc, 2)
    text = render(table, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
