"""
Command-line front end.

Every subcommand writes ``<name>.csv`` and a ``<name>.json`` manifest into
the output directory, plus ``<name>.gp`` (a gnuplot script) with
``--gnuplot``.  Options may come from a JSON or TOML file given with
``--config``; flags on the command line override the file.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical or
resource error (including failed oracle checks), 3 an UNRESOLVED or
NOT_EQUILIBRATED outcome under ``--strict``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .errors import (DegenerateMomentsError, DomainError, Flag, InsufficientWindowError, NoRevivalError,
                     ResolutionError, ResourceError)
from .fermions import FiniteChain, QuenchSpec, ThermodynamicLimit, max_group_velocity

log = logging.getLogger("stabquench")

PRESETS = {
    "large-0.5": (1e4, 0.5),
    "large-critical": (1e4, 1.0),
    "small": (0.5, 0.6),
    "small-critical": (0.9, 1.0),
}

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_STRICT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_int_range(text) -> list:
    """``"1..8"`` (inclusive), ``"2,4,6"`` or a single integer."""
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    text = str(text).strip()
    try:
        if ".." in text:
            a, b = text.split("..")
            out = list(range(int(a), int(b) + 1))
        else:
            out = [int(x) for x in text.split(",")]
        if not out or min(out) < 1:
            raise ValueError
        return out
    except ValueError:
        raise UsageError(f"bad integer range {text!r}") from None


def parse_float_range(text) -> np.ndarray:
    """``"0:8:0.1"`` (start:stop:step, stop included), ``"0,0.5,1"`` or one number."""
    if isinstance(text, (list, tuple)):
        return np.array(text, dtype=float)
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, step = (float(x) for x in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            n = int(np.floor((b - a) / step + 1e-9)) + 1
            return np.round(a + step * np.arange(n), 12)
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"bad time grid {text!r}") from None


def load_config(path) -> dict:
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    else:
        with open(path) as fh:
            data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a key-value table")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _common(p):
    p.add_argument("--config", help="JSON or TOML file with option values")
    p.add_argument("--quench", choices=sorted(PRESETS), help="named (lambda0, lambda1) pair")
    p.add_argument("--lambda0", type=float)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--N", dest="n_sites", type=int, help="finite periodic chain (default: infinite)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, help="worker threads (overrides STABQUENCH_THREADS)")
    p.add_argument("--strict", action="store_true", help="exit 3 on UNRESOLVED or NOT_EQUILIBRATED")
    p.add_argument("--reproducible", action="store_true",
                   help="omit wall time from the manifest so reruns are byte-identical")
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    p.add_argument("--checkpoint", help="resume file for long scans")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stabquench", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("scan-time", help="SE of blocks along time, with dephased levels")
    _common(p)
    p.add_argument("--L", default="1..8")
    p.add_argument("--t", default="0:8:0.1")
    p.add_argument("--no-dephased", action="store_true")

    p = sub.add_parser("equilibration", help="equilibration time per block length")
    _common(p)
    p.add_argument("--L", default="1..10")
    p.add_argument("--t", default="0:8:0.05")
    p.add_argument("--tol", type=float, default=0.05)

    p = sub.add_parser("se-length", help="second differences, locality lengths, velocities")
    _common(p)
    p.add_argument("--L", default="1..12")
    p.add_argument("--t", default="0:2:0.25")
    p.add_argument("--eps", type=float, default=0.01)

    p = sub.add_parser("loschmidt", help="echo revivals and the Lieb-Robinson speed")
    _common(p)
    p.add_argument("--t-max", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--threshold", type=float, default=3.0)

    p = sub.add_parser("replica", help="transfer-matrix scaling of a uniform MPS")
    _common(p)
    p.add_argument("--mps", choices=["random", "ghz", "tfim", "magic"], default="random")
    p.add_argument("--D", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--L", default="4..10")
    p.add_argument("--lam", type=float, default=0.5, help="field of the variational TFIM state")

    p = sub.add_parser("oracle-check", help="cross-validate against the dense oracle")
    _common(p)
    p.add_argument("--full", action="store_true", help="full suite at N = 12 (default: quick, N = 8)")
    return parser


def _resolve(parser, argv):
    """Parse, then refill unset options from the config file and reparse."""
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required")
    if args.config:
        cfg = load_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _spec(args) -> QuenchSpec:
    if args.quench:
        lam0, lam1 = PRESETS[args.quench]
    else:
        lam0, lam1 = PRESETS["large-0.5"]
    lam0 = args.lambda0 if args.lambda0 is not None else lam0
    lam1 = args.lambda1 if args.lambda1 is not None else lam1
    size = FiniteChain(args.n_sites) if args.n_sites else ThermodynamicLimit()
    return QuenchSpec(lam0, lam1, size)


def _check_tol(name, value):
    if not 0 < value < 1:
        raise UsageError(f"{name} must lie in (0, 1)")


class Output:
    """Collects files of one run and writes the manifest last."""

    def __init__(self, args, name):
        self.args, self.name, self.files = args, name, []
        os.makedirs(args.out, exist_ok=True)
        self.t0 = time.perf_counter()

    def path(self, suffix):
        p = os.path.join(self.args.out, f"{self.name}{suffix}")
        self.files.append(p)
        return p

    def table(self, suffix, header, rows):
        with open(self.path(suffix), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])

    def gnuplot(self, body):
        if self.args.gnuplot:
            with open(self.path(".gp"), "w") as fh:
                fh.write(body)

    def manifest(self, results: dict):
        import numba
        import scipy

        inputs = {k: v for k, v in vars(self.args).items() if k not in ("config",)}
        doc = {
            "command": self.name,
            "inputs": _jsonable(inputs),
            "versions": {"stabquench": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                         "numba": numba.__version__, "python": platform.python_version()},
            "checksums": {os.path.basename(f): _sha256(f) for f in self.files},
            "results": _jsonable(results),
        }
        if not self.args.reproducible:
            doc["wall_time_s"] = time.perf_counter() - self.t0
        with open(os.path.join(self.args.out, f"{self.name}.json"), "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)


def _sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, Flag):
        return x.value
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def cmd_scan_time(args) -> int:
    from .analysis import scan_metadata, time_scan, write_scan_csv

    spec = _spec(args)
    scan = time_scan(spec, parse_int_range(args.L), parse_float_range(args.t),
                     dephased=not args.no_dephased, checkpoint=args.checkpoint)
    out = Output(args, "scan_time")
    write_scan_csv(scan, out.path(".csv"))
    out.gnuplot(_GP_SCAN.format(csv=f"{out.name}.csv"))
    out.manifest({"scan": scan_metadata(scan)})
    return EXIT_OK


def cmd_equilibration(args) -> int:
    from .analysis import equilibration_band, equilibration_time, scan_metadata, time_scan, write_scan_csv

    _check_tol("--tol", args.tol)
    spec = _spec(args)
    t_grid = parse_float_range(args.t)
    scan = time_scan(spec, parse_int_range(args.L), t_grid, checkpoint=args.checkpoint)
    v_lr = max_group_velocity(spec.lambda1)
    rows, taus = [], []
    for L in scan.L_grid:
        ref = scan.dephased("M2", L)
        tau = equilibration_time(t_grid, scan.series("M2", L), ref, args.tol)
        _, absolute = equilibration_band(ref, args.tol)
        rows.append([L, L / v_lr, ref, str(tau) if isinstance(tau, Flag) else tau, int(absolute)])
        taus.append(tau)
    out = Output(args, "equilibration")
    out.table(".csv", ["L", "L_over_vLR", "M2_dephased", "tau", "absolute_band"], rows)
    write_scan_csv(scan, out.path("_scan.csv"))
    fit = _affine_fit([L for L, t in zip(scan.L_grid, taus) if not isinstance(t, Flag)],
                      [t for t in taus if not isinstance(t, Flag)])
    out.gnuplot(_GP_EQ.format(csv=f"{out.name}.csv"))
    out.manifest({"scan": scan_metadata(scan), "tol": args.tol, "v_LR": v_lr, "tau": taus, "fit": fit})
    if args.strict and any(isinstance(t, Flag) for t in taus):
        return EXIT_STRICT
    return EXIT_OK


def _affine_fit(x, y):
    if len(x) < 2:
        return None
    x, y = np.asarray(x, float), np.asarray(y, float)
    a, b = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - a * x - b) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return {"slope": a, "intercept": b, "r2": 1 - ss_res / ss_tot if ss_tot > 0 else 1.0}


def cmd_se_length(args) -> int:
    from .analysis import locality_profile, profile_metadata, scan_metadata, spreading_velocity, time_scan, \
        write_scan_csv

    _check_tol("--eps", args.eps)
    spec = _spec(args)
    scan = time_scan(spec, parse_int_range(args.L), parse_float_range(args.t), dephased=False,
                     checkpoint=args.checkpoint)
    profiles = {k: locality_profile(scan, k, args.eps) for k in ("T2", "T4")}
    out = Output(args, "se_length")
    rows = []
    for kind, p in profiles.items():
        for j, t in enumerate(p.t_grid):
            for L, d in zip(p.L_interior, p.second_diffs[j]):
                rows.append([kind, float(t), int(L), float(d)])
    out.table(".csv", ["kind", "t", "L", "abs_d2"], rows)
    out.table("_lengths.csv", ["t", "l2", "l4"],
              [[float(t), str(a), str(b)] for t, a, b in zip(scan.t_grid, profiles["T2"].l_eps,
                                                            profiles["T4"].l_eps)])
    write_scan_csv(scan, out.path("_scan.csv"))
    try:
        velocities = spreading_velocity(profiles["T2"].velocity, profiles["T4"].velocity)
    except InsufficientWindowError as exc:
        velocities = {"error": str(exc)}
    out.gnuplot(_GP_SE.format(csv=f"{out.name}.csv", lengths=f"{out.name}_lengths.csv"))
    out.manifest({"scan": scan_metadata(scan), "profiles": {k: profile_metadata(p) for k, p in profiles.items()},
                  "velocities": velocities})
    unresolved = any(l is Flag.UNRESOLVED for p in profiles.values() for l in p.l_eps)
    if args.strict and (unresolved or "error" in velocities):
        return EXIT_STRICT
    return EXIT_OK


def cmd_loschmidt(args) -> int:
    from .loschmidt import echo_series, first_revival, lr_speed

    if not args.n_sites:
        args.n_sites = 100
    spec = _spec(args)
    series = echo_series(spec, args.t_max, args.dt)
    out = Output(args, "loschmidt")
    out.table(".csv", ["t", "LE"], zip(series.t_grid, series.le))
    try:
        peak = first_revival(series, threshold=args.threshold)
        res = {"T_rev": peak.t, "prominence": peak.prominence, "v_LR": lr_speed(peak.t, spec.size.n_sites)}
    except NoRevivalError as exc:
        res = {"T_rev": None, "v_LR": None, "outcome": str(Flag.UNRESOLVED), "reason": str(exc)}
    res["v_LR_analytic"] = max_group_velocity(spec.lambda1)
    out.gnuplot(_GP_LE.format(csv=f"{out.name}.csv"))
    out.manifest(res)
    if args.strict and res["T_rev"] is None:
        return EXIT_STRICT
    return EXIT_OK


def cmd_replica(args) -> int:
    from . import replica

    rng = np.random.default_rng(args.seed)
    if args.mps == "random":
        mps = replica.random_mps(args.D, rng)
    elif args.mps == "ghz":
        mps = replica.ghz_mps(0.05, rng)
    elif args.mps == "magic":
        mps = replica.product_mps([np.cos(np.pi / 8), np.sin(np.pi / 8)])
    else:
        mps = replica.z2_cat(replica.variational_tfim_mps(args.lam, args.D, args.seed))
    L_values = parse_int_range(args.L)
    rep = replica.scaling_report(mps, args.k, L_values)
    s = replica.mps_scaling(mps, args.k)
    preds = [replica.predict_T(s, L) for L in L_values]
    out = Output(args, "replica")
    out.table(".csv", ["L", "dense", "predicted", "relative_deviation", "bound", "T_predicted", "T_error_bound"],
              [[r["L"], r["dense"], r["predicted"], r["relative_deviation"], r["bound"], p["value"],
                p["error_bound"]] for r, p in zip(rep["rows"], preds)])
    out.gnuplot(_GP_REP.format(csv=f"{out.name}.csv"))
    rep["bound_holds"] = all(r["relative_deviation"] <= r["bound"] * (1 + 1e-9) + 1e-12 for r in rep["rows"])
    out.manifest(rep)
    return EXIT_OK if rep["bound_holds"] else EXIT_NUMERIC


def cmd_oracle_check(args) -> int:
    from .validation import full_suite

    res = full_suite(quick=not args.full)
    out = Output(args, "oracle_check")
    out.table(".csv", ["check", "pass"], [[k, int(v["pass"])] for k, v in res.items() if isinstance(v, dict)])
    out.manifest(res)
    return EXIT_OK if res["pass"] else EXIT_NUMERIC


COMMANDS = {
    "scan-time": cmd_scan_time,
    "equilibration": cmd_equilibration,
    "se-length": cmd_se_length,
    "loschmidt": cmd_loschmidt,
    "replica": cmd_replica,
    "oracle-check": cmd_oracle_check,
}


def _set_threads(n):
    if n is None:
        env = os.environ.get("STABQUENCH_THREADS")
        n = int(env) if env else None
    if n:
        import numba

        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = _resolve(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        _set_threads(args.threads)
        return COMMANDS[args.command](args)
    except (UsageError, DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"stabquench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceError, ResolutionError, DegenerateMomentsError, InsufficientWindowError,
            ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"stabquench: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run())


_GP_SCAN = """set datafile separator ','
set key autotitle columnhead
set xlabel 't'
set ylabel 'M2 (bits)'
plot for [L=1:14] '< grep -v dephased {csv}' using ($3==L ? $4 : 1/0):8 with lines title sprintf('L=%d', L)
"""

_GP_EQ = """set datafile separator ','
set key autotitle columnhead
set multiplot layout 1,2
set xlabel 'L'
set ylabel 'tau'
plot '{csv}' using 1:4 with linespoints
set xlabel 'L / v_LR'
plot '{csv}' using 2:4 with linespoints
unset multiplot
"""

_GP_SE = """set datafile separator ','
set key autotitle columnhead
set multiplot layout 1,2
set logscale y
set xlabel 'L'
set ylabel '|d2 T2|'
plot '< grep ^T2 {csv}' using 3:4 with points notitle
unset logscale y
set xlabel 't'
set ylabel 'l_eps'
plot '{lengths}' using 1:2 with steps title 'l2', '' using 1:3 with steps title 'l4'
unset multiplot
"""

_GP_LE = """set datafile separator ','
set key autotitle columnhead
set xlabel 't'
set ylabel 'LE'
plot '{csv}' using 1:2 with lines
"""

_GP_REP = """set datafile separator ','
set key autotitle columnhead
set logscale y
set xlabel 'L'
plot '{csv}' using 1:4 with linespoints title 'relative deviation', '' using 1:5 with lines title 'bound'
"""

if __name__ == "__main__":
    main()
