"""Command-line front end: analytic rates, simulations, effectiveness tables
and analytic-vs-simulated comparisons, written as CSV or JSON.

Every command accepts ``--config FILE`` with flat ``key=value`` lines (keys
are long flag names).  Precedence is flag > config file > built-in default.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

from . import analytic, montecarlo
from .model import ConfigurationError, NetworkConfig, ParameterError, ResourceError
from .strategies import STRATEGIES

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE = 0, 2, 3
RECOMMENDED_TRIALS = 100
TABLE_SNR_DB = 9.0

COMPARE_COLUMNS = ["snr_db", "strategy", "w", "rate_analytic", "rate_sim_mean",
                   "rate_sim_stderr", "trials", "seed"]

DEFAULTS = {
    "relays": "2",
    "hops": "4",
    "snr_db": "10",
    "strategy": None,  # per command
    "window": 2,
    "block_size": 2,
    "windows": None,  # 1:L
    "trials": None,  # per command
    "seed": 0,
    "users": 1,
    "threads": 1,
    "output": None,
    "format": "csv",
    "optimal_approx": "dp",
}
COMMAND_DEFAULTS = {
    "analytic": {"strategy": "optimal"},
    "simulate": {"strategy": "optimal", "trials": 10_000},
    "effectiveness": {"trials": 5000, "snr_db": str(TABLE_SNR_DB)},
    "compare": {"strategy": "optimal,hop,adhoc,block,sliding", "trials": 10_000},
}
INT_KEYS = {"window", "block_size", "trials", "seed", "users", "threads"}


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# value parsing

def parse_range(text: str, kind=float) -> list:
    """``"v"``, ``"a,b,c"`` or inclusive ``"start:stop[:step]"``."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise UsageError(f"bad range {text!r}; use start:stop[:step]")
        start, stop = kind(parts[0]), kind(parts[1])
        step = kind(parts[2]) if len(parts) == 3 else kind(1)
        if not step > 0:
            raise UsageError(f"range step must be positive in {text!r}")
        if stop < start:
            raise UsageError(f"empty range {text!r}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [start + i * step for i in range(n)]
        if kind is float:
            values = [round(v, 10) for v in values]
        return values
    try:
        values = [kind(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not values:
        raise UsageError("empty value list")
    return values


def read_config(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def resolve(args: argparse.Namespace) -> dict:
    config = read_config(args.config) if args.config else {}
    merged = {}
    for key, default in DEFAULTS.items():
        value = getattr(args, key, None)
        if value is None:
            value = config.get(key)
        if value is None:
            value = COMMAND_DEFAULTS[args.command].get(key, default)
        if value is not None and key in INT_KEYS:
            try:
                value = int(value)
            except ValueError:
                raise UsageError(f"{key} must be an integer, got {value!r}") from None
        merged[key] = value
    if merged["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {merged['format']!r}")
    if merged["optimal_approx"] not in ("dp", "indep"):
        raise UsageError("optimal-approx must be dp or indep")
    return merged


def _strategies(opts) -> list:
    names = [s.strip() for s in str(opts["strategy"]).split(",") if s.strip()]
    for s in names:
        if s not in STRATEGIES:
            raise UsageError(f"unknown strategy {s!r}; choose from {', '.join(STRATEGIES)}")
    return names


def _w_for(name, opts):
    if name == "sliding":
        return opts["window"]
    if name == "block":
        return opts["block_size"]
    return None


def _single(opts, key):
    values = parse_range(opts[key], int)
    if len(values) != 1:
        raise UsageError(f"--{key} takes a single value for this command")
    return values[0]


def _warn_trials(opts):
    if opts["trials"] < RECOMMENDED_TRIALS:
        print(f"warning: {opts['trials']} trials is below the recommended {RECOMMENDED_TRIALS}",
              file=sys.stderr)


# ---------------------------------------------------------------------------
# commands (each returns column names and rows of native values)

def cmd_analytic(opts):
    M, L = _single(opts, "relays"), _single(opts, "hops")
    columns = ["snr_db", "strategy", "w", "relays", "hops", "users", "rate_analytic", "method"]
    rows = []
    for snr_db in parse_range(opts["snr_db"]):
        cfg = NetworkConfig.from_db(L, M, snr_db)
        for name in _strategies(opts):
            w = _w_for(name, opts)
            rate = analytic.analytic_rate(name, M, L, cfg.snr_scale, w, opts["optimal_approx"])
            rate = analytic.sum_rate_multiuser(opts["users"], rate)
            rows.append([snr_db, name, w, M, L, opts["users"], rate.rate, rate.method.value])
    return columns, rows


def cmd_simulate(opts):
    M, L = _single(opts, "relays"), _single(opts, "hops")
    _warn_trials(opts)
    columns = ["snr_db", "strategy", "w", "relays", "hops", "users",
               "rate_sim_mean", "rate_sim_stderr", "trials", "seed"]
    names = _strategies(opts)
    rows = []
    for snr_db in parse_range(opts["snr_db"]):
        cfg = NetworkConfig.from_db(L, M, snr_db)
        keys = [(n, _w_for(n, opts)) for n in names]
        est = montecarlo.estimate_many(cfg, keys, opts["trials"], opts["seed"],
                                       opts["threads"], opts["users"])
        for name, w in keys:
            e = est[(name, w)]
            rows.append([snr_db, name, w, M, L, opts["users"], e.mean, e.stderr, e.trials, e.seed])
    return columns, rows


def cmd_effectiveness(opts):
    _warn_trials(opts)
    relays = parse_range(opts["relays"], int)
    hops = parse_range(opts["hops"], int)
    snrs = parse_range(opts["snr_db"])
    windows = parse_range(opts["windows"] or f"1:{max(hops)}", int)
    if min(windows) < 1:
        raise ParameterError("window sizes must be >= 1")
    columns = ["relays", "hops", "snr_db", "trials", "seed"] + [f"w{w}" for w in windows]
    rows = []
    for snr_db in snrs:
        for M in relays:
            for L in hops:
                usable = [w for w in windows if w <= L]
                if not usable:
                    raise ParameterError(f"no window size fits L={L}")
                cfg = NetworkConfig.from_db(L, M, snr_db)
                eff = montecarlo.effectiveness_row(cfg, usable, opts["trials"], opts["seed"], opts["threads"])
                rows.append([M, L, snr_db, opts["trials"], opts["seed"]]
                            + [round(eff[w], 2) if w in eff else None for w in windows])
    return columns, rows


def cmd_compare(opts):
    M, L = _single(opts, "relays"), _single(opts, "hops")
    _warn_trials(opts)
    names = _strategies(opts)
    rows = []
    for snr_db in parse_range(opts["snr_db"]):
        cfg = NetworkConfig.from_db(L, M, snr_db)
        keys = [(n, _w_for(n, opts)) for n in names]
        est = montecarlo.estimate_many(cfg, keys, opts["trials"], opts["seed"], opts["threads"], opts["users"])
        for name, w in keys:
            try:
                rate = analytic.analytic_rate(name, M, L, cfg.snr_scale, w, opts["optimal_approx"])
                rate = analytic.sum_rate_multiuser(opts["users"], rate).rate
            except (ParameterError, ResourceError):
                rate = None
            e = est[(name, w)]
            rows.append([snr_db, name, w, rate, e.mean, e.stderr, e.trials, e.seed])
    return COMPARE_COLUMNS, rows


COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "effectiveness": cmd_effectiveness,
    "compare": cmd_compare,
}


# ---------------------------------------------------------------------------
# output

def _cell(v, percent=False):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.2f}" if percent else repr(v)
    return str(v)


def render(command, columns, rows, opts, fmt) -> str:
    percent_cols = {c for c in columns if command == "effectiveness" and c.startswith("w")}
    if fmt == "json":
        echoed = {k: v for k, v in opts.items() if k not in ("threads", "output")}
        doc = {
            "command": command,
            "config": echoed,
            "columns": columns,
            "rows": [dict(zip(columns, r)) for r in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(v, c in percent_cols) for c, v in zip(columns, r)])
    return buf.getvalue()


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dfrelay-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("network and sweep")
    g.add_argument("--relays", help="relays per hop M (int, list a,b or range a:b[:s])")
    g.add_argument("--hops", help="number of hops L (int, list or range)")
    g.add_argument("--snr-db", dest="snr_db", help="mean link SNR in dB: value, list, or start:stop:step")
    g.add_argument("--strategy", help=f"comma-separated subset of {{{','.join(STRATEGIES)}}}")
    g.add_argument("--window", type=int, help="sliding window size (default 2)")
    g.add_argument("--block-size", dest="block_size", type=int, help="block size (default 2)")
    g.add_argument("--windows", help="window sizes for effectiveness, e.g. 1:6")
    g.add_argument("--optimal-approx", dest="optimal_approx", choices=["dp", "indep"],
                   help="closed form used for the optimal strategy (default dp)")
    r = common.add_argument_group("run")
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--users", type=int, help="noise-limited users N (sum rate)")
    r.add_argument("--threads", type=int, help="worker threads, 0 = all cores")
    o = common.add_argument_group("output")
    o.add_argument("--output", help="output file (default stdout)")
    o.add_argument("--format", choices=["csv", "json"])
    o.add_argument("--config", help="flat key=value file")

    parser = argparse.ArgumentParser(prog="dfrelay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).splitlines()[0])
    return parser


cmd_analytic.__doc__ = "closed-form rates over an SNR sweep"
cmd_simulate.__doc__ = "Monte Carlo rates over an SNR sweep"
cmd_effectiveness.__doc__ = "sliding-window rate as a percentage of optimal, per window size"
cmd_compare.__doc__ = "analytic and simulated rates side by side"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve(args)
        columns, rows = COMMANDS[args.command](opts)
        text = render(args.command, columns, rows, opts, opts["format"])
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (UsageError, ParameterError, ConfigurationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if opts["output"]:
        atomic_write(opts["output"], text)
        if opts["format"] == "csv":
            echoed = {k: v for k, v in opts.items() if k not in ("threads", "output")}
            atomic_write(opts["output"] + ".meta.json",
                         json.dumps({"command": args.command, "config": echoed}, indent=2) + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
