"""Command-line entry point: ``doseorder <command> ...``.

Tabular output is CSV on stdout unless ``--format json`` is given; ``hasse``
emits DOT.  Exit status is 0 on success and 1 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Dict, List, Optional

from . import extension, order, protocol33, simulator
from .tally import EnrolledState, Tally, pessimize

DEFAULT_SD = math.log(1.5) / math.log(1.4)


class UsageError(Exception):
    pass


# config file: flat ``key = value`` lines; keys mirror the simulate flags
CONFIG_KEYS = {
    "D": int,
    "r": int,
    "rule": str,
    "mean": float,
    "sd": float,
    "rate": float,
    "n": int,
    "titr_wait": float,
    "horizon": float,
    "reps": int,
    "seed": int,
    "jobs": int,
    "format": str,
    "output": str,
    "events": str,
    "pessimize_titrations": lambda v: _parse_bool(v),
}

SIM_DEFAULTS = {
    "D": 3, "r": order.DEFAULT_R, "rule": "kan", "mean": 3.0, "sd": DEFAULT_SD,
    "rate": 2.5, "n": 40, "titr_wait": 1.0, "horizon": math.inf, "reps": 1000,
    "seed": simulator.Scenario.seed, "jobs": 1, "format": "csv",
    "output": None, "events": None, "pessimize_titrations": False,
}


def _parse_bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {v!r}")


def load_config(path: str) -> Dict[str, object]:
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}")
    return values


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"expected numbers, got {text!r}")


def _tally(text: str) -> Tally:
    try:
        return Tally.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.8g}"


# commands

def cmd_paths(args) -> str:
    table = protocol33.enumerate_protocol(args.D)
    if args.format == "json":
        return _json([
            {"path": i, "outcomes": p.outcome_string(), "final_tally": str(p.final_tally),
             "recommendation": p.recommendation}
            for i, p in enumerate(table.paths, start=1)
        ])
    return protocol33.paths_csv(table)


def cmd_tallies(args) -> str:
    table = protocol33.enumerate_protocol(args.D)
    rect = protocol33.rectify(table, args.r) if args.rectified else None
    if args.format == "json":
        rows = []
        for a in table.tallies():
            row = {"tally": str(a), "F": table.entries[a].rec,
                   "terminal": table.entries[a].terminal}
            if rect is not None:
                row["F_rectified"] = rect[a]
            rows.append(row)
        return _json(rows)
    return protocol33.tallies_csv(table, rect)


def cmd_hasse(args) -> str:
    table = protocol33.enumerate_protocol(args.D)
    labels = protocol33.rectify(table, args.r) if args.rectified else table.F
    maxima = []
    for d in set(labels.values()):
        maxima += order.maximal_elements([a for a in labels if labels[a] == d], args.r)
    hasse = order.transitive_reduction(labels, args.r)
    return order.hasse_dot(hasse, labels, maxima)


def cmd_audit(args) -> str:
    table = protocol33.enumerate_protocol(args.D)
    F = table.F
    pairs = order.monotonicity_violations(F, args.r)
    if args.format == "json":
        return _json([{"lower": str(a), "upper": str(b), "F_lower": F[a], "F_upper": F[b]}
                      for a, b in pairs])
    return _csv(["lower", "upper", "F_lower", "F_upper"],
                [[str(a), str(b), F[a], F[b]] for a, b in pairs])


def cmd_fibers(args) -> str:
    rule = extension.build_kan(protocol33.enumerate_protocol(args.D), args.r)
    return extension.rule_to_json(rule)


def cmd_galois(args) -> str:
    rule = extension.build_galois(protocol33.enumerate_protocol(args.D), args.r)
    return extension.rule_to_json(rule)


def cmd_recommend(args) -> str:
    q = _tally(args.tally)
    if args.pending is not None:
        pend = [int(x) for x in _floats(args.pending)]
        if len(pend) != q.D or any(p < 0 for p in pend):
            raise UsageError("--pending needs one non-negative count per dose")
        q = pessimize(EnrolledState(q, tuple(pend)))
    rule = extension.build_rule(args.rule, protocol33.enumerate_protocol(q.D), args.r)
    return f"{rule(q)}\n"


def cmd_exact33(args) -> str:
    if args.probs is not None:
        p = _floats(args.probs)
        if len(p) != args.D:
            raise UsageError(f"--probs needs {args.D} values")
    else:
        if args.sd <= 0:
            raise UsageError("--sd must be positive")
        p = simulator.tox_probabilities(args.D, args.mean, args.sd)
    probs = protocol33.outcome_probabilities(args.D, p)
    header = [f"rec{d}" for d in range(args.D + 1)]
    if args.format == "json":
        return _json({"p": p, "rec_probs": dict(zip(header, probs))})
    return _csv(header, [[_fmt(x) for x in probs]])


def _sim_settings(args) -> Dict[str, object]:
    settings = dict(SIM_DEFAULTS)
    if args.config:
        settings.update(load_config(args.config))
    for key in SIM_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def cmd_simulate(args) -> str:
    s = _sim_settings(args)
    if s["format"] not in ("csv", "json"):
        raise UsageError(f"unknown format {s['format']!r}")
    scenario = simulator.Scenario(
        D=s["D"], mtd_mean=s["mean"], mtd_sd=s["sd"], arrival_rate=s["rate"],
        n_participants=s["n"], titr_wait=s["titr_wait"], horizon=s["horizon"], reps=s["reps"],
        seed=s["seed"], pessimize_titrations=s["pessimize_titrations"],
    )
    rule = extension.build_rule(s["rule"], protocol33.enumerate_protocol(scenario.D), s["r"])
    if s["events"]:
        with open(s["events"], "w") as fh:
            for i, res in enumerate(simulator.iter_trials(scenario, rule)):
                for e in res.events:
                    fh.write(json.dumps(dict(rep=i, **e)) + "\n")
    summary = simulator.replicate(scenario, rule, jobs=s["jobs"])
    if s["format"] == "json":
        text = _json({
            "rule": s["rule"], "r": s["r"],
            "rec_freq": list(summary.rec_freq), "mean_tox": summary.mean_tox,
            "mean_titrations": summary.mean_titrations,
            "reps": summary.reps, "seed": summary.seed,
        })
    else:
        text = summary.to_csv()
    if s["output"]:
        with open(s["output"], "w") as fh:
            fh.write(text)
        return ""
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doseorder",
        description="Evident-safety orders, the 3+3 protocol and its Kan/Galois extensions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_D(p, default=None):
        if default is None:
            p.add_argument("D", type=int, help="number of dose levels")
        else:
            p.add_argument("D", type=int, nargs="?", default=default,
                           help=f"number of dose levels (default {default})")

    def with_r(p):
        p.add_argument("--r", type=int, default=order.DEFAULT_R,
                       help="balance strength r >= 1 (default %(default)s)")

    def with_format(p):
        p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("paths", help="enumerate 3+3 cohort paths")
    with_D(p)
    with_format(p)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("tallies", help="accessible 3+3 tallies with recommendations")
    with_D(p)
    with_r(p)
    with_format(p)
    p.add_argument("--rectified", action="store_true", help="add the rectified column")
    p.set_defaults(func=cmd_tallies)

    p = sub.add_parser("hasse", help="Hasse diagram of accessible tallies as DOT")
    with_D(p)
    with_r(p)
    p.add_argument("--rectified", action="store_true",
                   help="label nodes with rectified recommendations")
    p.set_defaults(func=cmd_hasse)

    p = sub.add_parser("audit", help="pairs a < b whose 3+3 recommendation decreases")
    with_D(p)
    with_r(p)
    with_format(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("fibers", help="fiber maxima of the Kan rule (JSON)")
    with_D(p)
    with_r(p)
    p.set_defaults(func=cmd_fibers)

    p = sub.add_parser("galois", help="threshold chain of the lower-Galois rule (JSON)")
    with_D(p)
    with_r(p)
    p.set_defaults(func=cmd_galois)

    p = sub.add_parser("recommend", help="dose recommendation for a tally")
    p.add_argument("rule", choices=["kan", "galois"])
    with_r(p)
    p.add_argument("--tally", required=True, help='e.g. "0/3 0/6 0/0"')
    p.add_argument("--pending", help='pending assessments per dose, e.g. "1 0 0"')
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("exact33", help="exact 3+3 recommendation probabilities")
    with_D(p)
    with_format(p)
    p.add_argument("--mean", type=float, default=3.0, help="MTD mean on dose-level scale")
    p.add_argument("--sd", type=float, default=DEFAULT_SD, help="MTD sd on dose-level scale")
    p.add_argument("--probs", help="explicit per-dose toxicity probabilities")
    p.set_defaults(func=cmd_exact33)

    p = sub.add_parser("simulate", help="Monte-Carlo rolling-enrollment trials")
    p.add_argument("--config", help="flat 'key = value' file; flags override it")
    p.add_argument("--D", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--rule", choices=["kan", "galois"])
    p.add_argument("--mean", type=float)
    p.add_argument("--sd", type=float)
    p.add_argument("--rate", type=float, help="arrivals per assessment period")
    p.add_argument("--n", type=int, help="number of arrivals")
    p.add_argument("--titr-wait", dest="titr_wait", type=float)
    p.add_argument("--horizon", type=float,
                   help="no titration is given at or after this time")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--output", help="write summary here instead of stdout")
    p.add_argument("--events", help="write per-event JSON lines for every replicate")
    p.add_argument("--pessimize-titrations", dest="pessimize_titrations",
                   action="store_const", const=True,
                   help="also count scheduled titrations as pending toxicities")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        out = args.func(args)
    except (UsageError, ValueError, KeyError, OSError) as exc:
        print(f"doseorder: error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
