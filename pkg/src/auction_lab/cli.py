"""``auction-lab`` command line.

Exit codes: 0 success, 2 bad configuration, 3 infeasible parameters
(unbounded hazard ratio or degenerate distribution), 4 protocol rejection
during replay, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

import jsonschema

from .distributions import DISTRIBUTION_SCHEMA, distribution_from_dict
from .errors import AuctionLabError, ConfigError, DegenerateDistribution, UnboundedHazard
from .oplog import ReplayError, loads_records, replay
from .params import break_even_lock, fee_alpha, lock_bound_asymptotic, lock_bound_exact
from .properties import DiscreteInstance, impossibility_experiment
from .simulation import (
    SIM_CONFIG_SCHEMA,
    SimConfig,
    best_fake_set_search,
    enumerate_fake_sets,
    repeated_auction_utility,
    run,
)
from .textio import dumps_json, fmt

log = logging.getLogger("auction_lab")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_PROTOCOL = 4

PARAMS_FIELDS = ("n", "L_exact", "L_asymptotic", "argmax_s", "break_even_lock", "alpha", "e_b1", "e_b2", "gap")
ATTACK_FIELDS = ("set", "size", "utility")
REPEATED_FIELDS = ("n", "alpha", "epsilon", "replications", "honest_mean", "honest_ci", "attack_mean", "attack_ci", "diff_mean", "diff_ci", "honest_wins")

PARAMS_SCHEMA = {
    "type": "object",
    "properties": {"dist": DISTRIBUTION_SCHEMA, "n": {"type": "integer", "minimum": 2}},
    "required": ["dist", "n"],
    "additionalProperties": False,
}

ATTACK_SCHEMA = {
    "type": "object",
    "properties": {
        "dist": DISTRIBUTION_SCHEMA,
        "n": {"type": "integer", "minimum": 1},
        "lock": {"oneOf": [{"type": "number", "minimum": 0}, {"enum": ["exact", "break_even"]}]},
        "grid": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "max_size": {"type": "integer", "minimum": 0},
    },
    "required": ["dist", "n", "lock", "grid", "max_size"],
    "additionalProperties": False,
}

REPEATED_SCHEMA = {
    "type": "object",
    "properties": {
        "dist": DISTRIBUTION_SCHEMA,
        "n": {"type": "integer", "minimum": 2},
        "alpha": {"oneOf": [{"type": "number", "minimum": 0, "exclusiveMaximum": 1}, {"const": "auto"}]},
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "lock": {"type": "number", "minimum": 0},
        "replications": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["dist", "n", "alpha", "epsilon", "replications"],
    "additionalProperties": False,
}

IMPOSSIBILITY_SCHEMA = {
    "type": "object",
    "properties": {
        "bid_grid": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "n": {"type": "integer"},
        "max_fake_bids": {"type": "integer"},
        "max_coalition_extra_bids": {"type": "integer"},
        "random_count": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["bid_grid", "n"],
    "additionalProperties": False,
}

# shipped as docs/schemas/<name>.json; a test keeps the files in sync
CONFIG_SCHEMAS = {
    "distribution": DISTRIBUTION_SCHEMA,
    "params": PARAMS_SCHEMA,
    "simulate": SIM_CONFIG_SCHEMA,
    "attack": ATTACK_SCHEMA,
    "repeated": REPEATED_SCHEMA,
    "impossibility": IMPOSSIBILITY_SCHEMA,
}


def _load_config(path: Optional[str], schema: dict) -> dict:
    if path is None:
        raise ConfigError("--config is required")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    try:
        jsonschema.validate(spec, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: invalid at {where}: {exc.message}") from None
    return spec


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------


def cmd_params(args) -> int:
    if args.config:
        spec = _load_config(args.config, PARAMS_SCHEMA)
        dist_spec, n = spec["dist"], spec["n"]
    else:
        if args.dist is None or args.n is None:
            raise ConfigError("params needs --config or both --dist and --n")
        try:
            dist_spec = json.loads(args.dist)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--dist is not valid JSON: {exc}") from None
        n = args.n
        if n < 2:
            raise ConfigError("n must be >= 2")
    dist = distribution_from_dict(dist_spec)
    asymptotic = lock_bound_asymptotic(dist, n)
    lock = lock_bound_exact(dist, n)
    fee = fee_alpha(dist, n)
    result = {
        "n": n,
        "L_exact": lock.L_exact,
        "L_asymptotic": asymptotic,
        "argmax_s": lock.argmax_s,
        "break_even_lock": break_even_lock(dist, n).value,
        "alpha": fee.alpha,
        "e_b1": fee.e_b1,
        "e_b2": fee.e_b2,
        "gap": fee.gap,
    }
    if args.format == "csv":
        _emit(_csv(PARAMS_FIELDS, [[result[k] for k in PARAMS_FIELDS]]), args.out)
    else:
        _emit(dumps_json(result), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = _load_config(args.config, {"type": "object"})
    if args.seed is not None:
        spec["master_seed"] = args.seed
    config = SimConfig.from_dict(spec)
    log.info("simulating %d replications of %s", config.replications, config.strategy.kind)
    report = run(config, workers=args.threads)
    _emit(report.to_csv() if args.format == "csv" else report.to_json(), args.out)
    return EXIT_OK


def _resolve_lock(dist, n, lock) -> float:
    if lock == "exact":
        return lock_bound_exact(dist, n).L_exact
    if lock == "break_even":
        return break_even_lock(dist, n).value
    return float(lock)


def cmd_attack(args) -> int:
    spec = _load_config(args.config, ATTACK_SCHEMA)
    dist = distribution_from_dict(spec["dist"])
    n = spec["n"]
    L = _resolve_lock(dist, n, spec["lock"])
    table = enumerate_fake_sets(dist, n, L, spec["grid"], spec["max_size"])
    best, best_u = best_fake_set_search(dist, n, L, spec["grid"], spec["max_size"])
    singles = {k: v for k, v in table.items() if len(k) == 1}
    best_single = max(singles, key=singles.__getitem__) if singles else ()
    if args.format == "csv":
        rows = [[" ".join(f"{s:.12g}" for s in k), len(k), v] for k, v in table.items()]
        _emit(_csv(ATTACK_FIELDS, rows), args.out)
    else:
        out = {
            "n": n,
            "lock": L,
            "best_set": list(best),
            "best_utility": best_u,
            "best_singleton": list(best_single),
            "best_singleton_utility": singles.get(best_single, 0.0),
            "any_profitable": best_u > 0,
            "singleton_profitable": any(v > 0 for v in singles.values()),
        }
        _emit(dumps_json(out), args.out)
    return EXIT_OK


def cmd_repeated(args) -> int:
    spec = _load_config(args.config, REPEATED_SCHEMA)
    dist = distribution_from_dict(spec["dist"])
    n = spec["n"]
    alpha = fee_alpha(dist, n).alpha if spec["alpha"] == "auto" else float(spec["alpha"])
    seed = args.seed if args.seed is not None else spec.get("seed", 0)
    res = repeated_auction_utility(
        dist, n, alpha, spec["epsilon"], spec["replications"], seed, lock=spec.get("lock", 0.0), workers=args.threads
    )
    out = {"n": n, "alpha": alpha, "epsilon": spec["epsilon"], **res.to_dict()}
    out["honest_wins"] = res.honest_mean >= res.attack_mean - 2 * res.diff_ci
    if args.format == "csv":
        _emit(_csv(REPEATED_FIELDS, [[out[k] for k in REPEATED_FIELDS]]), args.out)
    else:
        _emit(dumps_json(out), args.out)
    return EXIT_OK


def cmd_impossibility(args) -> int:
    spec = _load_config(args.config, IMPOSSIBILITY_SCHEMA)
    try:
        instance = DiscreteInstance(
            tuple(spec["bid_grid"]),
            spec["n"],
            spec.get("max_fake_bids", 2),
            spec.get("max_coalition_extra_bids", 2),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    seed = args.seed if args.seed is not None else spec.get("seed", 0)
    report = impossibility_experiment(instance, random_count=spec.get("random_count", 100), seed=seed)
    if args.format == "csv":
        _emit(report.to_csv(), args.out)
    elif args.format == "json":
        rows = [
            {
                "mechanism": r.mechanism,
                "bidder_ic": r.bidder_ic,
                "seller_ic": r.seller_ic,
                "oca_proof": r.oca_proof,
                "max_seller_revenue": r.max_seller_revenue,
            }
            for r in report.rows
        ]
        _emit(dumps_json({"note": report.header(), "rows": rows, "dichotomy_holds": report.dichotomy_holds}), args.out)
    else:
        _emit(report.to_table(), args.out)
    return EXIT_OK


def cmd_replay(args) -> int:
    path = args.log or args.config
    if path is None:
        raise ConfigError("replay needs a log file")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    lines = text.splitlines()
    try:
        session = replay(loads_records(text))
    except ReplayError as exc:
        offending = _nth_record_line(lines, exc.line_no)
        sys.stderr.write(f"rejected at record {exc.line_no}: {offending}\n{type(exc.cause).__name__}: {exc.cause}\n")
        return EXIT_PROTOCOL
    _emit(json.dumps(session.state(), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def _nth_record_line(lines, k: int) -> str:
    records = [ln for ln in lines if ln.strip()]
    return records[k - 1] if 0 < k <= len(records) else ""


COMMANDS = {
    "params": cmd_params,
    "simulate": cmd_simulate,
    "attack": cmd_attack,
    "repeated": cmd_repeated,
    "impossibility": cmd_impossibility,
    "replay": cmd_replay,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON configuration file")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, metavar="U64", help="override the configured seed")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads for replications")

    parser = argparse.ArgumentParser(prog="auction-lab", description="Commit-reveal NFT auction laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("params", parents=[common], help="lock amount and fee coefficient for (dist, n)")
    p.add_argument("--dist", help='distribution as JSON, e.g. \'{"kind":"uniform","a":0,"b":1}\'')
    p.add_argument("--n", type=int, help="number of bidders")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo run of a seller strategy")
    sub.add_parser("attack", parents=[common], help="closed-form fake-bid set search")
    sub.add_parser("repeated", parents=[common], help="honest versus buy-back-and-relist seller")
    imp = sub.add_parser("impossibility", parents=[common], help="brute-force incentive checks over mechanisms")
    imp.add_argument("--table", dest="format", action="store_const", const="table", help="human-readable table")
    r = sub.add_parser("replay", parents=[common], help="replay an operation log and dump the final state")
    r.add_argument("log", nargs="?", help="line-delimited JSON operation log")
    return parser


def _configure_logging() -> None:
    level = os.environ.get("AUCTION_LAB_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[list[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.threads < 1:
        sys.stderr.write("error: --threads must be >= 1\n")
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except UnboundedHazard as exc:
        sys.stderr.write(f"infeasible: {exc}; the protocol needs sup (1 - F(s)) / f(s) < infinity\n")
        return EXIT_INFEASIBLE
    except DegenerateDistribution as exc:
        sys.stderr.write(f"infeasible: {exc}\n")
        return EXIT_INFEASIBLE
    except AuctionLabError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
