"""Command line front end.

Two subcommands:

    verify   run one (or all) of the randomized suites and write a report
    query    evaluate one operation on an instance file at a given point

Exit codes: 0 success, 1 a check failed or the math rejected the query
(infeasible fiber, domain violation, ...), 2 bad input (unreadable file,
malformed JSON or vector, unusable flag values).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import argmin as argmin_mod
from . import marginal as marginal_mod
from .errors import ConvexKitError
from .functions import evaluate, subdifferential
from .harness import RunConfig, run_suite
from .instances import domain_from_json, function_from_json
from .report import report_to_csv, report_to_json
from .restriction import restrict, restricted_subdifferential

SUITES = ("lemma1", "lemma2", "lemma3", "all")
QUERY_OPS = ("subdiff", "restricted-subdiff", "marginal", "argmin-member")


@dataclass
class CliConfig:
    command: str
    suite: str = "all"
    trials: int = 100
    dim: int = 6
    seed: int = 42
    tol_active: float = 1e-9
    tol_support: float = 1e-7
    tol_membership: float = 1e-6
    out: str | None = None
    format: str = "json"
    op: str | None = None
    instance: str | None = None
    x: str | None = None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convexkit",
        description="exact convexity checks for subdifferentials, marginals, and argmin sets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run randomized verification suites")
    verify.add_argument("--suite", choices=SUITES, default="all")
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--dim", type=int, default=6, help="largest ambient dimension drawn")
    verify.add_argument("--seed", type=int, default=42)
    verify.add_argument("--tol-active", type=float, default=1e-9, dest="tol_active")
    verify.add_argument("--tol-support", type=float, default=1e-7, dest="tol_support")
    verify.add_argument("--tol-membership", type=float, default=1e-6, dest="tol_membership")
    verify.add_argument("--out", default=None, help="report path (default report.json or report.csv)")
    verify.add_argument("--format", choices=("json", "csv"), default="json")

    query = sub.add_parser("query", help="evaluate one operation on an instance file")
    query.add_argument("op", choices=QUERY_OPS)
    query.add_argument("--instance", required=True, help="path to an instance JSON document")
    query.add_argument("--x", required=True, help="comma separated coordinates, empty for R^0")
    return parser


def parse_args(argv=None) -> CliConfig:
    ns = build_parser().parse_args(argv)
    return CliConfig(**vars(ns))


def _parse_vector(text: str) -> np.ndarray:
    text = text.strip()
    if not text:
        return np.zeros(0)
    try:
        return np.array([float(part) for part in text.split(",")])
    except ValueError as exc:
        raise ValueError(f"could not parse --x as comma separated floats: {exc}") from exc


def _load_instance(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("instance document must be a JSON object")
    return doc


def _verify(config: CliConfig) -> int:
    if config.trials < 0:
        print("error: --trials must be nonnegative", file=sys.stderr)
        return 2
    if config.dim < 2:
        print("error: --dim must be at least 2", file=sys.stderr)
        return 2
    run_config = RunConfig(
        trials=config.trials,
        dim=config.dim,
        seed=config.seed,
        tol_active=config.tol_active,
        tol_support=config.tol_support,
        tol_membership=config.tol_membership,
    )
    report = run_suite(config.suite, run_config)
    out = config.out or ("report.json" if config.format == "json" else "report.csv")
    text = report_to_json(report) if config.format == "json" else report_to_csv(report)
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: could not write report: {exc}", file=sys.stderr)
        return 2
    by_suite: dict[str, dict[str, int]] = {}
    for trial in report.trials:
        name = trial.instance.get("suite", report.suite)
        counts = by_suite.setdefault(name, {"pass": 0, "fail": 0, "skip": 0})
        counts[trial.status] += 1
    order = [s for s in ("lemma1", "lemma2", "lemma3") if s in by_suite] or [report.suite]
    for name in order:
        counts = by_suite.get(name, {"pass": 0, "fail": 0, "skip": 0})
        print(f"{name}: pass={counts['pass']} fail={counts['fail']} skip={counts['skip']}")
    print(f"report written to {out}")
    return 0 if report.all_passed else 1


def _run_query(config: CliConfig) -> dict:
    doc = _load_instance(config.instance)
    x = _parse_vector(config.x)
    if config.op == "subdiff":
        f = function_from_json(doc.get("f", doc))
        P = subdifferential(f, x)
        return {"generators": [[float(v) for v in g] for g in P.generators]}
    if config.op == "restricted-subdiff":
        f = function_from_json(doc["f"])
        g = restrict(f, doc["S"], doc["zeta"])
        P = restricted_subdifferential(g, x)
        return {"generators": [[float(v) for v in row] for row in P.generators]}
    if config.op == "marginal":
        inner = doc.get("marginal", doc)
        h = marginal_mod.marginalize(function_from_json(inner["f"]), inner["S"])
        witness = marginal_mod.marginal_value(h, x)
        return {
            "value": float(witness.value),
            "argmin": [float(v) for v in witness.argmin],
            "status": witness.status,
        }
    if config.op == "argmin-member":
        f = function_from_json(doc["f"])
        rows, radius = domain_from_json(doc["domain"])
        C = argmin_mod.PolyhedralDomain(f.dim, tuple(rows), radius)
        cert = argmin_mod.minimize_over(f, C)
        member = argmin_mod.argmin_membership(f, C, x, cert.value)
        return {
            "member": bool(member),
            "minimum": float(cert.value),
            "value": float(evaluate(f, x)),
            "tol": argmin_mod.DEFAULT_MEMBERSHIP_TOL,
        }
    raise ValueError(f"unknown query op: {config.op!r}")


def _query(config: CliConfig) -> int:
    try:
        result = _run_query(config)
    except (OSError, json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        print(f"error: bad instance or point: {exc}", file=sys.stderr)
        return 2
    except ConvexKitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(result, sort_keys=True, indent=2))
    return 0


def main(config: CliConfig) -> int:
    if config.command == "verify":
        return _verify(config)
    if config.command == "query":
        return _query(config)
    print(f"error: unknown command {config.command!r}", file=sys.stderr)
    return 2


def run(argv=None) -> None:
    sys.exit(main(parse_args(argv)))


if __name__ == "__main__":
    run()
