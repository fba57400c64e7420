"""Command-line interface.

Exit status: 0 on success, 1 when a scenario misses its ``expected`` block or
an oracle disagrees, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys

from .coevents import enumerate_primitives
from .deduction import BUILTIN_PROOFS, PROFILES, check_proof, load_proof, semantic_crosscheck
from .errors import QuantalError
from .measure import enumerate_precluded, mu
from .scenarios import (
    BUILTIN_SCENARIOS,
    classify,
    fmt_value,
    load_scenario,
    render_text,
    run_scenario,
    separability,
    to_json,
    write_mu_table,
)

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2


def _braces(labels) -> str:
    return "{" + ",".join(labels) + "}"


def _parse_event(space, text: str):
    labels = [t.strip() for t in text.split(",") if t.strip()]
    return space.event(labels)


def cmd_run(args) -> int:
    s = load_scenario(args.scenario)
    report = run_scenario(s, oracle=True if args.oracle else None, workers=args.workers, timing=args.timing)
    print(to_json(report) if args.report == "json" else render_text(report))
    if args.mu_table:
        rows = write_mu_table(s, args.mu_table)
        print(f"wrote {rows} rows to {args.mu_table}", file=sys.stderr)
    if args.figures:
        from .plotting import write_figures

        for p in write_figures(report, args.figures):
            print(f"wrote {p}", file=sys.stderr)
    ok = report["expectations"]["ok"] and report["oracle"]["agrees"] is not False
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_mu(args) -> int:
    s = load_scenario(args.scenario)
    e = _parse_event(s.space, args.event)
    print(fmt_value(mu(s.measure, e)))
    return EXIT_OK


def cmd_preclusions(args) -> int:
    s = load_scenario(args.scenario)
    nulls = enumerate_precluded(s.measure, workers=args.workers)
    if args.json:
        print(json.dumps({
            "precluded": [list(e.members) for e in nulls.precluded],
            "maximal": [list(e.members) for e in nulls.maximal],
        }, indent=2))
        return EXIT_OK
    print(f"{len(nulls.precluded_masks)} precluded events")
    for e in nulls.precluded:
        print(("* " if e.mask in nulls.maximal_masks else "  ") + e.label())
    return EXIT_OK


def cmd_primitives(args) -> int:
    s = load_scenario(args.scenario)
    prims = enumerate_primitives(enumerate_precluded(s.measure, workers=args.workers), workers=args.workers)
    if args.json:
        print(json.dumps([list(p.support.members) for p in prims], indent=2))
        return EXIT_OK
    print(f"{len(prims)} primitive coevents")
    for p in prims:
        print(f"  {p.support.label()}*")
    return EXIT_OK


def cmd_classify(args) -> int:
    s = load_scenario(args.scenario)
    out = classify(s, args.partition)
    print(f"partition {args.partition}: blocks " + " ".join(_braces(b) for b in out["blocks"]))
    for r in out["results"]:
        if r["classical"]:
            print(f"  {_braces(r['support'])}*  classical (inside {_braces(r['block'])})")
        else:
            print(f"  {_braces(r['support'])}*  not classical (witness {_braces(r['witness'])})")
    return EXIT_OK


def cmd_separability(args) -> int:
    s = load_scenario(args.scenario)
    out = separability(s, args.bipartition)
    t1 = out["theorem1_condition"]
    print(f"bipartition {args.bipartition}: " + " | ".join(_braces(x) for x in out["sides"]))
    print(f"  bipartition condition: {t1['passed']}" + ("" if t1["passed"] else f" (witness {_braces(t1['witness'][0])})"))
    for k, t2 in enumerate(out["theorem2_condition"], 1):
        extra = "" if t2["passed"] else f" (witness {_braces(t2['witness'][0])})"
        print(f"  local condition, side {k}: {t2['passed']}{extra}")
    sep = out["separable"]
    extra = "" if sep["passed"] else " straddling: " + " ".join(_braces(w) for w in sep["witness"])
    print(f"  every primitive inside one side: {sep['passed']}{extra}")
    return EXIT_OK


def cmd_deduce(args) -> int:
    proof = load_proof(args.proof)
    verdict = check_proof(proof, PROFILES[args.profile])
    print(verdict)
    if args.crosscheck:
        s = load_scenario(args.crosscheck)
        nulls = enumerate_precluded(s.measure)
        for row in semantic_crosscheck(proof, nulls):
            print(f"  {row.source:>7}: {row.judgment}  satisfied by {row.satisfied} of {row.total} primitives")
    return EXIT_OK


def cmd_scenario_list(args) -> int:
    for name in BUILTIN_SCENARIOS:
        print(name)
    for name in BUILTIN_PROOFS:
        print(f"{name} (proof)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quantal", description="Quantal measures, preclusion and primitive coevents.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full analysis of a scenario")
    p.add_argument("scenario", help="built-in scenario name or path to a scenario JSON file")
    p.add_argument("--report", choices=("text", "json"), default="text")
    p.add_argument("--oracle", action="store_true", help="also cross-check against brute-force oracles")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="include wall-clock timings (not deterministic)")
    p.add_argument("--mu-table", metavar="PATH", help="write the full mu table as CSV")
    p.add_argument("--figures", metavar="DIR", help="write PNG figures into DIR")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("mu", help="quantal measure of one event")
    p.add_argument("scenario")
    p.add_argument("--event", required=True, help="comma-separated history labels (empty for the empty event)")
    p.set_defaults(func=cmd_mu)

    for name, func, helptext in (
        ("preclusions", cmd_preclusions, "list precluded events (* marks maximal ones)"),
        ("primitives", cmd_primitives, "list primitive coevents"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("scenario")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--json", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("classify", help="restrict primitives to a partition subalgebra")
    p.add_argument("scenario")
    p.add_argument("--partition", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("separability", help="check the separability conditions for a bipartition")
    p.add_argument("scenario")
    p.add_argument("--bipartition", required=True)
    p.set_defaults(func=cmd_separability)

    p = sub.add_parser("deduce", help="check a proof file under an inference profile")
    p.add_argument("proof", help="built-in proof name or path to a proof JSON file")
    p.add_argument("--profile", choices=sorted(PROFILES), default="classical")
    p.add_argument("--crosscheck", metavar="SCENARIO", help="count primitives satisfying each judgment")
    p.set_defaults(func=cmd_deduce)

    p = sub.add_parser("scenario", help="built-in scenario library")
    ssub = p.add_subparsers(dest="scenario_command", required=True)
    ssub.add_parser("list", help="list built-in scenarios and proofs").set_defaults(func=cmd_scenario_list)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except QuantalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
