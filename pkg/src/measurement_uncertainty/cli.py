"""Command-line interface.

Exit codes: 0 when every asserted relation holds, 2 when one is violated,
1 on any input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys

from .linalg import SLACK_TOL
from .metrics import RELATION_NAMES, RelationReport, evaluate_scenario
from .scenario import (
    SWEEP_COLUMNS,
    ScenarioError,
    load_json,
    load_scenario,
    parse_sweep,
    sweep_record,
    sweep_rows,
)
from .search import FAMILIES, fuzz_relations, search_violation

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _dims(text: str):
    out = []
    for part in text.split(","):
        m = re.fullmatch(r"\s*(\d+)\s*x\s*(\d+)\s*", part)
        if not m:
            raise argparse.ArgumentTypeError(f"expected dSxdA, got {part!r}")
        out.append((int(m.group(1)), int(m.group(2))))
    return out


def _seed(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="uncertainty", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="evaluate every relation for one scenario file")
    c.add_argument("file")
    c.add_argument("--json", action="store_true", help="emit the report as JSON")

    s = sub.add_parser("sweep", help="evaluate a parameter grid and write CSV")
    s.add_argument("config")
    s.add_argument("--out", required=True)

    f = sub.add_parser("fuzz", help="fuzz the relations on random scenarios")
    f.add_argument("--count", type=int, required=True, help="scenarios per dimension pair")
    f.add_argument("--dims", type=_dims, action="append", required=True,
                   help="dSxdA, comma separated or repeated")
    f.add_argument("--seed", type=_seed, required=True)

    r = sub.add_parser("search", help="search a scenario family for the smallest slack")
    r.add_argument("--relation", required=True, choices=RELATION_NAMES)
    r.add_argument("--budget", type=int, required=True)
    r.add_argument("--seed", type=_seed, required=True)
    r.add_argument("--family", default="qubit", choices=sorted(FAMILIES))
    return p


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _render(report: RelationReport) -> str:
    lines = [
        f"epsilon = {report.epsilon:.12g}    eta = {report.eta:.12g}",
        f"sigma_a = {report.sigma_a:.12g}    sigma_b = {report.sigma_b:.12g}",
        f"bar_epsilon = {report.bar_epsilon:.12g}    bar_eta = {report.bar_eta:.12g}",
        "",
        f"{'relation':<18}{'lhs':>16}{'rhs':>16}{'slack':>16}  status",
    ]
    for rel in report.relations:
        status = "holds" if rel.holds else ("VIOLATED" if rel.asserted else "fails (not asserted)")
        lines.append(f"{rel.name:<18}{rel.lhs:>16.10g}{rel.rhs:>16.10g}{rel.slack:>16.10g}  {status}")
    return "\n".join(lines)


def cmd_check(args) -> int:
    report = evaluate_scenario(load_scenario(args.file))
    if args.json:
        _dump(report.to_dict())
    else:
        print(_render(report))
    return EXIT_VIOLATION if report.violations else EXIT_OK


def cmd_sweep(args) -> int:
    family, axes, base = parse_sweep(load_json(args.config), FAMILIES)
    violated = False
    rows = 0
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([name for name, _ in axes] + list(SWEEP_COLUMNS))
        for point, report in sweep_rows(family, axes, base, evaluate_scenario):
            writer.writerow([f"{v:.12g}" for v in (*point, *sweep_record(report))])
            violated = violated or bool(report.violations)
            rows += 1
    print(f"wrote {rows} rows to {args.out}", file=sys.stderr)
    return EXIT_VIOLATION if violated else EXIT_OK


def cmd_fuzz(args) -> int:
    if args.count < 1:
        raise ScenarioError("--count", "must be >= 1")
    dims = [d for group in args.dims for d in group]
    summary = fuzz_relations(dims, args.count, args.seed)
    _dump(summary.to_dict())
    return EXIT_VIOLATION if summary.failures else EXIT_OK


def cmd_search(args) -> int:
    if args.budget < 1:
        raise ScenarioError("--budget", "must be >= 1")
    family = FAMILIES[args.family]()
    result = search_violation(family, args.relation, args.budget, args.seed)
    _dump(result.to_dict(family))
    rel = result.best_report.relation(args.relation)
    violated = rel.asserted and result.objective_value < -SLACK_TOL
    return EXIT_VIOLATION if violated else EXIT_OK


COMMANDS = {"check": cmd_check, "sweep": cmd_sweep, "fuzz": cmd_fuzz, "search": cmd_search}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
