"""Command line interface.

Usage::

    pbfair validate FILE_OR_DIR... [--lenient]
    pbfair tally FILE --rule mes-add1u [--out json|csv] [--tiebreak cost_asc]
    pbfair compare [FILE_OR_DIR...] [--rules greedy,mes-add1u] [--out json|csv] [--output-dir DIR]
    pbfair simulate FILE --abstention 0.1,0.3 --representation 0,0.5,1 \\
        [--predictor noisy_copy] [--bias 0.3] [--seeds 20] [--output grid.csv]

Exit status: 0 success, 1 domain failure (a file does not parse, a rule
fails), 2 I/O or usage error. ``compare`` falls back to the directory in
``$PBFAIR_CORPUS`` when no path is given.

Every JSON document carries ``schema_version`` and a ``manifest``: tool
version, SHA-256 of each input, rule configuration, seeds and a timestamp.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from pbfair import __version__
from pbfair.abstention import GRID_COLUMNS, InvalidConfig, PredictorConfig, read_imputation_csv, run_grid
from pbfair.metrics import compare_rules, corpus_summary
from pbfair.pabulib import PabulibError, parse_election_report
from pbfair.rules import DEFAULT_TIEBREAK, RULES, TIEBREAKS

SCHEMA_VERSION = 1
CORPUS_ENV = "PBFAIR_CORPUS"

TALLY_CSV_COLUMNS = ("rule", "rank", "project_id", "cost", "key", "phase", "spend", "budget")
COMPARE_CSV_COLUMNS = (
    "election",
    "rule",
    "winner_count",
    "spend",
    "budget",
    "budget_utilization",
    "voter_satisfaction",
    "point_representation",
    "mean_winner_cost_share",
    "district_covered_fraction",
    "district_entropy",
    "error",
)
SUMMARY_CSV_COLUMNS = (
    "baseline",
    "fair",
    "elections",
    "skipped",
    "mean_winner_count_ratio",
    "mean_satisfaction_delta",
    "mean_representation_delta_absolute",
    "mean_representation_delta_relative",
    "mean_cost_share_delta",
)


class UsageError(Exception):
    pass


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest(inputs, config, seeds=()) -> dict:
    return {
        "tool": "pbfair",
        "version": __version__,
        "inputs": [{"path": str(p), "sha256": sha256_file(p)} for p in inputs],
        "config": config,
        "seeds": list(seeds),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def write_atomic(path, text) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def _emit(text, output, stdout):
    if output:
        write_atomic(output, text)
    else:
        stdout.write(text)


def _expand(paths):
    """Files as given; directories become their ``*.pb`` files, sorted."""
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(p.glob("*.pb"), key=lambda f: f.name))
        elif p.exists():
            out.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    return out


def _json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, default=_default) + "\n"


def _default(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return buf.getvalue()


def _load(path, mode="strict"):
    text = Path(path).read_text(encoding="utf-8")
    return parse_election_report(text, mode)


def _rule_list(raw):
    rules = [r.strip() for r in raw.split(",") if r.strip()]
    unknown = [r for r in rules if r not in RULES]
    if unknown:
        raise UsageError(f"unknown rule(s) {unknown}; choose from {sorted(RULES)}")
    return rules


def _float_list(raw, what):
    try:
        values = [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--{what}: expected comma-separated numbers, got {raw!r}") from None
    if not values:
        raise UsageError(f"--{what}: at least one value required")
    bad = [v for v in values if not 0.0 <= v <= 1.0]
    if bad:
        raise UsageError(f"--{what}: values {bad} outside [0, 1]")
    return values


def _rule_options(args, rules):
    opts = {}
    for r in rules:
        o = {"tiebreak": args.tiebreak}
        if r == "mes":
            o["base"] = args.base
        if r == "mes-add1u":
            o["search"] = args.search
        opts[r] = o
    return opts


def cmd_validate(args, stdout, stderr) -> int:
    try:
        files = _expand(args.paths)
    except FileNotFoundError as exc:
        stderr.write(f"error: {exc}\n")
        return 2
    mode = "lenient" if args.lenient else "strict"
    failed = False
    for f in files:
        try:
            _, issues = _load(f, mode)
        except PabulibError as exc:
            failed = True
            line = exc.line if exc.line is not None else "-"
            stdout.write(f"{f}:{line}: {type(exc).__name__}: {exc.message}\n")
            continue
        except (OSError, UnicodeDecodeError) as exc:
            stderr.write(f"error: {f}: {exc}\n")
            return 2
        for issue in issues:
            line = issue.line if issue.line is not None else "-"
            stdout.write(f"{f}:{line}: warning: {issue.message}\n")
    return 1 if failed else 0


def cmd_tally(args, stdout, stderr) -> int:
    path = Path(args.path)
    if not path.exists():
        stderr.write(f"error: no such file: {path}\n")
        return 2
    try:
        election, _ = _load(path)
    except PabulibError as exc:
        stderr.write(f"{path}:{exc.line if exc.line is not None else '-'}: {exc.message}\n")
        return 1
    opts = _rule_options(args, [args.rule])[args.rule]
    try:
        outcome = RULES[args.rule](election, **opts)
    except ValueError as exc:
        stderr.write(f"error: {args.rule}: {exc}\n")
        return 1
    costs = {p.id: p.cost for p in election.projects}
    rows = [
        {
            "id": s.project,
            "cost": costs[s.project],
            "key": outcome.to_dict()["audit"][k]["key"],
            "phase": s.phase,
        }
        for k, s in enumerate(outcome.audit)
    ]
    if args.out == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "manifest": manifest([path], {"rule": args.rule, **opts}),
            "rule": args.rule,
            "winners": rows,
            "spend": outcome.spend,
            "budget": outcome.budget,
            "budget_utilization": outcome.spend / outcome.budget,
            "endowment_used": outcome.to_dict()["endowment_used"],
        }
        _emit(_json(doc), args.output, stdout)
    else:
        csv_rows = [
            {
                "rule": args.rule,
                "rank": k + 1,
                "project_id": r["id"],
                "cost": r["cost"],
                "key": r["key"],
                "phase": r["phase"],
                "spend": outcome.spend,
                "budget": outcome.budget,
            }
            for k, r in enumerate(rows)
        ]
        _emit(_csv(TALLY_CSV_COLUMNS, csv_rows), args.output, stdout)
    return 0


def _compare_rows(report):
    rows = []
    for r in report.rules:
        dc = r.district_coverage
        rows.append(
            {
                "election": report.election,
                "rule": r.label,
                "winner_count": r.winner_count,
                "spend": r.spend,
                "budget": report.budget,
                "budget_utilization": r.budget_utilization,
                "voter_satisfaction": r.voter_satisfaction,
                "point_representation": r.point_representation,
                "mean_winner_cost_share": r.mean_winner_cost_share,
                "district_covered_fraction": dc.covered_fraction if dc and dc.available else None,
                "district_entropy": dc.entropy if dc and dc.available else None,
                "error": r.error,
            }
        )
    return rows


def cmd_compare(args, stdout, stderr) -> int:
    paths = args.paths or ([os.environ[CORPUS_ENV]] if os.environ.get(CORPUS_ENV) else [])
    if not paths:
        stderr.write(f"error: no input given and ${CORPUS_ENV} is not set\n")
        return 2
    try:
        files = _expand(paths)
        rules = _rule_list(args.rules)
    except FileNotFoundError as exc:
        stderr.write(f"error: {exc}\n")
        return 2
    if len(rules) < 2:
        stderr.write("error: --rules needs at least two rules\n")
        return 2
    opts = _rule_options(args, rules)
    reports, errors = [], []
    for f in files:
        try:
            election, _ = _load(f, "lenient" if args.lenient else "strict")
        except (PabulibError, UnicodeDecodeError) as exc:
            errors.append({"file": f.name, "error": f"{type(exc).__name__}: {exc}"})
            continue
        reports.append(compare_rules(election, rules, opts, name=f.stem))
    baseline, fair = rules[0], rules[1]
    summary = corpus_summary(reports, baseline, fair)
    man = manifest(files, {"rules": rules, "options": opts})

    if args.output_dir:
        out = Path(args.output_dir)
        for rep in reports:
            if args.out == "json":
                doc = {"schema_version": SCHEMA_VERSION, "manifest": man, "report": rep.to_dict()}
                write_atomic(out / f"{rep.election}.json", _json(doc))
            else:
                write_atomic(out / f"{rep.election}.csv", _csv(COMPARE_CSV_COLUMNS, _compare_rows(rep)))
        if args.out == "json":
            doc = {"schema_version": SCHEMA_VERSION, "manifest": man, "summary": summary, "errors": errors}
            write_atomic(out / "summary.json", _json(doc))
        else:
            write_atomic(out / "summary.csv", _csv(SUMMARY_CSV_COLUMNS, [summary]))
            write_atomic(out / "manifest.json", _json({"schema_version": SCHEMA_VERSION, "manifest": man}))
    elif args.out == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "manifest": man,
            "reports": [r.to_dict() for r in reports],
            "summary": summary,
            "errors": errors,
        }
        stdout.write(_json(doc))
    else:
        rows = [row for rep in reports for row in _compare_rows(rep)]
        stdout.write(_csv(COMPARE_CSV_COLUMNS, rows))
        stdout.write("\n")
        stdout.write(_csv(SUMMARY_CSV_COLUMNS, [summary]))
    for e in errors:
        stderr.write(f"{e['file']}: {e['error']}\n")
    return 1 if errors and not reports else 0


def cmd_simulate(args, stdout, stderr) -> int:
    path = Path(args.path)
    if not path.exists():
        stderr.write(f"error: no such file: {path}\n")
        return 2
    abstention = _float_list(args.abstention, "abstention")
    representation = _float_list(args.representation, "representation")
    rules = _rule_list(args.rules)
    if args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    try:
        election, _ = _load(path)
    except PabulibError as exc:
        stderr.write(f"{path}:{exc.line if exc.line is not None else '-'}: {exc.message}\n")
        return 1
    replay = None
    inputs = [path]
    try:
        if args.predictor == "replay":
            if not args.replay:
                raise UsageError("--predictor replay needs --replay FILE")
            replay = read_imputation_csv(Path(args.replay).read_text(encoding="utf-8"), election)
            inputs.append(Path(args.replay))
        cfg = PredictorConfig(args.predictor, args.bias, replay=replay)
    except InvalidConfig as exc:
        raise UsageError(str(exc)) from None
    seeds = list(range(args.seed_base, args.seed_base + args.seeds))
    opts = _rule_options(args, rules)
    try:
        grid = run_grid(election, abstention, representation, cfg, seeds, rules, opts)
    except InvalidConfig as exc:
        raise UsageError(str(exc)) from None
    _emit(grid.to_csv(), args.output, stdout)
    man = manifest(
        inputs,
        {
            "rules": rules,
            "options": opts,
            "abstention": abstention,
            "representation": representation,
            "predictor": args.predictor,
            "bias": args.bias,
        },
        seeds,
    )
    side = {"schema_version": SCHEMA_VERSION, "manifest": man, "columns": list(GRID_COLUMNS)}
    if args.output:
        write_atomic(f"{args.output}.manifest.json", _json(side))
    else:
        stderr.write(_json(side))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbfair", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"pbfair {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def rule_flags(p):
        p.add_argument("--tiebreak", choices=TIEBREAKS, default=DEFAULT_TIEBREAK)
        p.add_argument("--base", choices=("exact", "floor"), default="exact", help="endowment of plain mes")
        p.add_argument("--search", choices=("fast", "linear"), default="fast", help="Add1 endowment search")

    p = sub.add_parser("validate", help="check that .pb files parse")
    p.add_argument("paths", nargs="+")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", action="store_true", default=True)
    mode.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("tally", help="run one rule on one election")
    p.add_argument("path")
    p.add_argument("--rule", choices=sorted(RULES), default="mes-add1u")
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="write here instead of stdout")
    rule_flags(p)
    p.set_defaults(func=cmd_tally)

    p = sub.add_parser("compare", help="compare rules on elections")
    p.add_argument("paths", nargs="*")
    p.add_argument("--rules", default="greedy,mes-add1u", help="comma-separated; first is the baseline")
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.add_argument("--output-dir")
    p.add_argument("--lenient", action="store_true")
    rule_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="abstention / imputation consistency grid")
    p.add_argument("path")
    p.add_argument("--abstention", default="0,0.1,0.2,0.3,0.4,0.5")
    p.add_argument("--representation", default="0,0.5,1")
    p.add_argument("--predictor", choices=("noisy_copy", "popularity_prior", "nearest_profile", "replay"),
                   default="noisy_copy")
    p.add_argument("--bias", type=float, default=0.3)
    p.add_argument("--replay", help="imputation CSV (voter_id,vote,points)")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--rules", default="greedy,mes-add1u")
    p.add_argument("--output", help="CSV path; the manifest goes to OUTPUT.manifest.json")
    rule_flags(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, stdout, stderr)
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return 2
    except OSError as exc:
        stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
