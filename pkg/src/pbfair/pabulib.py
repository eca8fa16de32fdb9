"""Reading and writing Pabulib ``.pb`` files.

The format is line oriented: three sections introduced by the lines
``META``, ``PROJECTS`` and ``VOTES``, each starting with a ``;``-separated
column header followed by ``;``-separated rows. ``VOTES.vote`` is a
comma-separated list of project ids, and the optional ``points`` column is a
comma-separated list of integers aligned with it.

Two parsing modes exist. ``strict`` raises on the first problem.
``lenient`` records a `ParseIssue`, drops the offending row, and carries on.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from decimal import ROUND_HALF_UP, Decimal, InvalidOperation
from pathlib import Path
from typing import NamedTuple, Optional

from pbfair.ballots import (
    VOTE_TYPES,
    ApprovalSet,
    Ballot,
    PointMap,
    Ranking,
    ScoreMap,
    validate_ballot,
)
from pbfair.election import INT_META_KEYS, STR_META_KEYS, Election, ElectionMeta, Project

SECTIONS = ("META", "PROJECTS", "VOTES")
MONEY_KEYS = ("budget",)
DEFAULT_COST_CAP = 10


class PabulibError(ValueError):
    """Base class of parse failures; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class MissingSection(PabulibError):
    pass


class MissingRequiredKey(PabulibError):
    pass


class MalformedRow(PabulibError):
    pass


class UnknownProjectRef(PabulibError):
    pass


class DuplicateVoterId(PabulibError):
    pass


class DuplicateProjectId(PabulibError):
    pass


class CountMismatch(PabulibError):
    pass


class FractionalAmount(PabulibError):
    pass


class InvalidBallot(PabulibError):
    pass


class ParseIssue(NamedTuple):
    line: Optional[int]
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}" if self.line is not None else self.message


class _Parser:
    def __init__(self, mode, cost_cap):
        if mode not in ("strict", "lenient"):
            raise ValueError(f"mode must be 'strict' or 'lenient', got {mode!r}")
        self.strict = mode == "strict"
        self.cost_cap = cost_cap
        self.issues = []

    def problem(self, exc_type, message, line):
        """Raise in strict mode, record otherwise."""
        if self.strict:
            raise exc_type(message, line)
        self.issues.append(ParseIssue(line, message))

    def amount(self, raw, what, line):
        s = raw.strip()
        if "," in s and "." not in s:
            s = s.replace(",", ".")
        try:
            value = Decimal(s)
        except InvalidOperation:
            raise MalformedRow(f"{what}: {raw!r} is not a number", line) from None
        if not value.is_finite():
            raise MalformedRow(f"{what}: {raw!r} is not a number", line)
        if value == value.to_integral_value():
            return int(value)
        self.problem(FractionalAmount, f"{what}: fractional amount {raw!r}", line)
        rounded = int(value.quantize(Decimal(1), rounding=ROUND_HALF_UP))
        return rounded

    def integer(self, raw, what, line):
        try:
            value = Decimal(raw.strip())
        except InvalidOperation:
            raise MalformedRow(f"{what}: {raw!r} is not an integer", line) from None
        if not value.is_finite() or value != value.to_integral_value():
            raise MalformedRow(f"{what}: {raw!r} is not an integer", line)
        return int(value)


def _split_sections(text):
    """Map section name -> list of (line number, row fields)."""
    sections = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if lineno == 1:
            line = line.lstrip("﻿")
        if not line.strip():
            continue
        head = line.strip().upper()
        if head in SECTIONS and ";" not in line:
            current = head
            sections[current] = (lineno, [])
            continue
        if current is None:
            raise MalformedRow("data before the first section header", lineno)
        row = next(csv.reader([line], delimiter=";"))
        sections[current][1].append((lineno, row))
    for name in SECTIONS:
        if name not in sections:
            raise MissingSection(f"no {name} section")
        if not sections[name][1]:
            raise MissingSection(f"{name} section has no column header", sections[name][0])
    return {k: v[1] for k, v in sections.items()}


def _parse_meta(p, rows):
    values = {}
    order = []
    for lineno, row in rows[1:]:
        if len(row) != 2:
            p.problem(MalformedRow, f"META row has {len(row)} columns, expected 2", lineno)
            continue
        key, raw = row[0].strip(), row[1]
        if key in values:
            p.problem(MalformedRow, f"duplicate META key {key!r}", lineno)
            continue
        values[key] = (lineno, raw)
        order.append(key)

    for key in ("budget", "vote_type"):
        if key not in values:
            raise MissingRequiredKey(f"META lacks required key {key!r}")

    kwargs = {}
    extra = {}
    for key in order:
        lineno, raw = values[key]
        if key in MONEY_KEYS:
            kwargs[key] = p.amount(raw, key, lineno)
        elif key in INT_META_KEYS:
            kwargs[key] = p.integer(raw, key, lineno)
        elif key in STR_META_KEYS:
            kwargs[key] = raw
        else:
            extra[key] = raw
    if kwargs["vote_type"] not in VOTE_TYPES:
        raise MalformedRow(
            f"unsupported vote_type {kwargs['vote_type']!r}", values["vote_type"][0]
        )
    try:
        return ElectionMeta(extra=extra, key_order=tuple(order), **kwargs)
    except ValueError as exc:
        raise MalformedRow(str(exc), rows[0][0]) from None


def _parse_projects(p, rows, budget):
    header_line, header = rows[0]
    header = [h.strip() for h in header]
    for col in ("project_id", "cost"):
        if col not in header:
            raise MalformedRow(f"PROJECTS header lacks column {col!r}", header_line)
    projects = []
    seen = set()
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            p.problem(
                MalformedRow,
                f"PROJECTS row has {len(row)} columns, expected {len(header)}",
                lineno,
            )
            continue
        rec = dict(zip(header, row))
        pid = rec["project_id"].strip()
        if pid in seen:
            p.problem(DuplicateProjectId, f"duplicate project id {pid!r}", lineno)
            continue
        cost = p.amount(rec["cost"], f"cost of project {pid!r}", lineno)
        if cost <= 0:
            p.problem(MalformedRow, f"project {pid!r} has non-positive cost {cost}", lineno)
            continue
        if p.cost_cap is not None and cost > p.cost_cap * budget:
            p.problem(
                MalformedRow,
                f"project {pid!r} costs {cost}, above {p.cost_cap} x budget",
                lineno,
            )
            continue
        seen.add(pid)
        district = rec.get("district") or None
        cats = rec.get("category", "")
        categories = tuple(c.strip() for c in cats.split(",") if c.strip())
        extra = {
            k: v
            for k, v in rec.items()
            if k not in ("project_id", "cost", "name", "district", "category")
        }
        projects.append(
            Project(pid, cost, name=rec.get("name"), district=district, categories=categories, extra=extra)
        )
    return tuple(header), projects


def _parse_votes(p, rows, vote_type, project_ids):
    header_line, header = rows[0]
    header = [h.strip() for h in header]
    for col in ("voter_id", "vote"):
        if col not in header:
            raise MalformedRow(f"VOTES header lacks column {col!r}", header_line)
    uses_points = vote_type in ("cumulative", "scoring")
    if uses_points and "points" not in header:
        raise MalformedRow(f"{vote_type} votes need a 'points' column", header_line)
    consumed = {"voter_id", "vote"} | ({"points"} if uses_points else set())

    ballots = []
    seen = set()
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            p.problem(
                MalformedRow,
                f"VOTES row has {len(row)} columns, expected {len(header)}",
                lineno,
            )
            continue
        rec = dict(zip(header, row))
        vid = rec["voter_id"].strip()
        if vid in seen:
            p.problem(DuplicateVoterId, f"duplicate voter id {vid!r}", lineno)
            continue
        ids = [x.strip() for x in rec["vote"].split(",") if x.strip()]
        unknown = [x for x in ids if x not in project_ids]
        if unknown:
            p.problem(UnknownProjectRef, f"voter {vid!r} votes for unknown project(s) {unknown}", lineno)
            continue
        if len(set(ids)) != len(ids):
            p.problem(MalformedRow, f"voter {vid!r} lists a project twice", lineno)
            continue
        if uses_points:
            raw_points = [x.strip() for x in rec["points"].split(",") if x.strip()]
            if len(raw_points) != len(ids):
                p.problem(
                    MalformedRow,
                    f"voter {vid!r}: {len(raw_points)} points for {len(ids)} projects",
                    lineno,
                )
                continue
            try:
                values = [p.integer(x, f"points of voter {vid!r}", lineno) for x in raw_points]
            except MalformedRow as exc:
                if p.strict:
                    raise
                p.issues.append(ParseIssue(lineno, exc.message))
                continue
            mapping = dict(zip(ids, values))
            content = PointMap(mapping) if vote_type == "cumulative" else ScoreMap(mapping)
        elif vote_type == "ordinal":
            content = Ranking(tuple(ids))
        else:
            content = ApprovalSet(tuple(ids))
        extra = {k: v for k, v in rec.items() if k not in consumed}
        seen.add(vid)
        ballots.append((lineno, Ballot(vid, content, extra)))
    return tuple(header), ballots


def parse_election_report(text: str, mode: str = "strict", cost_cap=DEFAULT_COST_CAP):
    """Parse ``.pb`` text, returning ``(election, issues)``.

    ``issues`` is always empty in strict mode, since strict parsing raises
    instead of recording.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    p = _Parser(mode, cost_cap)
    sections = _split_sections(text)
    meta = _parse_meta(p, sections["META"])
    pcols, projects = _parse_projects(p, sections["PROJECTS"], meta.budget)
    vcols, numbered = _parse_votes(p, sections["VOTES"], meta.vote_type, {x.id for x in projects})
    rules = meta.ballot_rules()

    ballots = []
    for lineno, b in numbered:
        violations = validate_ballot(b, rules)
        if violations:
            msgs = "; ".join(v.message for v in violations)
            p.problem(InvalidBallot, f"ballot of voter {b.voter_id!r} breaks the rules: {msgs}", lineno)
            continue
        ballots.append(b)

    for key, parsed in (("num_projects", len(projects)), ("num_votes", len(ballots))):
        declared = getattr(meta, key)
        if declared is not None and declared != parsed:
            p.problem(CountMismatch, f"META {key} is {declared} but {parsed} were parsed", None)
            setattr(meta, key, parsed)

    election = Election(meta, rules, projects, ballots, pcols, vcols)
    return election, p.issues


def parse_election(text: str, mode: str = "strict", cost_cap=DEFAULT_COST_CAP) -> Election:
    """Parse the contents of one ``.pb`` file into an `Election`."""
    return parse_election_report(text, mode, cost_cap)[0]


def read_election(path, mode: str = "strict") -> Election:
    return parse_election(Path(path).read_text(encoding="utf-8"), mode)


def _cell(value):
    return "" if value is None else str(value)


def serialize_election(election: Election) -> str:
    """Render an `Election` as ``.pb`` text (LF line endings)."""
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=";", lineterminator="\n")

    buf.write("META\n")
    w.writerow(["key", "value"])
    for key, value in election.meta.items():
        w.writerow([key, _cell(value)])

    buf.write("PROJECTS\n")
    w.writerow(election.project_columns)
    for proj in election.projects:
        row = []
        for col in election.project_columns:
            if col == "project_id":
                row.append(proj.id)
            elif col == "cost":
                row.append(str(proj.cost))
            elif col == "name":
                row.append(_cell(proj.name))
            elif col == "district":
                row.append(_cell(proj.district))
            elif col == "category":
                row.append(",".join(proj.categories))
            else:
                row.append(_cell(proj.extra.get(col)))
        w.writerow(row)

    buf.write("VOTES\n")
    w.writerow(election.vote_columns)
    for b in election.ballots:
        c = b.content
        row = []
        for col in election.vote_columns:
            if col == "voter_id":
                row.append(b.voter_id)
            elif col == "vote":
                row.append(",".join(c.ids()))
            elif col == "points" and isinstance(c, (PointMap, ScoreMap)):
                values = c.points.values() if isinstance(c, PointMap) else c.scores.values()
                row.append(",".join(str(v) for v in values))
            else:
                row.append(_cell(b.extra.get(col)))
        w.writerow(row)
    return buf.getvalue()


def write_election(election: Election, path) -> None:
    """Write atomically: temp file in the same directory, then rename."""
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    tmp.write_text(serialize_election(election), encoding="utf-8", newline="\n")
    os.replace(tmp, path)


class DirectoryLoad(NamedTuple):
    """Result of `load_directory`.

    ``entries`` holds ``(name, election, issues)`` for each file that parsed;
    ``errors`` holds ``(name, exception)`` for each file that did not.
    """

    entries: list
    errors: list

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def _load_one(path, mode):
    try:
        text = path.read_text(encoding="utf-8")
        election, issues = parse_election_report(text, mode)
    except (PabulibError, UnicodeDecodeError, OSError, ValueError) as exc:
        return path.name, None, exc
    return path.name, (election, issues), None


def load_directory(path, mode: str = "strict", workers: int = 1) -> DirectoryLoad:
    """Parse every ``*.pb`` file in ``path``, sorted by file name.

    Files that fail to parse are reported in ``errors``; the batch continues.
    ``workers > 1`` parses files concurrently; the output order is unaffected.
    """
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"no such directory: {root}")
    files = sorted(root.glob("*.pb"), key=lambda f: f.name)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda f: _load_one(f, mode), files))
    else:
        results = [_load_one(f, mode) for f in files]
    entries, errors = [], []
    for name, ok, exc in sorted(results, key=lambda r: r[0]):
        if exc is None:
            entries.append((name, ok[0], ok[1]))
        else:
            errors.append((name, exc))
    return DirectoryLoad(entries, errors)
