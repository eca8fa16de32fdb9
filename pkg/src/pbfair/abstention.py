"""Outcome consistency when voters abstain and abstainers are imputed.

A reference outcome is computed from every true ballot. In each scenario a
share of voters abstains. A share of those abstainers is represented by an
imputed ballot from a predictor, and the rest are dropped. The scenario
outcome is then compared with the reference.

Predictors are deterministic given a seed:

``noisy_copy``
    the abstainer's true ballot with each choice replaced, with probability
    ``bias``, by a project not on the ballot
``popularity_prior``
    a ballot drawn from the participants' aggregate support
``nearest_profile``
    the ballot of the most similar participant, judged by auxiliary VOTES
    columns (age, district, ...) when the election has them and by utility
    cosine against the true ballot otherwise
``replay``
    ballots read from an imputation file (`read_imputation_csv`)

``popularity_prior`` and ``nearest_profile`` also apply the ``bias``
perturbation on top of their draw.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Optional

import numpy as np

from pbfair.ballots import (
    ApprovalSet,
    Ballot,
    PointMap,
    Ranking,
    ScoreMap,
    ballot_utilities,
    validate_ballot,
)
from pbfair.rules import RULES, NoBallots

PREDICTORS = ("noisy_copy", "popularity_prior", "nearest_profile", "replay")
GRID_COLUMNS = (
    "rule",
    "abstention",
    "representation",
    "seed_count",
    "mean_jaccard",
    "sd_jaccard",
    "mean_preserved",
    "mean_recovered",
)


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class PredictorConfig:
    """How abstainers' ballots are imputed.

    ``profile_columns`` names the VOTES columns ``nearest_profile`` matches
    on; empty means every auxiliary column of the election. ``replay`` maps
    voter id -> `Ballot` for the ``replay`` kind.
    """

    kind: str = "noisy_copy"
    bias: float = 0.0
    profile_columns: tuple = ()
    replay: Optional[dict] = None

    def __post_init__(self):
        if self.kind not in PREDICTORS:
            raise InvalidConfig(f"unknown predictor {self.kind!r}; choose from {PREDICTORS}")
        if not 0.0 <= self.bias <= 1.0:
            raise InvalidConfig(f"bias must lie in [0, 1], got {self.bias}")
        if self.kind == "replay" and self.replay is None:
            raise InvalidConfig("the replay predictor needs replay ballots")


@dataclass(frozen=True)
class Scenario:
    abstention_rate: float
    representation_rate: float
    predictor: PredictorConfig
    seed: int

    def __post_init__(self):
        for name in ("abstention_rate", "representation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class ConsistencyResult:
    jaccard: float
    preserved_winners: int
    recovered_winners: int


def round_half_up(x) -> int:
    return int(Decimal(str(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_abstainers(election, rate, seed):
    """Split voter ids into (participants, abstainers).

    ``round(rate * n)`` voters (half rounds up) are drawn uniformly without
    replacement. Both lists keep the election's ballot order.
    """
    if not 0.0 <= rate <= 1.0:
        raise InvalidConfig(f"abstention rate must lie in [0, 1], got {rate}")
    voters = [b.voter_id for b in election.ballots]
    k = round_half_up(Decimal(str(rate)) * len(voters))
    picked = set(_rng(seed).choice(len(voters), size=k, replace=False).tolist()) if k else set()
    participants = [v for i, v in enumerate(voters) if i not in picked]
    abstainers = [v for i, v in enumerate(voters) if i in picked]
    return participants, abstainers


def _values(content):
    if isinstance(content, PointMap):
        return list(content.points.values())
    if isinstance(content, ScoreMap):
        return list(content.scores.values())
    return None


def _rebuild(template, ids, values):
    if isinstance(template, ApprovalSet):
        return ApprovalSet(tuple(ids))
    if isinstance(template, Ranking):
        return Ranking(tuple(ids))
    if isinstance(template, PointMap):
        return PointMap(dict(zip(ids, values)))
    return ScoreMap(dict(zip(ids, values)))


def perturb(content, project_ids, bias, rng):
    """Replace each choice, with probability ``bias``, by a project not on
    the ballot; points, scores and rank positions stay where they were."""
    ids = list(content.ids())
    values = _values(content)
    for j in range(len(ids)):
        if rng.random() < bias:
            free = [p for p in project_ids if p not in ids]
            if free:
                ids[j] = free[int(rng.integers(len(free)))]
    return _rebuild(content, ids, values)


def _popularity_draw(participants, project_ids, rng):
    weight = {p: 0 for p in project_ids}
    for b in participants:
        for p, u in ballot_utilities(b).items():
            weight[p] += max(u, 0)
    template = participants[int(rng.integers(len(participants)))].content
    k = len(template.ids())
    supported = [p for p in project_ids if weight[p] > 0]
    if len(supported) >= k:
        w = np.array([weight[p] for p in supported], dtype=float)
        idx = rng.choice(len(supported), size=k, replace=False, p=w / w.sum())
        drawn = [supported[i] for i in idx]
    else:
        rest = [p for p in project_ids if weight[p] == 0]
        idx = rng.choice(len(rest), size=k - len(supported), replace=False)
        drawn = supported + [rest[i] for i in idx]
    position = {p: i for i, p in enumerate(project_ids)}
    drawn.sort(key=lambda p: (-weight[p], position[p]))
    values = _values(template)
    if values is not None:
        values = sorted(values, reverse=True)
    return _rebuild(template, drawn, values)


def _cosine(u, v):
    dot = sum(x * v.get(p, 0) for p, x in u.items())
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    return dot / (nu * nv) if nu and nv else 0.0


def _nearest(abstainer, participants, columns, rng):
    if columns:
        scores = [sum(abstainer.extra.get(c) == q.extra.get(c) for c in columns) for q in participants]
    else:
        target = ballot_utilities(abstainer)
        scores = [_cosine(target, ballot_utilities(q)) for q in participants]
    best = max(scores)
    tied = [q for q, s in zip(participants, scores) if s == best]
    return tied[int(rng.integers(len(tied)))].content


def _profile_columns(election, cfg):
    if cfg.profile_columns:
        return tuple(cfg.profile_columns)
    return tuple(c for c in election.vote_columns if c not in ("voter_id", "vote", "points"))


def impute_ballots(election, abstainers, cfg: PredictorConfig, seed, participants=None):
    """One imputed `Ballot` per abstainer, carrying the abstainer's voter id.

    ``participants`` defaults to every voter not in ``abstainers``. Under
    ``replay``, abstainers absent from the replay file get no ballot.
    """
    rng = _rng(seed)
    by_id = {b.voter_id: b for b in election.ballots}
    missing = [a for a in abstainers if a not in by_id]
    if missing:
        raise InvalidConfig(f"unknown abstainers {missing[:5]}")
    if participants is None:
        absent = set(abstainers)
        participants = [v for v in by_id if v not in absent]
    pool = [by_id[v] for v in participants]
    project_ids = [p.id for p in election.projects]
    if cfg.kind in ("popularity_prior", "nearest_profile") and abstainers and not pool:
        raise InvalidConfig(f"{cfg.kind} needs at least one participant")
    columns = _profile_columns(election, cfg) if cfg.kind == "nearest_profile" else ()

    out = []
    for a in abstainers:
        truth = by_id[a]
        if cfg.kind == "noisy_copy":
            base = truth.content
        elif cfg.kind == "popularity_prior":
            base = _popularity_draw(pool, project_ids, rng)
        elif cfg.kind == "nearest_profile":
            base = _nearest(truth, pool, columns, rng)
        else:
            if a not in cfg.replay:
                continue
            base = cfg.replay[a].content
        content = perturb(base, project_ids, cfg.bias, rng) if cfg.bias > 0 else base
        ballot = Ballot(a, content, dict(truth.extra))
        if validate_ballot(ballot, election.rules):
            # a perturbed draw keeps its size and values, so only the unperturbed base can be at fault
            ballot = Ballot(a, base, dict(truth.extra))
            if validate_ballot(ballot, election.rules):
                raise InvalidConfig(f"predictor produced an invalid ballot for voter {a!r}")
        out.append(ballot)
    return out


def read_imputation_csv(source, election) -> dict:
    """Parse an imputation replay file into voter id -> `Ballot`.

    Columns: ``voter_id``, ``vote`` (comma-separated project ids, as in the
    ``.pb`` VOTES section) and ``points`` (comma-separated, may be empty for
    approval and ordinal elections). ``source`` is a path or CSV text.
    """
    if isinstance(source, (str, Path)) and Path(str(source)).exists():
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)
    reader = csv.DictReader(io.StringIO(text))
    needed = {"voter_id", "vote", "points"}
    if reader.fieldnames is None or not needed <= set(reader.fieldnames):
        raise InvalidConfig(f"imputation file needs columns {sorted(needed)}")
    known = {p.id for p in election.projects}
    out = {}
    for row in reader:
        ids = [x.strip() for x in row["vote"].split(",") if x.strip()]
        bad = [x for x in ids if x not in known]
        if bad:
            raise InvalidConfig(f"voter {row['voter_id']!r}: unknown projects {bad}")
        points = [int(x) for x in row["points"].split(",") if x.strip()]
        vt = election.vote_type
        if vt in ("cumulative", "scoring"):
            if len(points) != len(ids):
                raise InvalidConfig(f"voter {row['voter_id']!r}: points do not align with vote")
            content = PointMap(dict(zip(ids, points))) if vt == "cumulative" else ScoreMap(dict(zip(ids, points)))
        elif vt == "ordinal":
            content = Ranking(tuple(ids))
        else:
            content = ApprovalSet(tuple(ids))
        ballot = Ballot(row["voter_id"].strip(), content)
        problems = validate_ballot(ballot, election.rules)
        if problems:
            raise InvalidConfig(f"voter {ballot.voter_id!r}: {problems[0].message}")
        out[ballot.voter_id] = ballot
    return out


def write_imputation_csv(ballots) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["voter_id", "vote", "points"])
    for b in ballots:
        values = _values(b.content)
        w.writerow([b.voter_id, ",".join(b.project_ids()), ",".join(map(str, values)) if values else ""])
    return buf.getvalue()


def _jaccard(x, y):
    if not x and not y:
        return 1.0
    return len(x & y) / len(x | y)


def consistency(reference, scenario, dropped) -> ConsistencyResult:
    """Compare winner sets: scenario vs reference, and scenario vs the
    outcome with unrepresented abstainers simply dropped."""
    reference, scenario, dropped = set(reference), set(scenario), set(dropped)
    return ConsistencyResult(
        jaccard=_jaccard(reference, scenario),
        preserved_winners=len(reference & scenario),
        recovered_winners=len(scenario - dropped),
    )


def _winners(rule, election, options):
    try:
        return frozenset(RULES[rule](election, **options).winners)
    except NoBallots:
        # nobody left to vote: nothing gets funded
        return frozenset()


@dataclass
class GridCell:
    rule: str
    abstention: float
    representation: float
    seed_count: int
    mean_jaccard: float
    sd_jaccard: float
    mean_preserved: float
    mean_recovered: float
    results: list = field(default_factory=list)

    def row(self) -> dict:
        return {c: getattr(self, c) for c in GRID_COLUMNS}


@dataclass
class ConsistencyGrid:
    rules: list
    abstention_levels: list
    representation_levels: list
    predictor: PredictorConfig
    seeds: list
    cells: list
    reference: dict

    def cell(self, rule, abstention, representation) -> GridCell:
        for c in self.cells:
            if (c.rule, c.abstention, c.representation) == (rule, abstention, representation):
                return c
        raise KeyError((rule, abstention, representation))

    def rows(self) -> list:
        return [c.row() for c in self.cells]

    def mean_jaccard(self, rule) -> float:
        """Mean over every cell and seed of one rule."""
        values = [r.jaccard for c in self.cells if c.rule == rule for r in c.results]
        return float(np.mean(values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=GRID_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "rules": list(self.rules),
            "abstention_levels": list(self.abstention_levels),
            "representation_levels": list(self.representation_levels),
            "predictor": {"kind": self.predictor.kind, "bias": self.predictor.bias},
            "seeds": list(self.seeds),
            "reference": {k: sorted(v) for k, v in self.reference.items()},
            "cells": [
                dict(
                    c.row(),
                    results=[[r.jaccard, r.preserved_winners, r.recovered_winners] for r in c.results],
                )
                for c in self.cells
            ],
        }


def run_scenario(
    election, scenario: Scenario, rules, rule_options=None, cell_index=(0, 0), reference=None
):
    """Evaluate one scenario for each rule; returns rule -> `ConsistencyResult`.

    Abstainers are drawn from a stream keyed by (seed, abstention index), so
    every representation level of one seed sees the same abstainers.
    Imputation draws from a stream keyed by (seed, abstention index,
    representation index). ``reference`` (rule -> winner set) skips
    recomputing the full-electorate outcomes.
    """
    rule_options = rule_options or {}
    ia, ir = cell_index
    sample_rng = np.random.default_rng([scenario.seed, ia])
    impute_rng = np.random.default_rng([scenario.seed, ia, ir, 1])
    participants, abstainers = sample_abstainers(election, scenario.abstention_rate, sample_rng)
    k = round_half_up(Decimal(str(scenario.representation_rate)) * len(abstainers))
    picked = set(impute_rng.choice(len(abstainers), size=k, replace=False).tolist()) if k else set()
    represented = [a for i, a in enumerate(abstainers) if i in picked]
    imputed = {
        b.voter_id: b
        for b in impute_ballots(election, represented, scenario.predictor, impute_rng, participants)
    }
    kept = set(participants)
    scenario_ballots = [
        imputed.get(b.voter_id, b)
        for b in election.ballots
        if b.voter_id in kept or b.voter_id in imputed
    ]
    dropped_ballots = [b for b in election.ballots if b.voter_id in kept]
    with_imputed = election.with_ballots(scenario_ballots)
    only_participants = election.with_ballots(dropped_ballots)
    out = {}
    for rule in rules:
        opts = rule_options.get(rule, {})
        ref = reference[rule] if reference is not None else _winners(rule, election, opts)
        out[rule] = consistency(
            ref,
            _winners(rule, with_imputed, opts),
            _winners(rule, only_participants, opts),
        )
    return out


def run_grid(
    election,
    abstention_levels,
    representation_levels,
    cfg: PredictorConfig,
    seeds,
    rules=("greedy", "mes-add1u"),
    rule_options=None,
) -> ConsistencyGrid:
    """Consistency of each rule over an abstention x representation grid.

    Every (abstention, representation, seed) scenario is run for all rules;
    cells report the mean and sample standard deviation of the Jaccard
    index over seeds, and the mean preserved / recovered winner counts.
    """
    if not abstention_levels or not representation_levels:
        raise InvalidConfig("abstention and representation levels must be non-empty")
    seeds = list(seeds)
    if not seeds:
        raise InvalidConfig("at least one seed is required")
    rule_options = rule_options or {}
    reference = {r: _winners(r, election, rule_options.get(r, {})) for r in rules}
    per_cell = {}
    for ia, a in enumerate(abstention_levels):
        for ir, r in enumerate(representation_levels):
            for s in seeds:
                res = run_scenario(
                    election, Scenario(a, r, cfg, s), rules, rule_options, (ia, ir), reference
                )
                for rule, cr in res.items():
                    per_cell.setdefault((rule, a, r), []).append(cr)
    cells = []
    for rule in rules:
        for a in abstention_levels:
            for r in representation_levels:
                results = per_cell[(rule, a, r)]
                jac = np.array([x.jaccard for x in results])
                cells.append(
                    GridCell(
                        rule=rule,
                        abstention=a,
                        representation=r,
                        seed_count=len(results),
                        mean_jaccard=float(jac.mean()),
                        sd_jaccard=float(jac.std(ddof=1)) if len(jac) > 1 else 0.0,
                        mean_preserved=float(np.mean([x.preserved_winners for x in results])),
                        mean_recovered=float(np.mean([x.recovered_winners for x in results])),
                        results=results,
                    )
                )
    return ConsistencyGrid(
        list(rules),
        list(abstention_levels),
        list(representation_levels),
        cfg,
        seeds,
        cells,
        reference,
    )
