"""Outcome metrics and rule-versus-rule comparison reports."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

from pbfair.ballots import ballot_utilities
from pbfair.rules import RULES


class EmptyOutcome(ValueError):
    pass


def _winner_list(outcome):
    """Winners of an Outcome, or the iterable of project ids itself."""
    return list(outcome.winners if hasattr(outcome, "winners") else outcome)


def _winner_set(outcome):
    return set(_winner_list(outcome))


def voter_satisfaction(election, outcome) -> float:
    """Share of ballots giving positive utility to at least one winner."""
    if not election.ballots:
        return 0.0
    won = _winner_set(outcome)
    happy = sum(
        1 for b in election.ballots if any(u > 0 and p in won for p, u in ballot_utilities(b).items())
    )
    return happy / len(election.ballots)


def point_representation(election, outcome) -> float:
    """Mean share of each ballot's utility mass that landed on winners.

    Ballots with zero total utility are left out of the mean.
    """
    won = _winner_set(outcome)
    if not won:
        return 0.0
    shares = []
    for b in election.ballots:
        utils = ballot_utilities(b)
        total = sum(u for u in utils.values() if u > 0)
        if total == 0:
            continue
        hit = sum(u for p, u in utils.items() if u > 0 and p in won)
        shares.append(Fraction(hit, total))
    if not shares:
        return 0.0
    return float(sum(shares) / len(shares))


@dataclass
class DistrictCoverage:
    """Spread of winners over districts.

    ``available`` is False when no project carries a district label; the
    other fields are then empty or zero.
    """

    available: bool
    counts: dict = field(default_factory=dict)
    covered_fraction: float = 0.0
    entropy: float = 0.0


def district_coverage(election, outcome) -> DistrictCoverage:
    """Winners per district, share of candidate districts with a winner, and
    the entropy of the winner counts normalized to [0, 1]."""
    labelled = {p.id: p.district for p in election.projects if p.district}
    if not labelled:
        return DistrictCoverage(available=False)
    districts = sorted(set(labelled.values()))
    counts = {d: 0 for d in districts}
    for pid in _winner_list(outcome):
        if pid in labelled:
            counts[labelled[pid]] += 1
    covered = sum(1 for c in counts.values() if c > 0) / len(districts)
    total = sum(counts.values())
    entropy = 0.0
    if total and len(districts) > 1:
        h = -sum((c / total) * math.log(c / total) for c in counts.values() if c)
        entropy = h / math.log(len(districts))
    return DistrictCoverage(True, counts, covered, entropy)


def category_shares(election, outcome) -> dict:
    """Label -> ``{"count_share", "cost_share"}`` among winners.

    Projects with several labels count fully toward each, so shares across
    labels can add up to more than 1.
    """
    projects = election.project_map()
    labels = sorted({c for p in election.projects for c in p.categories})
    winners = [projects[w] for w in _winner_list(outcome)]
    spend = sum(p.cost for p in winners)
    out = {}
    for label in labels:
        hits = [p for p in winners if label in p.categories]
        count_share = len(hits) / len(winners) if winners else 0.0
        cost_share = sum(p.cost for p in hits) / spend if spend else 0.0
        out[label] = {"count_share": count_share, "cost_share": cost_share}
    return out


def mean_winner_cost_share(election, outcome) -> float:
    """Mean over winners of cost / budget."""
    winners = _winner_list(outcome)
    if not winners:
        raise EmptyOutcome("mean cost share of an empty outcome")
    projects = election.project_map()
    shares = [Fraction(projects[w].cost, election.budget) for w in winners]
    return float(sum(shares) / len(shares))


@dataclass
class RuleMetrics:
    label: str
    rule: str
    winners: list = field(default_factory=list)
    winner_count: int = 0
    spend: int = 0
    budget_utilization: float = 0.0
    voter_satisfaction: float = 0.0
    point_representation: float = 0.0
    district_coverage: Optional[DistrictCoverage] = None
    category_shares: dict = field(default_factory=dict)
    mean_winner_cost_share: Optional[float] = None
    error: Optional[str] = None


@dataclass
class PairComparison:
    """How rule ``b`` differs from rule ``a``.

    Representation deltas come in two readings: ``absolute`` is the
    difference of the two values in points of [0, 1], ``relative`` is that
    difference over ``a``'s value.
    """

    a: str
    b: str
    overlap: float
    satisfaction_delta: float
    representation_delta_absolute: float
    representation_delta_relative: Optional[float]
    winner_count_ratio: Optional[float]
    district_deltas: dict = field(default_factory=dict)
    districts_gaining: int = 0


@dataclass
class ComparisonReport:
    election: str
    budget: int
    num_projects: int
    num_ballots: int
    rules: list
    pairs: list
    notes: list = field(default_factory=list)

    def rule(self, label) -> RuleMetrics:
        for r in self.rules:
            if r.label == label:
                return r
        raise KeyError(label)

    def pair(self, a, b) -> PairComparison:
        for p in self.pairs:
            if (p.a, p.b) == (a, b):
                return p
        raise KeyError((a, b))

    def to_dict(self) -> dict:
        return asdict(self)


def measure(election, outcome, label=None) -> RuleMetrics:
    """All per-rule metrics of one outcome."""
    return RuleMetrics(
        label=label or outcome.rule,
        rule=outcome.rule,
        winners=list(outcome.winners),
        winner_count=len(outcome.winners),
        spend=outcome.spend,
        budget_utilization=outcome.spend / election.budget,
        voter_satisfaction=voter_satisfaction(election, outcome),
        point_representation=point_representation(election, outcome),
        district_coverage=district_coverage(election, outcome),
        category_shares=category_shares(election, outcome),
        mean_winner_cost_share=mean_winner_cost_share(election, outcome) if outcome.winners else None,
    )


def _jaccard(x, y):
    x, y = set(x), set(y)
    if not x and not y:
        return 1.0
    return len(x & y) / len(x | y)


def _compare_pair(a: RuleMetrics, b: RuleMetrics) -> PairComparison:
    rep_abs = b.point_representation - a.point_representation
    rep_rel = rep_abs / a.point_representation if a.point_representation else None
    deltas = {}
    if a.district_coverage and b.district_coverage and a.district_coverage.available:
        for d in a.district_coverage.counts:
            deltas[d] = b.district_coverage.counts[d] - a.district_coverage.counts[d]
    return PairComparison(
        a=a.label,
        b=b.label,
        overlap=_jaccard(a.winners, b.winners),
        satisfaction_delta=b.voter_satisfaction - a.voter_satisfaction,
        representation_delta_absolute=rep_abs,
        representation_delta_relative=rep_rel,
        winner_count_ratio=b.winner_count / a.winner_count if a.winner_count else None,
        district_deltas=deltas,
        districts_gaining=sum(1 for v in deltas.values() if v > 0),
    )


def compare_rules(election, rules, options=None, name="election") -> ComparisonReport:
    """Run each rule on ``election`` and compare every pair, in the order given.

    Parameters
    ----------
    rules : list of str
        Names from `pbfair.rules.RULES`; at least two. A name may repeat; the
        repeats are labelled ``name#2``, ``name#3``, ...
    options : dict, optional
        Rule name -> keyword arguments for that rule (e.g. a tie-break).
    """
    if len(rules) < 2:
        raise ValueError("compare_rules needs at least two rules")
    options = options or {}
    rows = []
    seen = {}
    for name_ in rules:
        seen[name_] = seen.get(name_, 0) + 1
        label = name_ if seen[name_] == 1 else f"{name_}#{seen[name_]}"
        try:
            outcome = RULES[name_](election, **options.get(name_, {}))
        except Exception as exc:  # reported per rule, the others still run
            rows.append(RuleMetrics(label=label, rule=name_, error=f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(measure(election, outcome, label))
    pairs = [
        _compare_pair(a, b)
        for a, b in combinations(rows, 2)
        if a.error is None and b.error is None
    ]
    notes = [
        "voter_satisfaction: share of ballots with at least one positively rated winner",
        "point_representation: ballots with zero total utility are excluded from the mean",
        "category shares count multi-label projects once per label and may sum above 1",
    ]
    if any(r == "phragmen" for r in rules) and election.vote_type != "approval":
        notes.append("phragmen reads any positive utility as an approval")
    if election.vote_type == "cumulative" and election.rules.require_exact_total:
        notes.append("cumulative ballots are assumed to spend exactly the configured points")
    return ComparisonReport(
        election=name,
        budget=election.budget,
        num_projects=len(election.projects),
        num_ballots=len(election.ballots),
        rules=rows,
        pairs=pairs,
        notes=notes,
    )


def corpus_summary(reports, baseline="greedy", fair="mes-add1u") -> dict:
    """Means over elections of how ``fair`` differs from ``baseline``.

    Elections where either rule failed or the baseline funded nothing are
    skipped and counted in ``skipped``.
    """
    ratios, sat, rep_abs, rep_rel, cost = [], [], [], [], []
    skipped = 0
    for rep in reports:
        try:
            a, b = rep.rule(baseline), rep.rule(fair)
        except KeyError:
            skipped += 1
            continue
        if a.error or b.error or not a.winner_count:
            skipped += 1
            continue
        ratios.append(b.winner_count / a.winner_count)
        sat.append(b.voter_satisfaction - a.voter_satisfaction)
        rep_abs.append(b.point_representation - a.point_representation)
        if a.point_representation:
            rep_rel.append((b.point_representation - a.point_representation) / a.point_representation)
        if a.mean_winner_cost_share is not None and b.mean_winner_cost_share is not None:
            cost.append(b.mean_winner_cost_share - a.mean_winner_cost_share)

    def mean(xs):
        return sum(xs) / len(xs) if xs else None

    return {
        "baseline": baseline,
        "fair": fair,
        "elections": len(ratios),
        "skipped": skipped,
        "mean_winner_count_ratio": mean(ratios),
        "mean_satisfaction_delta": mean(sat),
        "mean_representation_delta_absolute": mean(rep_abs),
        "mean_representation_delta_relative": mean(rep_rel),
        "mean_cost_share_delta": mean(cost),
    }
