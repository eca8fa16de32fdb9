"""Seeded synthetic elections for demos, fixtures and benchmarks.

Projects live in districts and carry impact-area categories. Each voter
belongs to a home district and likes projects there more. Costs are
log-normal, so a few expensive projects compete with many cheap ones.
This is the setting in which greedy and equal shares disagree.
"""

from __future__ import annotations

import numpy as np

from pbfair.ballots import ApprovalSet, Ballot, BallotRules, PointMap, Ranking, ScoreMap
from pbfair.election import Election, ElectionMeta, Project

CATEGORIES = (
    "education",
    "public transit",
    "health",
    "welfare",
    "public space",
    "urban greenery",
    "culture",
    "sport",
    "environmental protection",
)


def generate_election(
    seed,
    n_voters=100,
    n_projects=12,
    vote_type="approval",
    budget=10_000,
    n_districts=4,
    min_length=1,
    max_length=None,
    total_points=10,
    score_range=(0, 5),
    home_bias=3.0,
    cost_sigma=0.8,
    name=None,
) -> Election:
    """Draw one election.

    Parameters
    ----------
    seed : int
        Seeds a `numpy.random.Generator`; equal seeds give equal elections.
    vote_type : str
        ``approval``, ``cumulative`` (``total_points`` spent exactly over at
        least ``min_length`` projects), ``ordinal`` or ``scoring``.
    home_bias : float
        Multiplier on the appeal of projects in a voter's own district.
    """
    rng = np.random.default_rng(seed)
    districts = [f"d{k + 1}" for k in range(n_districts)]
    mean_cost = budget / max(3, n_projects / 3)
    raw = rng.lognormal(np.log(mean_cost), cost_sigma, size=n_projects)
    costs = np.clip(np.round(raw), 1, budget).astype(int)
    appeal = rng.gamma(2.0, 1.0, size=n_projects)
    p_district = rng.integers(0, n_districts, size=n_projects)
    projects = []
    for j in range(n_projects):
        k = int(rng.integers(1, 3))
        cats = tuple(sorted(rng.choice(len(CATEGORIES), size=k, replace=False)))
        projects.append(
            Project(
                str(j + 1),
                int(costs[j]),
                name=f"Project {j + 1}",
                district=districts[p_district[j]],
                categories=tuple(CATEGORIES[c] for c in cats),
            )
        )

    max_len = max_length if max_length is not None else n_projects
    ballots = []
    for v in range(n_voters):
        home = int(rng.integers(0, n_districts))
        weights = appeal * np.where(p_district == home, home_bias, 1.0)
        weights = weights / weights.sum()
        lo = max(min_length, 1)
        hi = max(lo, min(max_len, n_projects, lo + 4))
        size = int(rng.integers(lo, hi + 1))
        chosen = [str(j + 1) for j in rng.choice(n_projects, size=size, replace=False, p=weights)]
        if vote_type == "approval":
            content = ApprovalSet(tuple(chosen))
        elif vote_type == "ordinal":
            content = Ranking(tuple(chosen))
        elif vote_type == "cumulative":
            if total_points < size:
                raise ValueError("total_points must cover min_length projects")
            extra = rng.multinomial(total_points - size, _weights_for(chosen, weights))
            content = PointMap({p: int(1 + x) for p, x in zip(chosen, extra)})
        elif vote_type == "scoring":
            lo_s, hi_s = score_range
            scores = rng.integers(max(lo_s, 1), hi_s + 1, size=size)
            content = ScoreMap({p: int(s) for p, s in zip(chosen, scores)})
        else:
            raise ValueError(f"unknown vote_type {vote_type!r}")
        ballots.append(
            Ballot(str(v + 1), content, {"district": districts[home], "age": str(int(rng.integers(16, 90)))})
        )

    key_order = ["description", "country", "unit", "instance", "num_projects", "num_votes", "budget", "vote_type"]
    kw = {}
    if vote_type in ("approval", "ordinal", "cumulative"):
        kw["min_length"] = min_length
        key_order.append("min_length")
        if max_length is not None:
            kw["max_length"] = max_length
            key_order.append("max_length")
    if vote_type == "cumulative":
        kw["min_sum_points"] = kw["max_sum_points"] = total_points
        key_order += ["max_sum_points", "min_sum_points"]
    if vote_type == "scoring":
        kw["min_points"], kw["max_points"] = score_range
        key_order += ["min_points", "max_points"]
    meta = ElectionMeta(
        budget=int(budget),
        vote_type=vote_type,
        num_projects=n_projects,
        num_votes=n_voters,
        description=name or f"synthetic {vote_type} election (seed {seed})",
        country="Nowhere",
        unit="Synthetic City",
        instance=str(seed),
        extra={"generator": "pbfair.synthetic"},
        key_order=tuple(key_order) + ("generator",),
        **kw,
    )
    rules = meta.ballot_rules()
    return Election(
        meta,
        rules,
        projects,
        ballots,
        ("project_id", "cost", "name", "district", "category"),
        ("voter_id", "district", "age", "vote") + (("points",) if vote_type in ("cumulative", "scoring") else ()),
    )


def _weights_for(chosen, weights):
    w = np.array([weights[int(p) - 1] for p in chosen])
    return w / w.sum()


def aarau_like(seed=2023) -> Election:
    """An election shaped like Aarau 2023: 33 projects, 1,703 cumulative ballots
    of 10 points over at least three projects, a budget of 50,000 and 5 districts.

    The ballots are synthetic; this is a stand-in for timing and demos, not
    the published data.
    """
    e = generate_election(
        seed,
        n_voters=1703,
        n_projects=33,
        vote_type="cumulative",
        budget=50_000,
        n_districts=5,
        min_length=3,
        total_points=10,
        name="Aarau-shaped synthetic election",
    )
    assert e.rules == BallotRules.aarau()
    return e
