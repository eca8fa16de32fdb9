"""Election data model shared by the parser, the rules and the metrics."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from pbfair.ballots import (
    ApprovalSet,
    Ballot,
    BallotRules,
    PointMap,
    Ranking,
    ScoreMap,
)

INT_META_KEYS = (
    "budget",
    "num_projects",
    "num_votes",
    "min_length",
    "max_length",
    "min_sum_points",
    "max_sum_points",
    "min_points",
    "max_points",
)
STR_META_KEYS = (
    "vote_type",
    "description",
    "country",
    "unit",
    "subunit",
    "instance",
    "date_begin",
    "date_end",
)


@dataclass
class ElectionMeta:
    """Contents of the META section.

    Recognized keys are typed attributes; anything else lands in ``extra``.
    ``key_order`` records the order keys appeared in, so serialization can
    reproduce it.
    """

    budget: int
    vote_type: str
    num_projects: Optional[int] = None
    num_votes: Optional[int] = None
    min_length: Optional[int] = None
    max_length: Optional[int] = None
    min_sum_points: Optional[int] = None
    max_sum_points: Optional[int] = None
    min_points: Optional[int] = None
    max_points: Optional[int] = None
    description: Optional[str] = None
    country: Optional[str] = None
    unit: Optional[str] = None
    subunit: Optional[str] = None
    instance: Optional[str] = None
    date_begin: Optional[str] = None
    date_end: Optional[str] = None
    extra: dict = field(default_factory=dict)
    key_order: tuple = ()

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError(f"budget must be positive, got {self.budget}")
        if self.num_projects is not None and self.num_projects < 1:
            raise ValueError("num_projects must be at least 1")
        if (
            self.min_length is not None
            and self.max_length is not None
            and self.min_length > self.max_length
        ):
            raise ValueError("min_length exceeds max_length")

    def items(self):
        """(key, value) pairs of every set key, in ``key_order`` first."""
        values = {k: getattr(self, k) for k in INT_META_KEYS + STR_META_KEYS}
        values = {k: v for k, v in values.items() if v is not None}
        values.update(self.extra)
        seen = set()
        for k in self.key_order:
            if k in values and k not in seen:
                seen.add(k)
                yield k, values[k]
        for k, v in values.items():
            if k not in seen:
                yield k, v

    def ballot_rules(self) -> BallotRules:
        """Ballot constraints implied by the META keys."""
        vt = self.vote_type
        kw = dict(min_distinct=self.min_length, max_distinct=self.max_length)
        if vt == "cumulative":
            kw["total_points"] = self.max_sum_points
            kw["require_exact_total"] = (
                self.max_sum_points is not None and self.min_sum_points == self.max_sum_points
            )
        elif vt == "scoring" and self.min_points is not None and self.max_points is not None:
            kw["score_range"] = (self.min_points, self.max_points)
        return BallotRules(vt, **kw)


@dataclass
class Project:
    id: str
    cost: int
    name: Optional[str] = None
    district: Optional[str] = None
    categories: tuple = ()
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.cost <= 0:
            raise ValueError(f"project {self.id!r}: cost must be positive")


@dataclass
class Election:
    """A participatory budgeting instance.

    ``project_columns`` and ``vote_columns`` are the PROJECTS and VOTES
    column headers, kept for lossless serialization.
    """

    meta: ElectionMeta
    rules: BallotRules
    projects: list
    ballots: list
    project_columns: tuple = ("project_id", "cost")
    vote_columns: tuple = ("voter_id", "vote")

    @property
    def budget(self) -> int:
        return self.meta.budget

    @property
    def vote_type(self) -> str:
        return self.meta.vote_type

    def project_map(self) -> dict:
        return {p.id: p for p in self.projects}

    def cost(self, project_id) -> int:
        return self.project_map()[project_id].cost

    def with_ballots(self, ballots) -> "Election":
        """Copy with a different ballot list; ``num_votes`` follows along."""
        ballots = list(ballots)
        meta = replace(self.meta, num_votes=len(ballots))
        return replace(self, meta=meta, ballots=ballots)

    @classmethod
    def build(
        cls,
        budget,
        projects,
        ballots,
        vote_type="approval",
        rules=None,
        districts=None,
        categories=None,
    ) -> "Election":
        """Assemble an election from plain Python values.

        Parameters
        ----------
        budget : int
        projects : dict
            Project id -> cost, in the desired project order.
        ballots : dict
            Voter id -> ballot content. Lists/tuples/sets become approval
            sets (or rankings when ``vote_type="ordinal"``); dicts become
            point or score maps. `Ballot` content objects pass through.
        districts, categories : dict, optional
            Project id -> district label / iterable of category labels.
        """
        districts = districts or {}
        categories = categories or {}
        project_list = [
            Project(
                str(pid),
                int(cost),
                district=districts.get(pid),
                categories=tuple(categories.get(pid, ())),
            )
            for pid, cost in projects.items()
        ]
        ballot_list = [
            Ballot(str(vid), _as_content(content, vote_type)) for vid, content in ballots.items()
        ]
        pcols = ["project_id", "cost"]
        if districts:
            pcols.append("district")
        if categories:
            pcols.append("category")
        vcols = ["voter_id", "vote"]
        if vote_type in ("cumulative", "scoring"):
            vcols.append("points")
        meta = ElectionMeta(
            budget=int(budget),
            vote_type=vote_type,
            num_projects=len(project_list),
            num_votes=len(ballot_list),
            key_order=("budget", "vote_type", "num_projects", "num_votes"),
        )
        if rules is None:
            rules = BallotRules(vote_type)
        return cls(meta, rules, project_list, ballot_list, tuple(pcols), tuple(vcols))


def _as_content(content, vote_type):
    if isinstance(content, (ApprovalSet, PointMap, Ranking, ScoreMap)):
        return content
    if isinstance(content, dict):
        content = {str(k): int(v) for k, v in content.items()}
        return ScoreMap(content) if vote_type == "scoring" else PointMap(content)
    if isinstance(content, (set, frozenset)):
        content = sorted(content)
    ids = tuple(str(p) for p in content)
    return Ranking(ids) if vote_type == "ordinal" else ApprovalSet(ids)
