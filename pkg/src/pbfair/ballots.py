"""Ballot formats, ballot validation and utility extraction.

Four ballot formats are supported, selected by the election's ``vote_type``:

=============  ==============  =============================================
vote_type      content type    utility of a project on the ballot
=============  ==============  =============================================
``approval``   `ApprovalSet`   1
``cumulative`` `PointMap`      the points given to it
``ordinal``    `Ranking`       its modified Borda score
``scoring``    `ScoreMap`      its score
=============  ==============  =============================================

Projects absent from a ballot always have utility 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, NamedTuple, Optional, Union

if TYPE_CHECKING:
    from pbfair.election import Election

VOTE_TYPES = ("approval", "cumulative", "ordinal", "scoring")


@dataclass(frozen=True, eq=False)
class ApprovalSet:
    """Approved project ids, in the order they were written.

    The order is kept for faithful serialization only; equality is set
    equality.
    """

    projects: tuple

    def ids(self) -> tuple:
        return self.projects

    def __eq__(self, other):
        if not isinstance(other, ApprovalSet):
            return NotImplemented
        return frozenset(self.projects) == frozenset(other.projects)

    def __hash__(self):
        return hash(frozenset(self.projects))


@dataclass(frozen=True)
class PointMap:
    """Cumulative ballot: project id -> points (positive integers)."""

    points: dict

    def ids(self) -> tuple:
        return tuple(self.points)


@dataclass(frozen=True)
class Ranking:
    """Ordered project ids, best first."""

    order: tuple

    def ids(self) -> tuple:
        return self.order


@dataclass(frozen=True)
class ScoreMap:
    """Scoring ballot: project id -> integer score."""

    scores: dict

    def ids(self) -> tuple:
        return tuple(self.scores)


BallotContent = Union[ApprovalSet, PointMap, Ranking, ScoreMap]

CONTENT_TYPES = {
    "approval": ApprovalSet,
    "cumulative": PointMap,
    "ordinal": Ranking,
    "scoring": ScoreMap,
}


@dataclass
class Ballot:
    """One voter's ballot.

    ``extra`` holds any additional VOTES columns (age, sex, neighborhood, ...)
    verbatim and in column order.
    """

    voter_id: str
    content: BallotContent
    extra: dict = field(default_factory=dict)

    def project_ids(self) -> tuple:
        return self.content.ids()


@dataclass(frozen=True)
class BallotRules:
    """Constraints a ballot must satisfy.

    Parameters
    ----------
    vote_type : str
        One of ``approval``, ``cumulative``, ``ordinal``, ``scoring``.
    min_distinct, max_distinct : int, optional
        Bounds on the number of distinct projects on a ballot.
    total_points : int, optional
        Point budget of a cumulative ballot.
    require_exact_total : bool
        If set, a cumulative ballot must spend exactly ``total_points``;
        otherwise it may spend at most ``total_points``.
    score_range : (int, int), optional
        Inclusive bounds for scores of a scoring ballot.
    """

    vote_type: str
    min_distinct: Optional[int] = None
    max_distinct: Optional[int] = None
    total_points: Optional[int] = None
    require_exact_total: bool = False
    score_range: Optional[tuple] = None

    def __post_init__(self):
        if self.vote_type not in VOTE_TYPES:
            raise ValueError(f"unknown vote_type {self.vote_type!r}")
        if (
            self.min_distinct is not None
            and self.max_distinct is not None
            and self.min_distinct > self.max_distinct
        ):
            raise ValueError("min_distinct exceeds max_distinct")
        if (
            self.total_points is not None
            and self.min_distinct is not None
            and self.total_points < self.min_distinct
        ):
            raise ValueError("total_points < min_distinct: no ballot could be valid")
        if self.score_range is not None:
            lo, hi = self.score_range
            if lo > hi or lo < 0:
                raise ValueError(f"bad score_range {self.score_range!r}")

    @classmethod
    def aarau(cls) -> "BallotRules":
        """Aarau 2023 profile: 10 points over at least three projects, all spent."""
        return cls("cumulative", min_distinct=3, total_points=10, require_exact_total=True)


class Violation(NamedTuple):
    rule: str
    message: str


class InvalidBallotPresent(ValueError):
    """Raised by `utilities` when some ballot breaks the election's rules."""

    def __init__(self, voter_id, violations):
        self.voter_id = voter_id
        self.violations = violations
        msgs = "; ".join(v.message for v in violations)
        super().__init__(f"ballot of voter {voter_id!r} is invalid: {msgs}")


def validate_ballot(ballot: Ballot, rules: BallotRules) -> list:
    """Check a ballot against ``rules``.

    Returns a list of `Violation`; the empty list means the ballot is valid.
    """
    content = ballot.content
    expected = CONTENT_TYPES[rules.vote_type]
    if not isinstance(content, expected):
        return [
            Violation(
                "format",
                f"{type(content).__name__} ballot under vote_type {rules.vote_type!r}",
            )
        ]

    out = []
    ids = content.ids()
    if len(set(ids)) != len(ids):
        out.append(Violation("distinct", "a project appears more than once"))
    n = len(set(ids))
    if rules.min_distinct is not None and n < rules.min_distinct:
        out.append(
            Violation("min_distinct", f"{n} projects selected, at least {rules.min_distinct} required")
        )
    if rules.max_distinct is not None and n > rules.max_distinct:
        out.append(
            Violation("max_distinct", f"{n} projects selected, at most {rules.max_distinct} allowed")
        )

    if isinstance(content, PointMap):
        values = list(content.points.values())
        if any(not isinstance(v, int) or v < 1 for v in values):
            out.append(Violation("points", "points must be positive integers"))
        total = sum(values)
        if rules.total_points is not None:
            if rules.require_exact_total and total != rules.total_points:
                out.append(
                    Violation("total_points", f"{total} points spent, exactly {rules.total_points} required")
                )
            elif total > rules.total_points:
                out.append(
                    Violation("total_points", f"{total} points spent, at most {rules.total_points} allowed")
                )
    elif isinstance(content, ScoreMap):
        values = list(content.scores.values())
        if any(not isinstance(v, int) for v in values):
            out.append(Violation("scores", "scores must be integers"))
        elif rules.score_range is not None:
            lo, hi = rules.score_range
            bad = [v for v in values if not lo <= v <= hi]
            if bad:
                out.append(Violation("score_range", f"scores {bad} outside [{lo}, {hi}]"))
        elif any(v < 0 for v in values):
            out.append(Violation("score_range", "negative score"))
    return out


def modified_borda_points(ranking) -> dict:
    """Modified Borda scores of a best-first ranking.

    With ``m`` ranked projects the top one gets ``m`` points, the next ``m - 1``
    and so on down to 1.

    >>> modified_borda_points(["X", "Y", "Z"])
    {'X': 3, 'Y': 2, 'Z': 1}
    """
    order = ranking.order if isinstance(ranking, Ranking) else tuple(ranking)
    m = len(order)
    return {p: m - j for j, p in enumerate(order)}


def ballot_utilities(ballot: Ballot) -> dict:
    """Project id -> utility for one ballot; only projects on the ballot appear."""
    c = ballot.content
    if isinstance(c, ApprovalSet):
        return {p: 1 for p in c.projects}
    if isinstance(c, PointMap):
        return dict(c.points)
    if isinstance(c, ScoreMap):
        return dict(c.scores)
    if isinstance(c, Ranking):
        return modified_borda_points(c)
    raise TypeError(f"unsupported ballot content {type(c).__name__}")


def utilities(election: "Election", validate: bool = True) -> dict:
    """Utility profile of an election: voter id -> {project id: utility}.

    Raises `InvalidBallotPresent` if ``validate`` is set and a ballot breaks
    the election's ballot rules.
    """
    profile = {}
    for b in election.ballots:
        if validate:
            violations = validate_ballot(b, election.rules)
            if violations:
                raise InvalidBallotPresent(b.voter_id, violations)
        profile[b.voter_id] = ballot_utilities(b)
    return profile
