import pytest
from hypothesis import given
from hypothesis import strategies as st

from pbfair.ballots import (
    ApprovalSet,
    Ballot,
    BallotRules,
    InvalidBallotPresent,
    PointMap,
    Ranking,
    ScoreMap,
    modified_borda_points,
    utilities,
    validate_ballot,
)
from pbfair.election import Election

AARAU = BallotRules.aarau()


def rules_broken(content, rules=AARAU):
    return [v.rule for v in validate_ballot(Ballot("v", content), rules)]


def test_aarau_profile():
    assert AARAU == BallotRules("cumulative", min_distinct=3, total_points=10, require_exact_total=True)


def test_eight_one_one_is_valid():
    assert rules_broken(PointMap({"p1": 8, "p2": 1, "p3": 1})) == []


def test_all_points_on_one_project_is_rejected():
    assert rules_broken(PointMap({"p1": 10})) == ["min_distinct"]


def test_underspending_is_rejected_when_exact_total_required():
    assert rules_broken(PointMap({"p1": 5, "p2": 3, "p3": 1})) == ["total_points"]


def test_underspending_allowed_without_exact_flag():
    loose = BallotRules("cumulative", min_distinct=3, total_points=10)
    assert rules_broken(PointMap({"p1": 5, "p2": 3, "p3": 1}), loose) == []
    assert rules_broken(PointMap({"p1": 8, "p2": 2, "p3": 1}), loose) == ["total_points"]


def test_wrong_format():
    assert rules_broken(ApprovalSet(("p1", "p2", "p3"))) == ["format"]


@pytest.mark.parametrize(
    "content, rules, broken",
    [
        (ApprovalSet(("a", "a")), BallotRules("approval"), ["distinct"]),
        (ApprovalSet(("a", "b", "c")), BallotRules("approval", max_distinct=2), ["max_distinct"]),
        (PointMap({"a": 0, "b": 10, "c": 0}), AARAU, ["points"]),
        (ScoreMap({"a": 7}), BallotRules("scoring", score_range=(0, 5)), ["score_range"]),
        (ScoreMap({"a": 5, "b": 0}), BallotRules("scoring", score_range=(0, 5)), []),
        (Ranking(("x", "y")), BallotRules("ordinal", min_distinct=1), []),
    ],
)
def test_violations(content, rules, broken):
    assert rules_broken(content, rules) == broken


def test_rules_invariants():
    with pytest.raises(ValueError):
        BallotRules("cumulative", min_distinct=3, total_points=2)
    with pytest.raises(ValueError):
        BallotRules("approval", min_distinct=4, max_distinct=2)
    with pytest.raises(ValueError):
        BallotRules("plurality")


@pytest.mark.parametrize(
    "ranking, points",
    [(["X", "Y", "Z"], {"X": 3, "Y": 2, "Z": 1}), (["X"], {"X": 1}), ([], {})],
)
def test_modified_borda(ranking, points):
    assert modified_borda_points(ranking) == points
    assert modified_borda_points(Ranking(tuple(ranking))) == points


rankings = st.lists(st.text("abcdefgh", min_size=1, max_size=3), unique=True, max_size=12)


@given(rankings)
def test_borda_uses_each_score_once(rk):
    assert sorted(modified_borda_points(rk).values()) == list(range(1, len(rk) + 1))


@given(rankings, st.lists(st.text("ijklm", min_size=1, max_size=3), unique=True, min_size=1, max_size=5))
def test_ranking_more_raises_top_score(rk, more):
    longer = rk + [p for p in more if p not in rk]
    if not rk or len(longer) == len(rk):
        return
    assert modified_borda_points(longer)[rk[0]] > modified_borda_points(rk)[rk[0]]


def test_approval_equality_ignores_order():
    assert ApprovalSet(("a", "b")) == ApprovalSet(("b", "a"))
    assert ApprovalSet(("a", "b")) != ApprovalSet(("a", "c"))


def test_utilities_per_format():
    e = Election.build(10, {"A": 1, "B": 1, "C": 1}, {"v": ["A", "C"]})
    assert utilities(e) == {"v": {"A": 1, "C": 1}}
    e = Election.build(10, {"p1": 1, "p2": 1, "p3": 1}, {"v": {"p1": 8, "p2": 1, "p3": 1}},
                       vote_type="cumulative", rules=AARAU)
    assert utilities(e) == {"v": {"p1": 8, "p2": 1, "p3": 1}}
    e = Election.build(10, {"X": 1, "Y": 1}, {"v": ["X", "Y"]}, vote_type="ordinal")
    assert utilities(e) == {"v": {"X": 2, "Y": 1}}
    e = Election.build(10, {"X": 1, "Y": 1}, {"v": {"X": 4, "Y": 0}}, vote_type="scoring")
    assert utilities(e) == {"v": {"X": 4, "Y": 0}}


def test_utilities_rejects_invalid_ballots():
    e = Election.build(10, {"p1": 1}, {"v": {"p1": 10}}, vote_type="cumulative", rules=AARAU)
    with pytest.raises(InvalidBallotPresent) as err:
        utilities(e)
    assert err.value.voter_id == "v"
    assert utilities(e, validate=False) == {"v": {"p1": 10}}


@given(st.dictionaries(st.sampled_from("abcdef"), st.integers(1, 9), min_size=1))
def test_no_utility_off_ballot(points):
    e = Election.build(10, {p: 1 for p in "abcdefgh"}, {"v": points}, vote_type="cumulative")
    assert set(utilities(e)["v"]) == set(points)
