"""Participatory budgeting rules, metrics and abstention experiments.

Quick start::

    from pbfair import read_election, utilitarian_greedy, equal_shares_add1u
    e = read_election("city_2023.pb")
    print(utilitarian_greedy(e).winners)
    print(equal_shares_add1u(e).winners)
"""

__version__ = "0.1.0"

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
from pbfair.election import Election, ElectionMeta, Project
from pbfair.pabulib import (
    load_directory,
    parse_election,
    parse_election_report,
    read_election,
    serialize_election,
    write_election,
)
from pbfair.rules import (
    RULES,
    NoBallots,
    Outcome,
    compute_rho,
    equal_shares_add1u,
    method_of_equal_shares,
    phragmen_sequential,
    run_rule,
    utilitarian_greedy,
)
from pbfair.metrics import (
    compare_rules,
    category_shares,
    district_coverage,
    mean_winner_cost_share,
    point_representation,
    voter_satisfaction,
)
from pbfair.abstention import (
    PredictorConfig,
    impute_ballots,
    run_grid,
    sample_abstainers,
)
