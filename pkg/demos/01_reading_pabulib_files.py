#! /usr/bin/env python3
"""This demo walks through reading and writing Pabulib ``.pb`` files.

A ``.pb`` file has three ``;``-separated sections: META (key/value pairs),
PROJECTS (one row per project) and VOTES (one row per voter).
"""

from pbfair import BallotRules, parse_election, parse_election_report, serialize_election
from pbfair.pabulib import UnknownProjectRef

TEXT = """META
key;value
description;A small cumulative-voting election
budget;1000
vote_type;cumulative
num_projects;4
num_votes;3
min_length;3
min_sum_points;10
max_sum_points;10
PROJECTS
project_id;cost;name;category;district
1;400;Playground;education;North
2;300;Bike racks;public transit;South
3;250;Benches;public space,welfare;North
4;600;Library corner;education;South
VOTES
voter_id;age;vote;points
a;34;1,2,3;8,1,1
b;51;2,3,4;4,3,3
c;19;4,1,3;5,4,1
"""


# =============================================================================
# Parsing is strict by default: anything off in the file raises an error that
# carries the offending line number.

e = parse_election(TEXT)
print(e.budget, e.vote_type, [p.id for p in e.projects])

# The META section also fixes the ballot rules. Here every voter must spread
# exactly 10 points over at least 3 projects, which is the Aarau profile.

assert e.rules == BallotRules.aarau()
print(e.ballots[0].content)

# Multi-label categories and districts land on the projects; unknown columns
# are kept per ballot in ``extra``.

print(e.project_map()["3"].categories, e.ballots[1].extra)


# =============================================================================
# A ballot naming a project that does not exist is an error in strict mode...

bad = TEXT.replace("c;19;4,1,3;5,4,1", "c;19;4,1,9;5,4,1")
try:
    parse_election(bad)
except UnknownProjectRef as exc:
    print("strict:", exc)

# ...and a dropped row plus a recorded issue in lenient mode.

e2, issues = parse_election_report(bad, mode="lenient")
print("lenient kept", len(e2.ballots), "ballots;", issues[0].message)


# =============================================================================
# Writing a file back reproduces it: META keys and column order are preserved.

assert serialize_election(e) == TEXT
assert parse_election(serialize_election(e)) == e
print("round trip ok")
