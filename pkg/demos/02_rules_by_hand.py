#! /usr/bin/env python3
"""The four voting rules on an election small enough to check by hand.

Budget 300. Project A costs 300, B and C cost 150 each. Voters v1 and v2
approve A and C; v3 approves A and B.
"""

from fractions import Fraction

from pbfair import (
    Election,
    compute_rho,
    equal_shares_add1u,
    method_of_equal_shares,
    phragmen_sequential,
    utilitarian_greedy,
)

e = Election.build(
    300,
    {"A": 300, "C": 150, "B": 150},
    {"v1": ["A", "C"], "v2": ["A", "C"], "v3": ["A", "B"]},
)


def show(outcome):
    steps = ", ".join(f"{s.project} (key {s.key}, {s.phase})" for s in outcome.audit)
    print(f"{outcome.rule:10s} winners {outcome.winners} spend {outcome.spend}: {steps}")


# =============================================================================
# Utilitarian greedy sorts projects by votes (A 3, C 2, B 1) and takes what
# fits. A alone uses the whole budget.

show(utilitarian_greedy(e))


# =============================================================================
# Equal shares gives each voter B/n = 100. A project's price rho is what each
# supporter pays per unit of utility. C costs 150 over two supporters, so
# rho = 75; A would need 100 from all three.

print("rho(C) =", compute_rho(150, [100, 100], [1, 1]))
print("rho(A) =", compute_rho(300, [100, 100, 100], [1, 1, 1]))
show(method_of_equal_shares(e))

# After buying C, v1 and v2 hold 25 each and v3 holds 100: nothing else is
# affordable. With endowment 150, B becomes affordable for v3 alone.

show(method_of_equal_shares(e, endowment_per_voter=150))


# =============================================================================
# Add1U raises the endowment one unit at a time while the result stays within
# budget, then fills what is left greedily.

o = equal_shares_add1u(e)
show(o)
print("endowment used:", o.endowment_used)
assert o.winners == ["C", "B"]


# =============================================================================
# Sequential Phragmén: voters earn money at rate 1 and a project is bought as
# soon as its supporters can pay. Purchase times are exact fractions.

show(phragmen_sequential(e))
assert phragmen_sequential(e).audit[0].key == Fraction(150, 2)
