#! /usr/bin/env python3
"""Comparing greedy and equal shares on an Aarau-shaped election.

``aarau_like`` generates a synthetic instance with the size of Aarau's 2023
vote (1703 voters, 33 projects, 50,000 budget, five districts, 10 points
over at least 3 projects). It is *not* the real data, so the numbers below
only illustrate the report, they do not reproduce the published result.
"""

import time

from pbfair import compare_rules
from pbfair.synthetic import aarau_like

e = aarau_like()
print(f"{len(e.ballots)} ballots, {len(e.projects)} projects, budget {e.budget}")


# =============================================================================
# compare_rules runs every rule, measures each outcome and compares pairs.

t0 = time.perf_counter()
report = compare_rules(e, ["greedy", "mes-add1u", "phragmen"], name="aarau-like")
print(f"three rules in {time.perf_counter() - t0:.2f} s\n")

print(f"{'rule':10s} {'winners':>7s} {'used':>6s} {'satisf.':>8s} {'repr.':>6s} {'cost/B':>7s}")
for r in report.rules:
    print(
        f"{r.label:10s} {r.winner_count:7d} {r.budget_utilization:6.1%} "
        f"{r.voter_satisfaction:8.1%} {r.point_representation:6.1%} {r.mean_winner_cost_share:7.1%}"
    )


# =============================================================================
# A representation gain such as "+21.9%" can be read as a difference in points or as
# a relative increase; the pair comparison carries both.

p = report.pair("greedy", "mes-add1u")
print(f"\nrepresentation: {100 * p.representation_delta_absolute:+.1f} points, "
      f"{100 * p.representation_delta_relative:+.1f}% relative")
print(f"winner overlap (jaccard) {p.overlap:.2f}, winner-count ratio {p.winner_count_ratio:.2f}")


# =============================================================================
# Spatial spread: winners per district, and how evenly they are spread
# (normalized entropy, 1 = uniform).

for r in report.rules:
    dc = r.district_coverage
    print(f"{r.label:10s} {dc.counts} entropy {dc.entropy:.2f}")
print("districts gaining winners under equal shares:", p.districts_gaining)

print("\nimpact areas (cost share) under mes-add1u:")
for label, s in report.rule("mes-add1u").category_shares.items():
    print(f"  {label:15s} {s['cost_share']:.1%}")
