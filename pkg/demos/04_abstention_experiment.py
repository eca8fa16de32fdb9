#! /usr/bin/env python3
"""How stable are outcomes when voters stay home?

Some voters abstain; a share of the abstainers is then "represented" by an
imputed ballot. A noisy copy of their true ballot stands in for a model
that predicts them imperfectly. Each scenario's winners are compared with
the full-turnout winners by the Jaccard index.
"""

import numpy as np

from pbfair.abstention import PredictorConfig, run_grid, sample_abstainers
from pbfair.synthetic import generate_election

e = generate_election(500, n_voters=40, n_projects=8, budget=2000, n_districts=3)


# =============================================================================
# Sampling is seeded, so a scenario can always be replayed.

participants, abstainers = sample_abstainers(e, 0.3, seed=7)
print(len(participants), "vote,", len(abstainers), "abstain:", abstainers)
assert sample_abstainers(e, 0.3, seed=7)[1] == abstainers


# =============================================================================
# A grid over abstention and representation levels, 20 seeds per cell. The
# predictor swaps each choice with probability 0.3.

cfg = PredictorConfig("noisy_copy", bias=0.3)
grid = run_grid(e, [0.0, 0.2, 0.4], [0.0, 0.5, 1.0], cfg, seeds=range(20))

print("\nmean jaccard (rows: abstention, columns: representation 0 / 0.5 / 1)")
for rule in grid.rules:
    print(rule)
    for a in grid.abstention_levels:
        row = [grid.cell(rule, a, r).mean_jaccard for r in grid.representation_levels]
        print(f"  {a:.1f}  " + "  ".join(f"{x:.3f}" for x in row))

# Nobody abstaining means nothing can change.

assert all(grid.cell(r, 0.0, x).mean_jaccard == 1.0 for r in grid.rules for x in (0.0, 0.5, 1.0))


# =============================================================================
# The aggregate the resilience claim is about: over all cells and seeds.

for rule in grid.rules:
    print(f"{rule:10s} mean jaccard {grid.mean_jaccard(rule):.3f}")

# The same grid as CSV, ready for any plotting tool.

print()
print(grid.to_csv().splitlines()[0])
jac = np.array([c.mean_jaccard for c in grid.cells])
print(f"{len(grid.cells)} cells, jaccard range {jac.min():.3f} .. {jac.max():.3f}")
