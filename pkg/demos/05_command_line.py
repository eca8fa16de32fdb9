#! /usr/bin/env python3
"""The ``pbfair`` command line, driven from Python.

Every command here can be typed in a shell as ``pbfair ...`` (or
``python -m pbfair ...``). Reports go to stdout or to files, each JSON
document with a manifest of inputs, settings and seeds.
"""

import json
import tempfile
from pathlib import Path

from pbfair.cli import main
from pbfair.pabulib import write_election
from pbfair.synthetic import generate_election

work = Path(tempfile.mkdtemp(prefix="pbfair-demo-"))
for seed, vt in enumerate(["approval", "cumulative", "ordinal"]):
    e = generate_election(seed, n_voters=80, n_projects=10, vote_type=vt, min_length=3, budget=4000)
    write_election(e, work / f"city_{seed}_{vt}.pb")
print("files in", work)


# =============================================================================
# validate: exit status 0 when every file parses.

print("validate ->", main(["validate", str(work)]))


# =============================================================================
# tally: one rule, one file. The tie-break can be switched by flag.

print("tally ->", main(["tally", str(work / "city_0_approval.pb"), "--rule", "greedy", "--out", "csv"]))


# =============================================================================
# compare: one report per election and a summary across them.

out = work / "reports"
main(["compare", str(work), "--rules", "greedy,mes-add1u", "--output-dir", str(out)])
print(sorted(p.name for p in out.iterdir()))
summary = json.loads((out / "summary.json").read_text())["summary"]
print({k: round(v, 3) if isinstance(v, float) else v for k, v in summary.items()})


# =============================================================================
# simulate: the abstention grid as CSV, with a manifest next to it.

grid = work / "grid.csv"
main(["simulate", str(work / "city_1_cumulative.pb"), "--abstention", "0,0.3",
      "--representation", "0,1", "--seeds", "5", "--output", str(grid)])
print(grid.read_text())
print(json.loads(Path(f"{grid}.manifest.json").read_text())["manifest"]["seeds"])
