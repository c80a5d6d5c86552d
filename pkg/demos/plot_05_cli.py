"""
The command-line workflow
=========================

``msburden simulate`` writes a trial and its truths, ``msburden analyze``
runs the configured sweep. Here both are driven from Python through the
same entry point the console script uses.
"""

import json
import tempfile
from pathlib import Path

from msburden.cli import main

work = Path(tempfile.mkdtemp())
scenario = {
    "n_per_arm": 500,
    "rates_treated": [0.25, 0.2, 0.2],
    "rates_control": [0.3, 0.3, 0.3],
    "death_rate_treated": 0.03,
    "death_rate_control": 0.04,
    "dropout_rate": 0.03,
    "seed": 3,
    "labels": ["40%", "ESRD", "death"],
}
(work / "sim.json").write_text(json.dumps({"scenario": scenario, "tau": 6, "n_mc": 100000}))
main(["simulate", str(work / "sim.json"), "--out", str(work / "sim")])
main(["validate", str(work / "sim" / "data.csv")])

analysis = {
    "input": "sim/data.csv",
    "sensitivity_subsets": [["40%", "ESRD", "death"], ["ESRD", "death"]],
}
(work / "analysis.json").write_text(json.dumps(analysis))
main(["analyze", str(work / "analysis.json"), "--boot", "200", "--seed", "1", "--out", str(work / "out")])

print((work / "out" / "sensitivity.csv").read_text())
print(sorted(p.name for p in (work / "out" / "subset_1").iterdir()))
