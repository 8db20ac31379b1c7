#!/usr/bin/env python3
"""Regenerate the CSV fixtures from the installed ptcycle package.

The sweep and ladder fixtures come from the `ptcycle` command line; the
trajectory fixture is written with the library's own CSV writer on a small
chain so the file stays review-sized. Run from this directory.
"""

import math
import subprocess
from pathlib import Path

HERE = Path(__file__).parent

for which in (1, 2, 3):
    subprocess.run(
        ["ptcycle", "sweep", "--config", str(HERE / f"fig{which}_sweep.json"),
         "--out", str(HERE / f"fig{which}.csv")],
        check=True)

subprocess.run(
    ["ptcycle", "ws", "--config", str(HERE / "ws_model.json"),
     "--force", "0.05", "--out", str(HERE / "ws.csv")],
    check=True)

from ptcycle import builtin_lattice, evolve, single_site_initial  # noqa: E402
from ptcycle.lattice_dynamics import write_trajectory_csv  # noqa: E402

t1 = 2.0 * math.pi / 0.2
traj = evolve(builtin_lattice(2), 0.25, 0.2, single_site_initial(100),
              2.0 * t1, t1 / 16.0)
write_trajectory_csv(HERE / "dynamics.csv", traj)
print("fixtures regenerated")
