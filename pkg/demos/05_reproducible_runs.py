"""
Reproducible runs and self-describing output
============================================

Every realization draws from a random stream keyed by the master seed and its
own index, so results do not depend on how work is spread over processes.
The command-line tool embeds its configuration in each output file, so a file
can be fed back to reproduce itself.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from qspeckle import EnsembleSpec, InputState, run_ensemble

spec = EnsembleSpec(12, 0.5, realizations=1000, master_seed=2024)
one = run_ensemble(spec, InputState.thermal(1), workers=1)
two = run_ensemble(spec, InputState.thermal(1), workers=2)
same = json.dumps(one.to_dict()["estimates"]) == json.dumps(two.to_dict()["estimates"])
print("identical estimates with 1 and 2 workers:", same)

# %%
cli = [sys.executable, "-m", "qspeckle.cli"]
with tempfile.TemporaryDirectory() as tmp:
    first = Path(tmp) / "run.csv"
    subprocess.run(cli + ["simulate", "--state", "fock", "--n", "2", "--modes", "12",
                          "--realizations", "500", "--seed", "5", "-o", str(first)], check=True)
    print(first.read_text())
    again = Path(tmp) / "again.csv"
    subprocess.run(cli + ["simulate", "--config", str(first), "-o", str(again)], check=True)
    body = lambda p: [line for line in p.read_text().splitlines() if not line.startswith("# config")]
    print("re-run from the embedded config matches:", body(first) == body(again))
