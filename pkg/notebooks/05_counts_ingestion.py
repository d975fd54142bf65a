# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Running on external hardware
#
# The toolkit never talks to a device. A plan lists every job with its
# preparation gates, circuit, twirl and measurement basis. Whatever executes
# the jobs writes one counts file per job, and `aces ingest` checks them
# against the plan before solving. This walk-through uses the simulator as a
# stand-in for the external executor.

# %%
import json
import shutil
import tempfile
from pathlib import Path

from aces.cli import main

work = Path(tempfile.mkdtemp())
cfg = work / "config.json"
cfg.write_text(json.dumps({"shots_per_circuit": 20000, "n_twirls": 0, "seed": 1}))
run = work / "run"
main(["plan", "--config", str(cfg), "--out", str(run)])

# %% [markdown]
# One job as an external executor sees it. `n_twirls = 0` runs the circuits
# untwirled, the usual mode on hardware.

# %%
plan = json.loads((run / "plan.json").read_text())
job = plan["jobs"][0]
print(json.dumps({k: job[k] for k in ("job_id", "prep", "prep_gates", "measured_pauli", "measure_gates", "shots")}, indent=1))

# %% [markdown]
# Produce counts elsewhere and copy them into a directory of our choice.

# %%
main(["simulate", "--out", str(run)])
external = work / "from_device"
shutil.copytree(run / "counts", external)
print(json.loads(next(external.iterdir()).read_text()))

# %% [markdown]
# Ingestion names any missing job and exits with status 3.

# %%
missing = sorted(external.iterdir())[0]
saved = missing.read_text()
missing.unlink()
print("exit", main(["ingest", str(external), "--out", str(run)]))
missing.write_text(saved)
print("exit", main(["ingest", str(external), "--out", str(run)]))

# %% [markdown]
# Solve, then look at the plot-data CSVs.

# %%
main(["solve", "--out", str(run)])
print((run / "eigenvalues.csv").read_text().splitlines()[:3])
print(sorted(p.name for p in run.iterdir()))
shutil.rmtree(work)
