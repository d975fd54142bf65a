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
# # Learning gate noise from circuit eigenvalues
#
# Five random circuits on two qubits give 75 probe rows. Each row is one
# linear equation in the logarithms of the 51 unknown gate eigenvalues. A
# single least-squares solve returns all of them.

# %%
import numpy as np

from aces import RunConfig, make_plan, run_characterization

cfg = RunConfig(seed=0, shots_per_circuit=100_000)
plan = make_plan(cfg)
a = plan.design.matrix
print("rows x columns", a.shape, "rank", plan.design.rank.rank, "condition", round(plan.design.rank.condition, 1))
print("jobs", len(plan.jobs))

# %% [markdown]
# Run the pipeline on the simulator with a random noise model drawn from the
# same seed, then compare with the ground truth.

# %%
res = run_characterization(cfg)
rep = res.report
print(f"mean |lambda_hat - lambda| = {rep.mean_abs_error:.5f}")
print(f"mean TVD per gate          = {rep.mean_tvd:.5f}")
for loc, ch in list(rep.channels.items())[:4] + [list(rep.channels.items())[-1]]:
    true = rep.true_channels[loc]
    print(loc, "error rate", round(1 - ch.probs[0], 5), "true", round(1 - true.probs[0], 5), "tvd", round(rep.tvds[loc], 5))

# %% [markdown]
# The reported standard errors come from propagating the shot noise of every
# row through the solve. Their scale matches the observed errors.

# %%
z = (rep.lambdas - rep.true_lambdas) / rep.lambda_stderr
print("rms z-score", np.sqrt(np.mean(z**2)).round(3))

# %% [markdown]
# ## Accuracy against shot budget

# %%
for shots in (10_000, 100_000):
    maes, tvds = [], []
    for seed in range(3):
        r = run_characterization(RunConfig(seed=seed, shots_per_circuit=shots)).report
        maes.append(r.mean_abs_error)
        tvds.append(r.mean_tvd)
    print(f"{shots:>7} shots: mean eigenvalue error {np.mean(maes):.5f}, mean TVD {np.mean(tvds):.5f}")

# %% [markdown]
# An optional figure of recovered against true eigenvalues, if matplotlib is
# installed.

# %%
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.errorbar(range(len(rep.lambdas)), rep.lambdas - rep.true_lambdas, yerr=rep.lambda_stderr, fmt=".")
    ax.axhline(0, color="k", lw=0.5)
    ax.set_xlabel("parameter index")
    ax.set_ylabel("lambda_hat - lambda")
    fig.tight_layout()
    fig.savefig("eigenvalue_errors.png", dpi=120)
    print("saved eigenvalue_errors.png")
