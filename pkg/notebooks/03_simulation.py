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
# # Pauli-frame simulation
#
# Each shot carries a Pauli frame. Before every gate a fault is drawn from that
# gate's channel and multiplied into the frame, and then the gate conjugates
# the frame. A measured parity flips when the final frame anticommutes with
# the measured Pauli. The whole ensemble of shots is vectorized with numpy.

# %%
import math

import numpy as np

from aces import analytic_circuit_eigenvalue, builtin_gateset, generate_circuit, propagate, random_noise_model
from aces.pauli import parse_label
from aces.simulate import PrepSpec, ShotJob, sample_shots

gs = builtin_gateset()
c = generate_circuit(3, 4, 6, rng=21)
model = random_noise_model(gs, 3, 0.01, rng=21)

# %% [markdown]
# Prepare the `+1` eigenstate of the probe, run the circuit, and measure its
# image. Comparing the parity average with the exact product of eigenvalues
# gives a z-score per probe.

# %%
shots = 100_000
for label in ("XII", "IZI", "IYX", "ZZI"):
    p = parse_label(label)
    out = propagate(c, p).output.unsigned()
    prep = PrepSpec(tuple({"X": "+", "Y": "+i", "Z": "0", "I": "0"}[ch] for ch in label), 1)
    job = ShotJob(label, c, prep, out, out.support, shots, (7, len(label), hash(label) % 1000))
    sign, lam = analytic_circuit_eigenvalue(c, model, p)
    est = sign * sample_shots(job, model).parity_expectation()
    sigma = math.sqrt((1 - lam**2) / shots)
    print(f"{label} -> {out.label}: exact {lam:.5f}  sampled {est:.5f}  z = {(est - lam) / sigma:+.2f}")

# %% [markdown]
# Jobs are seeded by their own key, so results do not depend on the order in
# which jobs run.

# %%
job = ShotJob("a", c, PrepSpec(("+", "0", "0"), 1), parse_label("XII"), (0,), 1000, (1, 2, 3))
print(sample_shots(job, model).counts == sample_shots(job, model).counts)
