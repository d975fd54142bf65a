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
# # Pauli channels, eigenvalues and twirling
#
# A Pauli channel is a probability vector over Paulis. Its eigenvalues follow
# from a sign transform, and the same transform (scaled by `4^-k`) inverts it.

# %%
import numpy as np

from aces import (
    NoiseModel,
    PauliChannel,
    analytic_circuit_eigenvalue,
    builtin_gateset,
    eigenvalues_to_rates,
    generate_circuit,
    random_noise_model,
    rates_to_eigenvalues,
    twirl_circuit,
)

dephasing = PauliChannel.from_rates(1, {"Z": 0.02})
ev = rates_to_eigenvalues(dephasing)
print(dict(zip(dephasing.labels, ev.lambdas)))
print(eigenvalues_to_rates(ev).probs)

# %% [markdown]
# Estimated eigenvalues carry noise, and then the inverse transform can return
# slightly negative rates. They are kept and reported instead of clipped.

# %%
noisy = ev.lambdas + np.array([0, 0.001, -0.002, 0.0005])
from aces.channels import EigenvalueVector

rec = eigenvalues_to_rates(EigenvalueVector(1, noisy))
print(rec.probs, "negative mass", rec.negative_mass)
print("projected", rec.projected().probs)

# %% [markdown]
# ## Circuit eigenvalues
#
# A probe Pauli picks up one gate eigenvalue per noisy gate it passes through.
# Twirling each gate with a random Pauli and its conjugate leaves that product
# unchanged, which is what lets shots from different twirls be pooled.

# %%
gs = builtin_gateset()
model = random_noise_model(gs, 2, 0.01, rng=3)
c = generate_circuit(2, 4, 6, rng=3)
for probe in ("XI", "IZ", "YX"):
    base = analytic_circuit_eigenvalue(c, model, probe)
    twirled = [analytic_circuit_eigenvalue(twirl_circuit(c, rng=s), model, probe) for s in range(20)]
    spread = max(abs(t[1] - base[1]) for t in twirled)
    print(probe, base, "max deviation over 20 twirls", spread)

# %% [markdown]
# Noise models are plain mappings from a gate location to a channel.

# %%
print(len(model), "locations")
print(model.channel("CZ", (0, 1)).probs.round(5))
print(NoiseModel.noiseless([("H", (0,))]))
