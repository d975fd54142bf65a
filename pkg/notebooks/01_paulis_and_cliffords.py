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
# # Pauli strings and Clifford propagation
#
# Paulis are stored as symplectic bit vectors with a sign. A Clifford gate is
# a lookup table from each Pauli on its support to a signed Pauli, so pushing a
# Pauli through a circuit never touches a matrix.

# %%
from aces import builtin_gateset, conjugate, generate_circuit, parse_label, propagate, symplectic_inner

p = parse_label("-XZ")
print(p.x, p.z, p.sign, p.label)
print("X and Z anticommute:", symplectic_inner(parse_label("X"), parse_label("Z")))

# %% [markdown]
# The built-in gate set has six single-qubit gates plus CZ. Each table
# entry says where a Pauli goes and with which sign.

# %%
gs = builtin_gateset()
for name in ("H", "S", "CZ"):
    g = gs[name]
    print(name, {k: v for k, v in g.table.items() if k not in ("I", "II")})

print(conjugate(gs["CZ"], "XX"))

# %% [markdown]
# ## Characterization circuits
#
# A circuit is a mirror block `M M^dagger` followed by random moments. The
# default is four moments in `M`, so eight mirror moments plus six random ones.

# %%
c = generate_circuit(2, 4, 6, rng=11)
print("depth", c.depth)
for i, moment in enumerate(c.moments):
    print(i, [(op.gate, op.qubits, op.power) for op in moment])

# %% [markdown]
# The mirror block maps every Pauli back to itself with a plus sign.
# The random tail then scrambles it. The trace lists every noisy gate the
# Pauli passes through, together with the Pauli seen at that gate's input.

# %%
mirror = c.sliced(0, 8)
print(propagate(mirror, "XY").output)

tr = propagate(c, "XY")
print("output", tr.output, "net sign", tr.net_sign)
for step in tr.steps:
    print(f"  {step.gate:>2} on {step.qubits}: sees {step.pauli}")
