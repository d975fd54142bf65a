import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aces.clifford import (
    Circuit,
    CliffordGate,
    GateSet,
    Operation,
    builtin_gateset,
    conjugate,
    generate_circuit,
    invert_circuit_section,
    propagate,
    random_line_matching,
    table_from_generators,
)
from aces.pauli import parse_label, pauli_labels
from oracles import UNITARY, circuit_unitary, conjugate_dense, embed, proportional_to_identity

GS = builtin_gateset()


def test_builtin_names():
    assert [g.name for g in GS.one_qubit] == ["I", "X", "Y", "Z", "H", "S"]
    assert [g.name for g in GS.two_qubit] == ["CZ"]


@pytest.mark.parametrize("gate", ["I", "X", "Y", "Z", "H", "S", "CZ"])
def test_tables_match_dense_conjugation(gate):
    g = GS[gate]
    for lab in pauli_labels(g.arity):
        assert g.table[lab] == conjugate_dense(UNITARY[gate], lab), (gate, lab)


def test_table_examples():
    h, s, cz = GS["H"], GS["S"], GS["CZ"]
    assert (h.table["X"], h.table["Z"], h.table["Y"]) == ((1, "Z"), (1, "X"), (-1, "Y"))
    assert (s.table["X"], s.table["Y"], s.table["Z"]) == ((1, "Y"), (-1, "X"), (1, "Z"))
    assert (cz.table["XI"], cz.table["IX"], cz.table["ZI"]) == ((1, "XZ"), (1, "ZX"), (1, "ZI"))


@pytest.mark.parametrize("gate,p,sign,out", [("H", "I", 1, "I"), ("CZ", "XX", 1, "YY"), ("Z", "X", -1, "X")])
def test_conjugate_examples(gate, p, sign, out):
    s, img = conjugate(GS[gate], p)
    assert (s, img.label) == (sign, out)


def test_conjugate_carries_input_sign_and_checks_arity():
    s, img = conjugate(GS["H"], parse_label("-X"))
    assert (s, img.label) == (-1, "Z")
    with pytest.raises(ValueError):
        conjugate(GS["H"], "XX")


def test_gate_validation():
    with pytest.raises(ValueError):  # not a bijection
        CliffordGate("bad", 1, {"I": (1, "I"), "X": (1, "X"), "Y": (1, "X"), "Z": (1, "Z")})
    table = {lab: (1, lab) for lab in pauli_labels(2)}
    table["IX"], table["ZZ"] = (1, "ZZ"), (1, "IX")  # XI commutes with IX but not with ZZ
    with pytest.raises(ValueError):
        CliffordGate("bad", 2, table)
    with pytest.raises(ValueError):
        GateSet((GS["H"], GS["H"]))


def test_gateset_round_trip(tmp_path):
    path = tmp_path / "gs.json"
    path.write_text(json.dumps({"gates": GS.to_list()}))
    loaded = GateSet.load(path)
    assert loaded == GS
    assert "CZ" in loaded and "T" not in loaded


def test_custom_gate_from_generators():
    # sqrt(X) up to phase: X -> X, Z -> -Y
    sx = CliffordGate("SX", 1, table_from_generators(1, {"X": (1, "X"), "Z": (-1, "Y")}))
    u = np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2
    for lab in "IXYZ":
        assert sx.table[lab] == conjugate_dense(u, lab)
    gs = GateSet(GS.one_qubit + (sx,), GS.two_qubit)
    assert gs.inverse_of("SX") == ("SX", 3)


def test_inverse_of():
    assert GS.inverse_of("H") == ("H", 1)
    assert GS.inverse_of("S") == ("S", 3)
    assert GS.inverse_of("CZ") == ("CZ", 1)


def test_invert_examples():
    assert invert_circuit_section([(Operation("H", (0,)),)]) == ((Operation("H", (0,)),),)
    assert invert_circuit_section([(Operation("S", (0,)),)]) == ((Operation("S", (0,), 3),),)
    m1 = (Operation("H", (0,)), Operation("X", (1,)))
    m2 = (Operation("CZ", (0, 1)),)
    assert invert_circuit_section([m1, m2]) == (m2, m1)


def test_propagate_examples():
    tr = propagate(Circuit(2, ()), "XZ")
    assert tr.output.label == "XZ" and tr.net_sign == 1 and tr.steps == ()
    tr = propagate(Circuit(2, ((Operation("H", (0,)),),)), "XI")
    assert tr.output.label == "ZI" and tr.output.sign == 1
    assert [(s.gate, s.qubits, s.pauli) for s in tr.steps] == [("H", (0,), "X")]


def test_propagate_skips_identity_inputs():
    c = Circuit(2, ((Operation("H", (0,)), Operation("S", (1,))),))
    tr = propagate(c, "XI")
    assert [s.gate for s in tr.steps] == ["H"]


def test_propagate_records_every_power():
    c = Circuit(1, ((Operation("S", (0,), 3),),))
    tr = propagate(c, "X")
    assert [s.pauli for s in tr.steps] == ["X", "Y", "X"]
    assert tr.output.unsigned().label == "Y" and tr.net_sign == -1


circuits = st.builds(
    lambda n, mh, mp, seed: generate_circuit(n, mh, mp, rng=seed),
    st.integers(1, 3),
    st.integers(0, 5),
    st.integers(0, 6),
    st.integers(0, 2**32 - 1),
)


@settings(max_examples=60, deadline=None)
@given(circuits, st.data())
def test_propagation_matches_dense_conjugation(c, data):
    label = data.draw(st.text("IXYZ", min_size=c.n_qubits, max_size=c.n_qubits))
    tr = propagate(c, label)
    u = circuit_unitary(c)
    sign, out = conjugate_dense(u, label)
    assert (tr.output.unsigned().label, tr.output.sign) == (out, sign)
    # net sign is the product of step signs
    assert np.prod([s.sign for s in tr.steps] or [1]) == tr.net_sign


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 2), st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_mirror_block_is_identity_unitary(n, m_half, seed):
    c = generate_circuit(n, m_half, 3, rng=seed)
    assert proportional_to_identity(circuit_unitary(c.sliced(0, 2 * m_half)))


def test_generate_examples():
    assert generate_circuit(2, 0, 0, rng=0).depth == 0
    c = generate_circuit(2, 4, 6, rng=0)
    assert c.depth == 14
    assert c.metadata == {"m_half": 4, "m_prime": 6, "seed": 0}
    assert generate_circuit(2, 4, 6, rng=5) == generate_circuit(2, 4, 6, rng=5)


def test_one_qubit_device_uses_single_qubit_layers():
    c = generate_circuit(1, 4, 6, rng=1)
    assert all(len(op.qubits) == 1 for op in c.operations())


def test_line_matching_is_maximal_and_uniform():
    rng = np.random.default_rng(0)
    # n=4 maximal matchings: {01,23}, {12}
    seen = {}
    for _ in range(4000):
        m = tuple(random_line_matching(4, rng))
        seen[m] = seen.get(m, 0) + 1
    assert set(seen) == {((0, 1), (2, 3)), ((1, 2),)}
    assert abs(seen[((1, 2),)] / 4000 - 0.5) < 0.05
    # n=5 has three maximal matchings
    found = {tuple(random_line_matching(5, rng)) for _ in range(500)}
    assert found == {((0, 1), (2, 3)), ((0, 1), (3, 4)), ((1, 2), (3, 4))}


def test_circuit_validation_and_serialization():
    with pytest.raises(ValueError):
        Circuit(2, ((Operation("H", (0,)), Operation("S", (0,))),))
    with pytest.raises(ValueError):
        Circuit(1, ((Operation("H", (1,)),),))
    c = generate_circuit(3, 4, 6, rng=3)
    assert Circuit.from_dict(json.loads(json.dumps(c.to_dict()))) == c
    assert (c.sliced(0, 8) + c.sliced(8)).moments == c.moments


def test_embed_oracle_sanity():
    # CZ is symmetric, so embedding on (1, 0) equals (0, 1)
    assert np.allclose(embed(UNITARY["CZ"], (1, 0), 2), UNITARY["CZ"])
