import pytest
from hypothesis import given
from hypothesis import strategies as st

from aces.pauli import (
    PauliString,
    all_paulis,
    format_label,
    label_index,
    multiply_frames,
    parse_label,
    pauli_labels,
    symplectic_inner,
    weight,
)
from oracles import commute_dense, dense_pauli

labels = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))
pairs = st.integers(1, 4).flatmap(
    lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n))
)


@pytest.mark.parametrize("label,w", [("III", 0), ("XIZ", 2), ("YYY", 3)])
def test_weight(label, w):
    assert weight(parse_label(label)) == w


@pytest.mark.parametrize("a,b,expected", [("X", "X", 0), ("X", "Z", 1), ("XZ", "ZX", 0)])
def test_symplectic_inner_examples(a, b, expected):
    assert symplectic_inner(parse_label(a), parse_label(b)) == expected
    assert commute_dense(a, b) == (expected == 0)


@given(pairs)
def test_symplectic_inner_matches_matrix_commutator(pair):
    a, b = pair
    assert (symplectic_inner(parse_label(a), parse_label(b)) == 0) == commute_dense(a, b)


def test_symplectic_inner_length_mismatch():
    with pytest.raises(ValueError):
        symplectic_inner(parse_label("X"), parse_label("XX"))


@pytest.mark.parametrize("a,b,out", [("X", "X", "I"), ("X", "Z", "Y"), ("XI", "IZ", "XZ")])
def test_multiply_frames(a, b, out):
    prod = multiply_frames(parse_label(a), parse_label(b))
    assert prod.label == out
    assert prod.sign == 1


@given(pairs)
def test_multiply_frames_matches_matrix_product_up_to_phase(pair):
    a, b = pair
    prod = dense_pauli(a) @ dense_pauli(b)
    ref = dense_pauli(multiply_frames(parse_label(a), parse_label(b)).label)
    # the product equals the frame times a phase in {1, -1, i, -i}
    phase = prod[0][abs(ref[0]).argmax()] / ref[0][abs(ref[0]).argmax()]
    assert abs(abs(phase) - 1) < 1e-12
    assert (abs(prod - phase * ref) < 1e-12).all()


def test_parse_examples():
    p = parse_label("XIZ")
    assert (p.x, p.z, p.sign) == ((1, 0, 0), (0, 0, 1), 1)
    q = parse_label("-YY")
    assert (q.x, q.z, q.sign) == ((1, 1), (1, 1), -1)
    with pytest.raises(ValueError):
        parse_label("AB")
    with pytest.raises(ValueError):
        parse_label("")


@given(labels, st.sampled_from(["", "+", "-"]))
def test_label_round_trip(label, prefix):
    p = parse_label(prefix + label)
    expected = ("-" if prefix == "-" else "") + label
    assert format_label(p) == expected
    assert parse_label(format_label(p)) == p


def test_pauli_string_helpers():
    p = PauliString.from_label("XYZ")
    assert p.n == 3
    assert p.support == (0, 1, 2)
    assert p.restrict((0, 2)).label == "XZ"
    assert p.with_sign(-1).unsigned() == p
    assert PauliString.identity(2).label == "II"
    assert PauliString.from_codes(p.codes) == p
    with pytest.raises(ValueError):
        PauliString((1,), (0, 1))
    with pytest.raises(ValueError):
        PauliString((1,), (0,), sign=2)


def test_label_orderings():
    assert pauli_labels(1) == ("I", "X", "Y", "Z")
    assert pauli_labels(2)[:5] == ("II", "IX", "IY", "IZ", "XI")
    assert len(all_paulis(2)) == 16
    assert all(label_index(2)[lab] == i for i, lab in enumerate(pauli_labels(2)))
