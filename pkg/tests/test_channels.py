import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aces.channels import (
    EigenvalueVector,
    NoiseModel,
    PauliChannel,
    eigenvalues_to_rates,
    gate_locations,
    process_infidelity,
    random_noise_model,
    rates_to_eigenvalues,
    sign_matrix,
    tvd,
)
from aces.clifford import builtin_gateset
from oracles import channel_eigenvalues_dense

GS = builtin_gateset()


def random_channel(rng, k):
    p = rng.dirichlet(np.ones(4**k))
    return PauliChannel(k, p)


@pytest.mark.parametrize("k", [1, 2])
def test_transform_matches_dense_oracle(k):
    rng = np.random.default_rng(k)
    for _ in range(25):
        ch = random_channel(rng, k)
        dense = channel_eigenvalues_dense(ch.probs, k)
        assert np.allclose(rates_to_eigenvalues(ch).lambdas, dense, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([1, 2]), st.integers(0, 2**32 - 1))
def test_round_trip(k, seed):
    ch = random_channel(np.random.default_rng(seed), k)
    back = eigenvalues_to_rates(rates_to_eigenvalues(ch))
    assert np.max(np.abs(back.probs - ch.probs)) < 1e-12


def test_sign_matrix_is_self_inverse_up_to_scale():
    for k in (1, 2):
        w = sign_matrix(k)
        assert np.allclose(w @ w, 4**k * np.eye(4**k))


def test_eigenvalue_examples():
    lam = rates_to_eigenvalues(PauliChannel.identity(1)).lambdas
    assert np.allclose(lam, 1)
    p = 0.01
    dep = PauliChannel.from_rates(1, {"X": p, "Y": p, "Z": p})
    ev = rates_to_eigenvalues(dep)
    assert np.allclose([ev["X"], ev["Y"], ev["Z"]], 1 - 4 * p)
    q = 0.03
    deph = PauliChannel.from_rates(1, {"Z": q})
    ev = rates_to_eigenvalues(deph)
    assert np.allclose([ev["X"], ev["Y"], ev["Z"]], [1 - 2 * q, 1 - 2 * q, 1])
    back = eigenvalues_to_rates(EigenvalueVector(1, [1, 1 - 2 * q, 1 - 2 * q, 1]))
    assert np.allclose(back.probs, [1 - q, 0, 0, q])
    assert np.allclose(eigenvalues_to_rates(EigenvalueVector(2, np.ones(16))).probs, np.eye(16)[0])


def test_noisy_eigenvalues_keep_negative_rates():
    ch = eigenvalues_to_rates(EigenvalueVector(1, [1, 1.0, 1.0, 0.99]))
    assert ch.probs.min() < 0
    assert ch.negative_mass > 0
    assert not ch.is_valid
    proj = ch.projected()
    assert proj.is_valid and abs(proj.probs.sum() - 1) < 1e-12


def test_channel_validation():
    with pytest.raises(ValueError):
        PauliChannel(1, [0.5, 0.6, 0, 0])
    with pytest.raises(ValueError):
        PauliChannel(1, [1.1, -0.1, 0, 0])
    with pytest.raises(ValueError):
        PauliChannel(1, [1, 0, 0])
    ch = PauliChannel.from_rates(2, {"XZ": 0.02})
    assert PauliChannel.from_dict(ch.to_dict()) == ch
    assert ch != PauliChannel.identity(2)


def test_tvd_examples():
    v = [0.25, 0.25, 0.5]
    assert tvd(v, v) == 0
    assert tvd([1, 0], [0, 1]) == 1
    assert abs(tvd([0.9, 0.1], [0.8, 0.2]) - 0.1) < 1e-15
    with pytest.raises(ValueError):
        tvd([1, 0], [1, 0, 0])


def test_process_infidelity():
    assert process_infidelity(PauliChannel.identity(1)) == 0
    assert abs(process_infidelity(PauliChannel(1, [0.99, 0.01, 0, 0])) - 0.01) < 1e-15
    dep = PauliChannel.from_rates(1, {"X": 0.001, "Y": 0.001, "Z": 0.001})
    assert abs(process_infidelity(dep) - 0.003) < 1e-15


def test_gate_locations_order():
    locs = gate_locations(GS, 2)
    assert len(locs) == 13
    assert locs[:2] == [("I", (0,)), ("I", (1,))]
    assert locs[-1] == ("CZ", (0, 1))
    assert len(gate_locations(GS, 1)) == 6


def test_random_noise_model():
    zero = random_noise_model(GS, 2, 0.0, rng=0)
    assert all(np.allclose(ch.probs, np.eye(4**ch.k)[0]) for ch in zero.values())
    m = random_noise_model(GS, 3, 0.01, rng=1)
    assert len(m) == 6 * 3 + 2
    assert all(ch.probs[0] >= 0.95 for ch in m.values())
    assert all(0.005 <= process_infidelity(ch) <= 0.015 for ch in m.values())
    again = random_noise_model(GS, 3, 0.01, rng=1)
    assert all(np.array_equal(m[loc].probs, again[loc].probs) for loc in m)
    with pytest.raises(ValueError):
        random_noise_model(GS, [("CZ", (0,))], 0.01, rng=0)


def test_noise_model_round_trip_and_errors():
    m = random_noise_model(GS, 2, 0.01, rng=2)
    back = NoiseModel.from_list(m.to_list())
    assert all(np.array_equal(back[loc].probs, m[loc].probs) for loc in m)
    with pytest.raises(KeyError):
        m.channel("H", (5,))
    with pytest.raises(ValueError):
        m[("H", (0, 1))] = PauliChannel.identity(1)
    assert NoiseModel.noiseless([("H", (0,))]).channel("H", [0]).probs[0] == 1
