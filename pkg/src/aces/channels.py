"""Pauli channels, their eigenvalues, and per-location noise models."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .clifford import GateSet
from .pauli import label_index, parse_label, pauli_labels, symplectic_inner

Location = tuple[str, tuple[int, ...]]


@lru_cache(maxsize=None)
def sign_matrix(k: int) -> np.ndarray:
    """``W[a, b] = (-1)**<a, b>`` over the ``4**k`` support Paulis."""
    paulis = [parse_label(lab) for lab in pauli_labels(k)]
    w = np.array([[1 - 2 * symplectic_inner(a, b) for b in paulis] for a in paulis], dtype=float)
    w.setflags(write=False)
    return w


def _as_vector(values, k: int) -> np.ndarray:
    if isinstance(values, Mapping):
        idx = label_index(k)
        vec = np.zeros(4**k)
        for lab, v in values.items():
            vec[idx[lab]] = v
        return vec
    vec = np.asarray(values, dtype=float).copy()
    if vec.shape != (4**k,):
        raise ValueError(f"expected a vector of length {4**k}, got shape {vec.shape}")
    return vec


@dataclass(frozen=True, eq=False)
class PauliChannel:
    """Probability vector over the ``4**k`` Paulis, identity first.

    ``validate=False`` admits reconstructed channels whose entries can be
    slightly negative; use :meth:`projected` to turn them into a valid channel.
    """

    k: int
    probs: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        probs = _as_vector(self.probs, self.k)
        if self.validate:
            if np.any(probs < 0):
                raise ValueError("Pauli channel has negative probabilities")
            if abs(probs.sum() - 1.0) > 1e-12:
                raise ValueError(f"Pauli channel probabilities sum to {probs.sum()!r}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other):
        if not isinstance(other, PauliChannel):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.probs, other.probs)

    __hash__ = None

    @classmethod
    def identity(cls, k: int) -> PauliChannel:
        p = np.zeros(4**k)
        p[0] = 1.0
        return cls(k, p)

    @classmethod
    def from_rates(cls, k: int, rates: Mapping[str, float]) -> PauliChannel:
        """Channel from its non-identity rates; the identity takes the remainder."""
        p = _as_vector(rates, k)
        p[0] = 1.0 - p[1:].sum()
        return cls(k, p)

    @property
    def labels(self) -> tuple[str, ...]:
        return pauli_labels(self.k)

    @property
    def is_valid(self) -> bool:
        return bool(np.all(self.probs >= 0) and abs(self.probs.sum() - 1) <= 1e-12)

    @property
    def negative_mass(self) -> float:
        return float(-self.probs[self.probs < 0].sum())

    def projected(self) -> PauliChannel:
        """Clip negative entries to zero and renormalise."""
        p = np.clip(self.probs, 0.0, None)
        return PauliChannel(self.k, p / p.sum())

    def to_dict(self) -> dict:
        return {"k": self.k, "probs": {lab: float(v) for lab, v in zip(self.labels, self.probs)}}

    @classmethod
    def from_dict(cls, d: Mapping, validate: bool = True) -> PauliChannel:
        return cls(int(d["k"]), _as_vector(d["probs"], int(d["k"])), validate=validate)


@dataclass(frozen=True, eq=False)
class EigenvalueVector:
    k: int
    lambdas: np.ndarray

    def __post_init__(self):
        lam = _as_vector(self.lambdas, self.k)
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    def __eq__(self, other):
        if not isinstance(other, EigenvalueVector):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.lambdas, other.lambdas)

    __hash__ = None

    def __getitem__(self, label: str) -> float:
        return float(self.lambdas[label_index(self.k)[label]])


def rates_to_eigenvalues(ch: PauliChannel) -> EigenvalueVector:
    return EigenvalueVector(ch.k, sign_matrix(ch.k) @ ch.probs)


def eigenvalues_to_rates(ev: EigenvalueVector) -> PauliChannel:
    """Inverse transform ``p_a = 4**-k * sum_b (-1)**<a,b> lambda_b``.

    Noisy eigenvalue estimates can give small negative rates; they are kept
    (see :attr:`PauliChannel.negative_mass`) rather than clipped.
    """
    p = sign_matrix(ev.k) @ ev.lambdas / 4**ev.k
    return PauliChannel(ev.k, p, validate=False)


def tvd(p, q) -> float:
    p = np.asarray(p.probs if isinstance(p, PauliChannel) else p, dtype=float)
    q = np.asarray(q.probs if isinstance(q, PauliChannel) else q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def process_infidelity(ch: PauliChannel) -> float:
    """Total probability of a non-identity error, ``1 - p_I``."""
    return 1.0 - float(ch.probs[0])


def gate_locations(gs: GateSet, n_qubits: int) -> list[Location]:
    """One-qubit gates on every qubit, then two-qubit gates on every nearest-neighbour pair."""
    locs: list[Location] = [(g.name, (q,)) for g in gs.one_qubit for q in range(n_qubits)]
    locs += [(g.name, (q, q + 1)) for g in gs.two_qubit for q in range(n_qubits - 1)]
    return locs


class NoiseModel(dict):
    """Mapping ``(gate name, qubits) -> PauliChannel``."""

    def __setitem__(self, loc, ch):
        name, qubits = loc
        qubits = tuple(qubits)
        if ch.k != len(qubits):
            raise ValueError(f"channel on {loc} has support {ch.k}, expected {len(qubits)}")
        super().__setitem__((name, qubits), ch)

    def __init__(self, items: Mapping | Iterable = ()):
        super().__init__()
        pairs = items.items() if isinstance(items, Mapping) else items
        for loc, ch in pairs:
            self[loc] = ch

    def channel(self, gate: str, qubits) -> PauliChannel:
        try:
            return self[(gate, tuple(qubits))]
        except KeyError:
            raise KeyError(f"noise model has no channel for {gate} on {tuple(qubits)}") from None

    def eigenvalues(self) -> dict[Location, EigenvalueVector]:
        return {loc: rates_to_eigenvalues(ch) for loc, ch in self.items()}

    @classmethod
    def noiseless(cls, locations: Iterable[Location]) -> NoiseModel:
        return cls((loc, PauliChannel.identity(len(loc[1]))) for loc in locations)

    def to_list(self) -> list[dict]:
        return [
            {"gate": g, "qubits": list(q), "channel": ch.to_dict()} for (g, q), ch in self.items()
        ]

    @classmethod
    def from_list(cls, items: Iterable[Mapping]) -> NoiseModel:
        return cls(
            ((d["gate"], tuple(d["qubits"])), PauliChannel.from_dict(d["channel"])) for d in items
        )


def random_noise_model(
    gs: GateSet,
    locations: Iterable[Location] | int,
    strength: float,
    rng: np.random.Generator | int | None = None,
) -> NoiseModel:
    """Random non-uniform Pauli noise on each location.

    The total error of a location is drawn from ``U(0.5 s, 1.5 s)`` and split
    across the non-identity Paulis in proportion to independent ``U(0, 1)``
    draws.  ``locations`` may be a qubit count, in which case every gate of
    ``gs`` is placed on every qubit / nearest-neighbour pair.
    """
    if not 0 <= strength < 0.5:
        raise ValueError("strength must lie in [0, 0.5)")
    rng = np.random.default_rng(rng)
    if isinstance(locations, (int, np.integer)):
        locations = gate_locations(gs, int(locations))
    model = NoiseModel()
    for name, qubits in locations:
        k = len(qubits)
        if gs[name].arity != k:
            raise ValueError(f"location {name}{qubits} does not match gate arity")
        weights = rng.random(4**k - 1)
        total = rng.uniform(0.5 * strength, 1.5 * strength)
        p = np.empty(4**k)
        p[1:] = total * weights / weights.sum()
        p[0] = 1.0 - p[1:].sum()
        model[(name, qubits)] = PauliChannel(k, p)
    return model
