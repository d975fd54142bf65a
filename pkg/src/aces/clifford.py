"""Clifford gates as Pauli conjugation tables, circuits, and Pauli propagation.

A gate is stored as the signed permutation it induces on the ``4**arity``
Paulis of its support.  Circuits are ordered moments of :class:`Operation`
objects; an operation may carry a ``power`` so that, for example, the inverse
of ``S`` can be realised as three consecutive ``S`` applications on the same
qubit within a single moment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .pauli import (
    PauliString,
    label_to_code,
    parse_label,
    pauli_labels,
    symplectic_inner,
)


def _packed_code(label: str) -> int:
    """Pack per-qubit symplectic codes of an unsigned label, qubit 0 most significant."""
    out = 0
    for ch in label:
        out = (out << 2) | label_to_code(ch)
    return out


def _phase_product(a: tuple[int, list, list], b: tuple[int, list, list]):
    # Paulis as i^e * prod_q X^x Z^z; moving Z past X costs a factor -1
    e1, x1, z1 = a
    e2, x2, z2 = b
    cross = sum(zi & xj for zi, xj in zip(z1, x2))
    return (
        (e1 + e2 + 2 * cross) % 4,
        [i ^ j for i, j in zip(x1, x2)],
        [i ^ j for i, j in zip(z1, z2)],
    )


def _to_phase_form(sign: int, p: PauliString):
    n_y = sum(xi & zi for xi, zi in zip(p.x, p.z))
    # Y = i X Z
    e = (n_y + (0 if sign == 1 else 2)) % 4
    return e, list(p.x), list(p.z)


def _from_phase_form(e: int, x, z) -> tuple[int, PauliString]:
    n_y = sum(xi & zi for xi, zi in zip(x, z))
    e = (e - n_y) % 4
    if e not in (0, 2):
        raise ValueError("conjugation produced a non-Hermitian Pauli")
    return (1 if e == 0 else -1), PauliString(tuple(x), tuple(z))


def table_from_generators(arity: int, images: Mapping[str, tuple[int, str]]) -> dict:
    """Complete a conjugation table from the images of the X_q and Z_q generators.

    ``images`` maps generator labels (``"X"``, ``"Z"`` or ``"XI"``, ``"IZ"``, ...)
    to ``(sign, label)``.
    """
    gens = {}
    for q in range(arity):
        for ch in "XZ":
            lab = "".join(ch if i == q else "I" for i in range(arity))
            sign, img = images[lab]
            gens[(q, ch)] = _to_phase_form(sign, parse_label(img))
    table = {}
    for lab in pauli_labels(arity):
        p = parse_label(lab)
        n_y = sum(xi & zi for xi, zi in zip(p.x, p.z))
        acc = (n_y % 4, [0] * arity, [0] * arity)
        for q in range(arity):
            if p.x[q]:
                acc = _phase_product(acc, gens[(q, "X")])
            if p.z[q]:
                acc = _phase_product(acc, gens[(q, "Z")])
        sign, img = _from_phase_form(*acc)
        table[lab] = (sign, img.label)
    return table


@dataclass(frozen=True)
class CliffordGate:
    name: str
    arity: int
    table: Mapping[str, tuple[int, str]] = field(repr=False)
    # signed permutation over packed symplectic codes, used by the simulators
    code_perm: np.ndarray = field(init=False, repr=False, compare=False)
    code_sign: np.ndarray = field(init=False, repr=False, compare=False)
    inv_code_perm: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ValueError(f"gate {self.name!r}: arity must be 1 or 2")
        labels = pauli_labels(self.arity)
        table = {str(k): (int(v[0]), str(v[1])) for k, v in self.table.items()}
        if set(table) != set(labels):
            raise ValueError(f"gate {self.name!r}: table must cover all {len(labels)} Paulis")
        images = [table[lab][1] for lab in labels]
        if sorted(images) != sorted(labels):
            raise ValueError(f"gate {self.name!r}: table is not a bijection")
        ident = "I" * self.arity
        if table[ident] != (1, ident):
            raise ValueError(f"gate {self.name!r}: identity must map to +identity")
        for a in labels:
            for b in labels:
                pa, pb = parse_label(a), parse_label(b)
                qa, qb = parse_label(table[a][1]), parse_label(table[b][1])
                if symplectic_inner(pa, pb) != symplectic_inner(qa, qb):
                    raise ValueError(f"gate {self.name!r}: table does not preserve commutation")
        object.__setattr__(self, "table", table)
        size = 4**self.arity
        perm = np.zeros(size, dtype=np.int64)
        sign = np.ones(size, dtype=np.int8)
        for lab, (s, img) in table.items():
            perm[_packed_code(lab)] = _packed_code(img)
            sign[_packed_code(lab)] = s
        inv = np.empty_like(perm)
        inv[perm] = np.arange(size)
        object.__setattr__(self, "code_perm", perm)
        object.__setattr__(self, "code_sign", sign)
        object.__setattr__(self, "inv_code_perm", inv)

    def __hash__(self):
        return hash((self.name, self.arity, tuple(sorted(self.table.items()))))

    def __eq__(self, other):
        if not isinstance(other, CliffordGate):
            return NotImplemented
        return (self.name, self.arity, self.table) == (other.name, other.arity, other.table)

    def compose_table(self, other: CliffordGate) -> dict:
        """Table of ``other`` applied after ``self``."""
        out = {}
        for lab, (s1, mid) in self.table.items():
            s2, img = other.table[mid]
            out[lab] = (s1 * s2, img)
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "arity": self.arity,
            "table": {k: {"sign": s, "label": v} for k, (s, v) in self.table.items()},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> CliffordGate:
        table = {k: (int(v["sign"]), str(v["label"])) for k, v in d["table"].items()}
        return cls(str(d["name"]), int(d["arity"]), table)


def conjugate(g: CliffordGate, p: PauliString | str) -> tuple[int, PauliString]:
    """Conjugate a support Pauli through ``g``; the input's own sign is carried along."""
    if isinstance(p, str):
        p = parse_label(p)
    if p.n != g.arity:
        raise ValueError(f"gate {g.name!r} has arity {g.arity}, got a {p.n}-qubit Pauli")
    s, img = g.table[p.unsigned().label]
    return s * p.sign, parse_label(img)


_ONE_QUBIT_IMAGES = {
    "I": {"X": (1, "X"), "Z": (1, "Z")},
    "X": {"X": (1, "X"), "Z": (-1, "Z")},
    "Y": {"X": (-1, "X"), "Z": (-1, "Z")},
    "Z": {"X": (-1, "X"), "Z": (1, "Z")},
    "H": {"X": (1, "Z"), "Z": (1, "X")},
    "S": {"X": (1, "Y"), "Z": (1, "Z")},
}
_CZ_IMAGES = {"XI": (1, "XZ"), "IX": (1, "ZX"), "ZI": (1, "ZI"), "IZ": (1, "IZ")}


@dataclass(frozen=True)
class GateSet:
    one_qubit: tuple[CliffordGate, ...]
    two_qubit: tuple[CliffordGate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "one_qubit", tuple(self.one_qubit))
        object.__setattr__(self, "two_qubit", tuple(self.two_qubit))
        names = [g.name for g in self.gates]
        if len(set(names)) != len(names):
            raise ValueError("gate names must be unique")
        for g in self.one_qubit:
            if g.arity != 1:
                raise ValueError(f"{g.name!r} listed as one-qubit but has arity {g.arity}")
        for g in self.two_qubit:
            if g.arity != 2:
                raise ValueError(f"{g.name!r} listed as two-qubit but has arity {g.arity}")

    @property
    def gates(self) -> tuple[CliffordGate, ...]:
        return self.one_qubit + self.two_qubit

    def __getitem__(self, name: str) -> CliffordGate:
        for g in self.gates:
            if g.name == name:
                return g
        raise KeyError(f"gate {name!r} not in gate set")

    def __contains__(self, name: str) -> bool:
        return any(g.name == name for g in self.gates)

    def inverse_of(self, name: str, max_order: int = 64) -> tuple[str, int]:
        """Express the inverse of ``name`` as ``(gate, power)`` using gates of this set.

        Self-inverse gates map to themselves; otherwise another gate whose table
        is the exact inverse is preferred; failing that, the gate's own power
        ``order - 1``.
        """
        g = self[name]
        ident = {lab: (1, lab) for lab in pauli_labels(g.arity)}
        if g.compose_table(g) == ident:
            return name, 1
        for h in self.gates:
            if h.arity == g.arity and g.compose_table(h) == ident:
                return h.name, 1
        acc = dict(g.table)
        for k in range(2, max_order + 1):
            acc = {lab: (s * g.table[mid][0], g.table[mid][1]) for lab, (s, mid) in acc.items()}
            if acc == ident:
                return name, k - 1
        raise ValueError(f"gate {name!r} has no expressible inverse in this gate set")

    def to_list(self) -> list[dict]:
        return [g.to_dict() for g in self.gates]

    @classmethod
    def from_list(cls, gates: Iterable[Mapping]) -> GateSet:
        parsed = [CliffordGate.from_dict(d) for d in gates]
        return cls(
            tuple(g for g in parsed if g.arity == 1),
            tuple(g for g in parsed if g.arity == 2),
        )

    @classmethod
    def load(cls, path) -> GateSet:
        with open(path) as fh:
            data = json.load(fh)
        if isinstance(data, Mapping):
            data = data["gates"]
        return cls.from_list(data)


@lru_cache(maxsize=1)
def builtin_gateset() -> GateSet:
    """``{I, X, Y, Z, H, S}`` plus ``CZ``."""
    one = tuple(
        CliffordGate(name, 1, table_from_generators(1, imgs))
        for name, imgs in _ONE_QUBIT_IMAGES.items()
    )
    cz = CliffordGate("CZ", 2, table_from_generators(2, _CZ_IMAGES))
    return GateSet(one, (cz,))


@dataclass(frozen=True)
class Operation:
    gate: str
    qubits: tuple[int, ...]
    power: int = 1

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.power < 1:
            raise ValueError("operation power must be >= 1")

    def to_dict(self) -> dict:
        d = {"gate": self.gate, "qubits": list(self.qubits)}
        if self.power != 1:
            d["power"] = self.power
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> Operation:
        return cls(str(d["gate"]), tuple(d["qubits"]), int(d.get("power", 1)))


Moment = tuple[Operation, ...]


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    moments: tuple[Moment, ...] = ()
    metadata: Mapping | None = field(default=None, compare=False)

    def __post_init__(self):
        moments = tuple(tuple(m) for m in self.moments)
        object.__setattr__(self, "moments", moments)
        for m in moments:
            seen: set[int] = set()
            for op in m:
                for q in op.qubits:
                    if not 0 <= q < self.n_qubits:
                        raise ValueError(f"qubit {q} out of range for {self.n_qubits} qubits")
                    if q in seen:
                        raise ValueError(f"qubit {q} used twice in one moment")
                    seen.add(q)

    @property
    def depth(self) -> int:
        return len(self.moments)

    def operations(self) -> Iterable[Operation]:
        for m in self.moments:
            yield from m

    def locations(self) -> set[tuple[str, tuple[int, ...]]]:
        return {(op.gate, op.qubits) for op in self.operations()}

    def sliced(self, start: int, stop: int | None = None) -> Circuit:
        return Circuit(self.n_qubits, self.moments[start:stop])

    def __add__(self, other: Circuit) -> Circuit:
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate circuits on different qubit counts")
        return Circuit(self.n_qubits, self.moments + other.moments)

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "moments": [[op.to_dict() for op in m] for m in self.moments],
            "metadata": dict(self.metadata) if self.metadata else {},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> Circuit:
        moments = tuple(tuple(Operation.from_dict(o) for o in m) for m in d["moments"])
        return cls(int(d["n_qubits"]), moments, d.get("metadata") or None)


@dataclass(frozen=True)
class TraceStep:
    gate: str
    qubits: tuple[int, ...]
    pauli: str  # support restriction seen at the gate input
    sign: int


@dataclass(frozen=True)
class PropagationTrace:
    input: PauliString
    steps: tuple[TraceStep, ...]
    output: PauliString
    net_sign: int


def propagate(c: Circuit, p: PauliString | str, gateset: GateSet | None = None) -> PropagationTrace:
    """Push ``p`` through ``c`` gate by gate, recording every non-identity gate input."""
    gs = gateset or builtin_gateset()
    if isinstance(p, str):
        p = parse_label(p)
    if p.n != c.n_qubits:
        raise ValueError(f"Pauli has {p.n} qubits, circuit has {c.n_qubits}")
    codes = list(p.codes)
    steps = []
    net = 1
    for moment in c.moments:
        for op in moment:
            g = gs[op.gate]
            for _ in range(op.power):
                packed = 0
                for q in op.qubits:
                    packed = (packed << 2) | codes[q]
                if packed == 0:
                    break  # identity stays identity for the remaining powers
                s = int(g.code_sign[packed])
                steps.append(TraceStep(op.gate, op.qubits, unpack_label(packed, g.arity), s))
                net *= s
                out = int(g.code_perm[packed])
                for q in reversed(op.qubits):
                    codes[q] = out & 3
                    out >>= 2
    output = PauliString.from_codes(codes, p.sign * net)
    return PropagationTrace(p, tuple(steps), output, net)


@lru_cache(maxsize=None)
def unpack_label(packed: int, k: int) -> str:
    chars = []
    for _ in range(k):
        chars.append("IXZY"[packed & 3])
        packed >>= 2
    return "".join(reversed(chars))


def invert_circuit_section(moments: Sequence[Moment], gateset: GateSet | None = None) -> tuple[Moment, ...]:
    """Reverse the moments and replace every operation by its inverse."""
    gs = gateset or builtin_gateset()
    out = []
    for moment in reversed(tuple(moments)):
        new = []
        for op in moment:
            name, power = gs.inverse_of(op.gate)
            if name == op.gate and power > 1:
                # g^p has inverse g^(order - p); order = power + 1
                order = power + 1
                new_power = (-op.power) % order
                if new_power == 0:
                    continue
                new.append(Operation(name, op.qubits, new_power))
            else:
                new.append(Operation(name, op.qubits, op.power * power))
        out.append(tuple(new))
    return tuple(out)


def _count_line_matchings(n: int):
    # tilings of n sites by pairs and singles with no two adjacent singles
    counts = {(n, False): 1, (n, True): 1}
    for i in range(n - 1, -1, -1):
        for prev_single in (False, True):
            c = 0
            if i + 2 <= n:
                c += counts[(i + 2, False)]
            if not prev_single:
                c += counts[(i + 1, True)]
            counts[(i, prev_single)] = c
    return counts


def random_line_matching(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniformly random maximal matching of nearest-neighbour pairs on a line of ``n`` qubits."""
    counts = _count_line_matchings(n)
    pairs = []
    i, prev_single = 0, False
    while i < n:
        take_pair = counts[(i + 2, False)] if i + 2 <= n else 0
        take_single = 0 if prev_single else counts[(i + 1, True)]
        if rng.random() * (take_pair + take_single) < take_pair:
            pairs.append((i, i + 1))
            i, prev_single = i + 2, False
        else:
            i, prev_single = i + 1, True
    return pairs


def _one_qubit_layer(n: int, gs: GateSet, rng) -> Moment:
    names = [g.name for g in gs.one_qubit]
    return tuple(Operation(names[rng.integers(len(names))], (q,)) for q in range(n))


def _two_qubit_layer(n: int, gs: GateSet, rng) -> Moment:
    if n < 2 or not gs.two_qubit:
        return _one_qubit_layer(n, gs, rng)
    names = [g.name for g in gs.two_qubit]
    return tuple(
        Operation(names[rng.integers(len(names))], pair) for pair in random_line_matching(n, rng)
    )


def generate_circuit(
    n_qubits: int,
    m_half: int,
    m_prime: int,
    gateset: GateSet | None = None,
    rng: np.random.Generator | int | None = None,
) -> Circuit:
    """Random characterization circuit: mirror block ``M M^dagger`` then ``m_prime`` random moments.

    ``M`` alternates one-qubit layers (a random gate on every qubit) and
    two-qubit layers (random gates on a random maximal nearest-neighbour
    matching), starting with a one-qubit layer.  Each moment of the random tail
    is a one- or two-qubit layer with equal probability.
    """
    if n_qubits < 1 or m_half < 0 or m_prime < 0:
        raise ValueError("need n_qubits >= 1 and non-negative depths")
    gs = gateset or builtin_gateset()
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    mirror = [
        _one_qubit_layer(n_qubits, gs, rng) if i % 2 == 0 else _two_qubit_layer(n_qubits, gs, rng)
        for i in range(m_half)
    ]
    tail = [
        _two_qubit_layer(n_qubits, gs, rng) if rng.random() < 0.5 else _one_qubit_layer(n_qubits, gs, rng)
        for _ in range(m_prime)
    ]
    moments = tuple(mirror) + invert_circuit_section(mirror, gs) + tuple(tail)
    meta = {"m_half": m_half, "m_prime": m_prime, "seed": None if seed is None else int(seed)}
    return Circuit(n_qubits, moments, meta)
