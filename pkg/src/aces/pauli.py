"""Pauli strings in the symplectic (x, z) bit representation.

Qubit ``i`` carries X iff ``x[i]``, Z iff ``z[i]`` and Y iff both.  Signs are
restricted to +1/-1: every quantity tracked by the protocol is a Hermitian
Pauli, so the +-i phases never show up.  Labels are written with qubit 0 as
the leftmost character, e.g. ``"XIZ"`` or ``"-YY"``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache

SINGLE_LABELS = "IXYZ"

# per-qubit symplectic code: x | (z << 1)
_CODE_OF = {"I": 0, "X": 1, "Z": 2, "Y": 3}
_LABEL_OF_CODE = {v: k for k, v in _CODE_OF.items()}
_LABEL_RE = re.compile(r"^([+-]?)([IXYZ]+)$")


@dataclass(frozen=True)
class PauliString:
    x: tuple[int, ...]
    z: tuple[int, ...]
    sign: int = 1

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise ValueError("x and z bit vectors must have equal length")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        object.__setattr__(self, "x", tuple(int(b) & 1 for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) & 1 for b in self.z))

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls((0,) * n, (0,) * n)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        return parse_label(label)

    @classmethod
    def from_codes(cls, codes, sign: int = 1) -> PauliString:
        """Build from per-qubit symplectic codes (``x | z << 1``)."""
        codes = [int(c) for c in codes]
        return cls(tuple(c & 1 for c in codes), tuple((c >> 1) & 1 for c in codes), sign)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def label(self) -> str:
        return format_label(self)

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(xi | (zi << 1) for xi, zi in zip(self.x, self.z))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, (xi, zi) in enumerate(zip(self.x, self.z)) if xi or zi)

    def unsigned(self) -> PauliString:
        return PauliString(self.x, self.z, 1) if self.sign != 1 else self

    def with_sign(self, sign: int) -> PauliString:
        return PauliString(self.x, self.z, sign)

    def restrict(self, qubits) -> PauliString:
        """Unsigned restriction of this string to ``qubits`` (in the given order)."""
        return PauliString(tuple(self.x[q] for q in qubits), tuple(self.z[q] for q in qubits))

    def char(self, qubit: int) -> str:
        return _LABEL_OF_CODE[self.x[qubit] | (self.z[qubit] << 1)]

    def __str__(self) -> str:
        return self.label


def parse_label(s: str) -> PauliString:
    m = _LABEL_RE.match(s)
    if m is None:
        raise ValueError(f"invalid Pauli label {s!r}; expected [+-]?[IXYZ]+")
    sign = -1 if m.group(1) == "-" else 1
    codes = [_CODE_OF[c] for c in m.group(2)]
    return PauliString.from_codes(codes, sign)


def format_label(p: PauliString) -> str:
    body = "".join(_LABEL_OF_CODE[c] for c in p.codes)
    return ("-" if p.sign == -1 else "") + body


def weight(p: PauliString) -> int:
    return sum(1 for xi, zi in zip(p.x, p.z) if xi or zi)


def _check_len(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise ValueError(f"Pauli length mismatch: {a.n} vs {b.n}")


def symplectic_inner(a: PauliString, b: PauliString) -> int:
    """Symplectic form ``a.x.b.z + a.z.b.x (mod 2)``; 0 iff ``a`` and ``b`` commute."""
    _check_len(a, b)
    s = 0
    for ax, az, bx, bz in zip(a.x, a.z, b.x, b.z):
        s ^= (ax & bz) ^ (az & bx)
    return s


def multiply_frames(a: PauliString, b: PauliString) -> PauliString:
    """Product of two frames modulo phase; the result always has sign +1."""
    _check_len(a, b)
    return PauliString(
        tuple(i ^ j for i, j in zip(a.x, b.x)),
        tuple(i ^ j for i, j in zip(a.z, b.z)),
    )


@lru_cache(maxsize=None)
def pauli_labels(k: int) -> tuple[str, ...]:
    """All ``4**k`` unsigned labels on ``k`` qubits, identity first.

    The order is lexicographic in ``IXYZ`` with qubit 0 most significant, so
    for ``k=1`` it is ``I, X, Y, Z`` and for ``k=2`` it starts
    ``II, IX, IY, IZ, XI, ...``.  Channel vectors are indexed this way.
    """
    return tuple("".join(t) for t in itertools.product(SINGLE_LABELS, repeat=k))


@lru_cache(maxsize=None)
def label_index(k: int) -> dict[str, int]:
    return {lab: i for i, lab in enumerate(pauli_labels(k))}


def all_paulis(k: int) -> list[PauliString]:
    return [parse_label(lab) for lab in pauli_labels(k)]


def code_to_label(c: int) -> str:
    return _LABEL_OF_CODE[int(c)]


def label_to_code(ch: str) -> int:
    return _CODE_OF[ch]
