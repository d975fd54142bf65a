"""Execution substrate: analytic circuit eigenvalues, twirling, and Pauli-frame sampling.

The sampler follows the usual Pauli-frame picture.  Every shot carries a
Pauli frame, i.e. the accumulated fault relative to the ideal Clifford
evolution.  At each gate application the frame picks up a fault drawn from
that location's channel and is then conjugated through the gate (the noisy
gate is the ideal gate composed after its error channel).  A shot's
measured parity is flipped iff the final frame anticommutes with the
measured Pauli.  All shots of a job are simulated together with numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .channels import NoiseModel, rates_to_eigenvalues
from .clifford import Circuit, GateSet, Operation, builtin_gateset, propagate, unpack_label
from .pauli import PauliString, label_to_code, pauli_labels

# single-qubit prep states -> (eigenvalue, Pauli they stabilise)
PREP_STATES: dict[str, tuple[int, str]] = {
    "0": (1, "Z"),
    "1": (-1, "Z"),
    "+": (1, "X"),
    "-": (-1, "X"),
    "+i": (1, "Y"),
    "-i": (-1, "Y"),
}


def _packed(label: str) -> int:
    out = 0
    for ch in label:
        out = (out << 2) | label_to_code(ch)
    return out


@lru_cache(maxsize=None)
def _label_packed(k: int) -> np.ndarray:
    """Packed symplectic code of every label in channel order."""
    return np.array([_packed(lab) for lab in pauli_labels(k)], dtype=np.int64)


def _eigenvalue_lookup(nm: NoiseModel):
    cache = {}

    def lookup(gate: str, qubits: tuple[int, ...], label: str) -> float:
        key = (gate, qubits)
        if key not in cache:
            cache[key] = rates_to_eigenvalues(nm.channel(gate, qubits))
        return cache[key][label]

    return lookup


# --------------------------------------------------------------------------- twirling


@dataclass(frozen=True)
class TwirlInsertion:
    before: str  # P_a on the gate support
    after: str  # P_a' with G P_a G^dagger = sign * P_a'
    sign: int


@dataclass(frozen=True)
class TwirledCircuit:
    """A base circuit plus one twirl insertion per gate application.

    ``insertions[i]`` belongs to the ``i``-th operation in moment order and
    holds one entry per repetition of that operation.  The insertions are
    noiseless frame updates; they never add noisy gate locations.
    """

    base: Circuit
    insertions: tuple[tuple[TwirlInsertion, ...], ...]
    twirl_id: int = 0

    @property
    def n_qubits(self) -> int:
        return self.base.n_qubits

    def explicit_circuit(self, gateset: GateSet | None = None) -> Circuit:
        """Spell the twirl out as Pauli gates in extra moments (for checking only)."""
        ops = list(self.base.operations())
        flat = iter(zip(ops, self.insertions))
        moments = []
        for moment in self.base.moments:
            pairs = [next(flat) for _ in moment]
            reps = max((op.power for op in moment), default=0)
            for r in range(reps):
                before, gates, after = [], [], []
                for op, ins in pairs:
                    if op.power <= r:
                        continue
                    gates.append(Operation(op.gate, op.qubits))
                    for q, ch in zip(op.qubits, ins[r].before):
                        if ch != "I":
                            before.append(Operation(ch, (q,)))
                    for q, ch in zip(op.qubits, ins[r].after):
                        if ch != "I":
                            after.append(Operation(ch, (q,)))
                moments += [tuple(before), tuple(gates), tuple(after)]
        return Circuit(self.base.n_qubits, tuple(moments))

    def to_dict(self) -> dict:
        return {
            "twirl_id": self.twirl_id,
            "insertions": [
                [{"before": t.before, "after": t.after, "sign": t.sign} for t in ins]
                for ins in self.insertions
            ],
        }

    @classmethod
    def from_dict(cls, base: Circuit, d: Mapping) -> TwirledCircuit:
        ins = tuple(
            tuple(TwirlInsertion(t["before"], t["after"], int(t["sign"])) for t in row)
            for row in d["insertions"]
        )
        return cls(base, ins, int(d.get("twirl_id", 0)))


def identity_twirl(c: Circuit) -> TwirledCircuit:
    ins = tuple(
        tuple(TwirlInsertion("I" * len(op.qubits), "I" * len(op.qubits), 1) for _ in range(op.power))
        for op in c.operations()
    )
    return TwirledCircuit(c, ins, 0)


def twirl_circuit(
    c: Circuit, rng: np.random.Generator | int | None = None, gateset: GateSet | None = None, twirl_id: int = 0
) -> TwirledCircuit:
    """Independent uniformly random G-twisted Pauli twirl of every gate application."""
    gs = gateset or builtin_gateset()
    for p in "XYZ":
        if p not in gs:
            raise ValueError("twirling needs the single-qubit Paulis X, Y, Z in the gate set")
    rng = np.random.default_rng(rng)
    rows = []
    for op in c.operations():
        g = gs[op.gate]
        labels = pauli_labels(g.arity)
        row = []
        for _ in range(op.power):
            pa = labels[rng.integers(len(labels))]
            sign, pa_out = g.table[pa]
            row.append(TwirlInsertion(pa, pa_out, sign))
        rows.append(tuple(row))
    return TwirledCircuit(c, tuple(rows), twirl_id)


def ensemble_plan(
    c: Circuit,
    n_twirls: int,
    shots_per_circuit: int,
    rng: np.random.Generator | int | None = None,
    gateset: GateSet | None = None,
) -> list[tuple[TwirledCircuit, int]]:
    """``n_twirls`` random twirls sharing the circuit's shot budget.

    Shots are floor-divided; the remainder goes one apiece to the first twirls.
    """
    if n_twirls < 1:
        raise ValueError("n_twirls must be >= 1")
    rng = np.random.default_rng(rng)
    base, rem = divmod(shots_per_circuit, n_twirls)
    return [
        (twirl_circuit(c, rng, gateset, twirl_id=t), base + (1 if t < rem else 0))
        for t in range(n_twirls)
    ]


# --------------------------------------------------------------------------- oracle


def analytic_circuit_eigenvalue(
    c: Circuit | TwirledCircuit,
    nm: NoiseModel,
    p: PauliString | str,
    gateset: GateSet | None = None,
) -> tuple[int, float]:
    """Exact ``(sign, Lambda)`` for probe ``p``: the product of gate eigenvalues along its path."""
    gs = gateset or builtin_gateset()
    lookup = _eigenvalue_lookup(nm)
    if isinstance(c, Circuit):
        trace = propagate(c, p, gs)
        lam = 1.0
        for step in trace.steps:
            lam *= lookup(step.gate, step.qubits, step.pauli)
        return trace.net_sign, lam

    if isinstance(p, str):
        p = PauliString.from_label(p)
    codes = list(p.codes)
    sign, lam = 1, 1.0
    for op, ins in zip(c.base.operations(), c.insertions):
        g = gs[op.gate]
        for t in ins:
            packed = 0
            for q in op.qubits:
                packed = (packed << 2) | codes[q]
            # conjugation by a Pauli only flips the sign
            tw = _packed(t.before)
            if _anticommute_packed(packed, tw):
                sign = -sign
            if packed:
                lam *= lookup(op.gate, op.qubits, unpack_label(packed, g.arity))
            sign *= int(g.code_sign[packed])
            packed = int(g.code_perm[packed])
            if _anticommute_packed(packed, _packed(t.after)):
                sign = -sign
            for q in reversed(op.qubits):
                codes[q] = packed & 3
                packed >>= 2
    return sign, lam


def _anticommute_packed(a: int, b: int) -> bool:
    s = 0
    while a or b:
        ca, cb = a & 3, b & 3
        s ^= ((ca & 1) & (cb >> 1)) ^ ((ca >> 1) & (cb & 1))
        a >>= 2
        b >>= 2
    return bool(s)


def heisenberg_pullback(c: Circuit, p: PauliString, gateset: GateSet | None = None) -> PauliString:
    """Signed Pauli ``C^dagger p C``."""
    gs = gateset or builtin_gateset()
    codes = list(p.codes)
    sign = p.sign
    for moment in reversed(c.moments):
        for op in moment:
            g = gs[op.gate]
            for _ in range(op.power):
                packed = 0
                for q in op.qubits:
                    packed = (packed << 2) | codes[q]
                src = int(g.inv_code_perm[packed])
                sign *= int(g.code_sign[src])
                for q in reversed(op.qubits):
                    codes[q] = src & 3
                    src >>= 2
    return PauliString.from_codes(codes, sign)


# --------------------------------------------------------------------------- jobs


@dataclass(frozen=True)
class PrepSpec:
    """Product eigenstate, one entry of :data:`PREP_STATES` per qubit, with its overall sign."""

    states: tuple[str, ...]
    sign: int

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        for s in self.states:
            if s not in PREP_STATES:
                raise ValueError(f"unknown prep state {s!r}")

    def expectation(self, q: PauliString) -> int:
        """Ideal expectation of the signed Pauli ``q`` on this product state (0 if random)."""
        value = q.sign
        for i in q.support:
            eig, pauli = PREP_STATES[self.states[i]]
            if q.char(i) != pauli:
                return 0
            value *= eig
        return value

    def to_dict(self) -> dict:
        return {"states": list(self.states), "sign": self.sign}

    @classmethod
    def from_dict(cls, d: Mapping) -> PrepSpec:
        return cls(tuple(d["states"]), int(d["sign"]))


@dataclass(frozen=True)
class ShotJob:
    job_id: str
    circuit: Circuit | TwirledCircuit
    prep: PrepSpec
    measured_pauli: PauliString
    measured_qubits: tuple[int, ...]
    shots: int
    rng_key: tuple[int, ...]
    circuit_id: int = 0
    twirl_id: int = 0
    probe_id: int = 0
    prep_id: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("a job needs at least one shot")
        if not set(self.measured_pauli.support) <= set(self.measured_qubits):
            raise ValueError("measured Pauli support must lie within the measured qubits")


@dataclass
class CountsTable:
    job_id: str
    circuit_id: int
    twirl_id: int
    prep_id: int
    measured_qubits: tuple[int, ...]
    counts: dict[str, int]
    probe_id: int = 0

    def __post_init__(self):
        self.measured_qubits = tuple(int(q) for q in self.measured_qubits)
        w = len(self.measured_qubits)
        for bits, n in self.counts.items():
            if len(bits) != w or any(b not in "01" for b in bits):
                raise ValueError(f"job {self.job_id}: malformed bitstring {bits!r} for {w} measured qubits")
            if int(n) < 0:
                raise ValueError(f"job {self.job_id}: negative count for {bits!r}")

    @property
    def shots(self) -> int:
        return int(sum(self.counts.values()))

    def parity_expectation(self, qubits: Sequence[int] | None = None) -> float:
        """Mean of ``(-1)**(number of ones on qubits)``; defaults to all measured qubits."""
        if self.shots == 0:
            raise ValueError(f"job {self.job_id}: no shots")
        pos = range(len(self.measured_qubits)) if qubits is None else [
            self.measured_qubits.index(q) for q in qubits
        ]
        total = 0
        for bits, n in self.counts.items():
            ones = sum(bits[i] == "1" for i in pos)
            total += -n if ones % 2 else n
        return total / self.shots

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "circuit_id": self.circuit_id,
            "twirl_id": self.twirl_id,
            "probe_id": self.probe_id,
            "prep_id": self.prep_id,
            "measured_qubits": list(self.measured_qubits),
            "counts": dict(sorted(self.counts.items())),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> CountsTable:
        return cls(
            job_id=str(d["job_id"]),
            circuit_id=int(d["circuit_id"]),
            twirl_id=int(d["twirl_id"]),
            prep_id=int(d["prep_id"]),
            measured_qubits=tuple(d["measured_qubits"]),
            counts={str(k): int(v) for k, v in d["counts"].items()},
            probe_id=int(d.get("probe_id", 0)),
        )


def job_rng(rng_key: Sequence[int]) -> np.random.Generator:
    """Independent stream per job; the key fixes it regardless of execution order."""
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in rng_key]))


def sample_frames(
    c: Circuit | TwirledCircuit,
    nm: NoiseModel,
    shots: int,
    rng: np.random.Generator,
    gateset: GateSet | None = None,
) -> np.ndarray:
    """Final Pauli frames of ``shots`` noisy runs as per-qubit symplectic codes, shape (shots, n)."""
    gs = gateset or builtin_gateset()
    tw = c if isinstance(c, TwirledCircuit) else identity_twirl(c)
    frame = np.zeros((shots, tw.n_qubits), dtype=np.int64)
    for op, ins in zip(tw.base.operations(), tw.insertions):
        g = gs[op.gate]
        ch = nm.channel(op.gate, op.qubits)
        cdf = np.cumsum(ch.probs)
        cdf[-1] = np.inf
        fault_codes = _label_packed(g.arity)
        cols = list(op.qubits)
        for t in ins:
            packed = np.zeros(shots, dtype=np.int64)
            for q in cols:
                packed = (packed << 2) | frame[:, q]
            packed ^= _packed(t.before)
            packed ^= fault_codes[np.searchsorted(cdf, rng.random(shots), side="right")]
            packed = g.code_perm[packed]
            packed ^= _packed(t.after)
            for q in reversed(cols):
                frame[:, q] = packed & 3
                packed = packed >> 2
    return frame


def sample_shots(job: ShotJob, nm: NoiseModel, gateset: GateSet | None = None) -> CountsTable:
    """Monte Carlo counts for one job, deterministic in ``job.rng_key``.

    Only the parity of the measured Pauli carries information, so each shot's
    bitstring is drawn uniformly among those with the simulated parity.
    """
    gs = gateset or builtin_gateset()
    rng = job_rng(job.rng_key)
    base = job.circuit.base if isinstance(job.circuit, TwirledCircuit) else job.circuit
    meas = job.measured_pauli.unsigned()
    ideal = job.prep.expectation(heisenberg_pullback(base, meas, gs))

    frame = sample_frames(job.circuit, nm, job.shots, rng, gs)
    mx, mz = np.array(meas.x), np.array(meas.z)
    fx, fz = frame & 1, frame >> 1
    flip = ((fx * mz + fz * mx).sum(axis=1) & 1).astype(np.int64)

    if ideal == 0:
        odd = rng.integers(0, 2, size=job.shots)
    else:
        odd = flip ^ (1 if ideal < 0 else 0)

    w = len(job.measured_qubits)
    parity_pos = [job.measured_qubits.index(q) for q in meas.support]
    bits = rng.integers(0, 2, size=(job.shots, w))
    if parity_pos:
        last = parity_pos[-1]
        others = [i for i in parity_pos if i != last]
        bits[:, last] = (odd + bits[:, others].sum(axis=1)) & 1
    values = bits @ (1 << np.arange(w - 1, -1, -1)) if w else np.zeros(job.shots, dtype=np.int64)
    hist = np.bincount(values, minlength=2**w)
    counts = {format(v, f"0{w}b") if w else "": int(n) for v, n in enumerate(hist) if n}
    return CountsTable(
        job_id=job.job_id,
        circuit_id=job.circuit_id,
        twirl_id=job.twirl_id,
        prep_id=job.prep_id,
        measured_qubits=job.measured_qubits,
        counts=counts,
        probe_id=job.probe_id,
    )
