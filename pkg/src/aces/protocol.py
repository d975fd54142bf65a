"""Probes, circuit eigenvalue estimation, the design matrix and the noise solve.

Each circuit eigenvalue is a product of gate eigenvalues along the path of a
probe Pauli, so its logarithm is a sum of log gate eigenvalues.  Stacking one
such equation per (circuit, probe) gives a linear system ``A x = b`` whose
least-squares solution yields every gate eigenvalue, and hence every Pauli
error rate, at once.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from .channels import (
    EigenvalueVector,
    Location,
    NoiseModel,
    PauliChannel,
    eigenvalues_to_rates,
    gate_locations,
    random_noise_model,
    rates_to_eigenvalues,
    sign_matrix,
    tvd,
)
from .clifford import Circuit, GateSet, builtin_gateset, generate_circuit, propagate
from .config import RunConfig
from .pauli import PauliString, parse_label, pauli_labels, weight
from .simulate import (
    CountsTable,
    PrepSpec,
    ShotJob,
    TwirledCircuit,
    ensemble_plan,
    identity_twirl,
    sample_shots,
)

CLAMP_FLOOR = 1e-6
RANK_RTOL = 1e-10
DEFAULT_MAX_CONDITION = 1e3

Column = tuple[str, tuple[int, ...], str]

# time-ordered gates taking |0> to each prep state
PREP_GATES: dict[str, tuple[str, ...]] = {
    "0": (),
    "1": ("X",),
    "+": ("H",),
    "-": ("X", "H"),
    "+i": ("H", "S"),
    "-i": ("H", "S", "S", "S"),
}
# time-ordered gates rotating each Pauli's eigenbasis onto the computational basis
MEASURE_GATES: dict[str, tuple[str, ...]] = {
    "X": ("H",),
    "Y": ("S", "S", "S", "H"),
    "Z": (),
}
_EIGENSTATES = {"X": ("+", "-"), "Y": ("+i", "-i"), "Z": ("0", "1")}


class RankDeficientError(ValueError):
    def __init__(self, message: str, diagnostics: RankDiagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


# --------------------------------------------------------------------------- parameters


@dataclass(frozen=True)
class ParameterIndex:
    """Ordered gate-eigenvalue parameters ``(gate, qubits, non-identity Pauli)``."""

    columns: tuple[Column, ...]
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cols = tuple((str(g), tuple(int(q) for q in qs), str(p)) for g, qs, p in self.columns)
        lookup = {c: i for i, c in enumerate(cols)}
        if len(lookup) != len(cols):
            raise ValueError("duplicate parameter columns")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "_lookup", lookup)

    @classmethod
    def from_locations(cls, locations: Iterable[Location]) -> ParameterIndex:
        cols = []
        for gate, qubits in locations:
            cols += [(gate, tuple(qubits), lab) for lab in pauli_labels(len(qubits))[1:]]
        return cls(tuple(cols))

    @classmethod
    def for_device(cls, gs: GateSet, n_qubits: int) -> ParameterIndex:
        return cls.from_locations(gate_locations(gs, n_qubits))

    def __len__(self) -> int:
        return len(self.columns)

    def column(self, gate: str, qubits: Sequence[int], pauli: str) -> int:
        try:
            return self._lookup[(gate, tuple(qubits), pauli)]
        except KeyError:
            raise KeyError(f"unknown location {gate} on {tuple(qubits)} (Pauli {pauli})") from None

    def __getitem__(self, i: int) -> Column:
        return self.columns[i]

    def locations(self) -> list[Location]:
        seen: dict[Location, None] = {}
        for g, qs, _ in self.columns:
            seen.setdefault((g, qs), None)
        return list(seen)

    def location_columns(self, loc: Location) -> list[int]:
        """Columns of ``loc`` in channel label order (identity excluded)."""
        g, qs = loc
        return [self._lookup[(g, tuple(qs), lab)] for lab in pauli_labels(len(qs))[1:]]

    def to_list(self) -> list[dict]:
        return [{"gate": g, "qubits": list(qs), "pauli": p} for g, qs, p in self.columns]

    @classmethod
    def from_list(cls, items: Iterable[Mapping]) -> ParameterIndex:
        return cls(tuple((d["gate"], tuple(d["qubits"]), d["pauli"]) for d in items))


# --------------------------------------------------------------------------- probes


@dataclass(frozen=True)
class Probe:
    pauli: PauliString
    output: PauliString  # unsigned image C(P)
    sign: int

    @property
    def label(self) -> str:
        return self.pauli.label

    def to_dict(self) -> dict:
        return {"pauli": self.pauli.label, "output": self.output.label, "sign": self.sign}

    @classmethod
    def from_dict(cls, d: Mapping) -> Probe:
        return cls(parse_label(d["pauli"]), parse_label(d["output"]), int(d["sign"]))


def _candidate_probes(n: int, max_weight: int) -> list[PauliString]:
    if max_weight not in (1, 2):
        raise ValueError("probe weight must be 1 or 2")
    out = []
    for q in range(n):
        for ch in "XYZ":
            out.append(parse_label("".join(ch if i == q else "I" for i in range(n))))
    if max_weight >= 2:
        for q in range(n - 1):
            for a, b in itertools.product("XYZ", repeat=2):
                lab = ["I"] * n
                lab[q], lab[q + 1] = a, b
                out.append(parse_label("".join(lab)))
    return out


def select_probes(c: Circuit, max_weight: int = 2, gateset: GateSet | None = None) -> tuple[Probe, ...]:
    """Weight <= ``max_weight`` probes whose image under ``c`` also has weight <= ``max_weight``.

    Two-qubit probes are restricted to nearest-neighbour pairs.
    """
    gs = gateset or builtin_gateset()
    seen = set()
    probes = []
    for p in _candidate_probes(c.n_qubits, max_weight):
        if p.label in seen:
            continue
        seen.add(p.label)
        tr = propagate(c, p, gs)
        if 1 <= weight(tr.output) <= max_weight:
            probes.append(Probe(p, tr.output.unsigned(), tr.net_sign))
    return tuple(probes)


def prep_specs(p: PauliString) -> list[PrepSpec]:
    """All ``2**w`` product eigenstates of ``p`` over its support, ``|0>`` elsewhere.

    The sign of a spec is the product of the chosen single-qubit eigenvalues,
    so the first spec (all positive eigenstates) has sign +1.
    """
    support = p.support
    if not support:
        raise ValueError("cannot prepare eigenstates of the identity")
    specs = []
    for choice in itertools.product((0, 1), repeat=len(support)):
        states = ["0"] * p.n
        for q, neg in zip(support, choice):
            states[q] = _EIGENSTATES[p.char(q)][neg]
        specs.append(PrepSpec(tuple(states), -1 if sum(choice) % 2 else 1))
    return specs


@dataclass(frozen=True)
class MeasurementSpec:
    rotations: dict[int, tuple[str, ...]]
    qubits: tuple[int, ...]


def measurement_spec(p_out: PauliString) -> MeasurementSpec:
    """Basis change onto the computational basis; only the support is measured."""
    support = p_out.support
    if not support:
        raise ValueError("cannot measure the identity")
    rotations = {q: MEASURE_GATES[p_out.char(q)] for q in support if MEASURE_GATES[p_out.char(q)]}
    return MeasurementSpec(rotations, support)


# --------------------------------------------------------------------------- estimation


@dataclass(frozen=True)
class EigenvalueEstimate:
    value: float
    shots: int
    stderr: float
    valid: bool = True

    def to_dict(self) -> dict:
        return {"value": self.value, "shots": self.shots, "stderr": self.stderr, "valid": self.valid}


def estimate_eigenvalue(
    counts: Sequence[Sequence[CountsTable] | CountsTable],
    prep_signs: Sequence[int],
    propagation_sign: int,
    measured: Sequence[int] | None = None,
) -> EigenvalueEstimate:
    """Difference-trick estimate from the counts of every prep spec of one probe.

    ``counts[k]`` holds the tables (one per twirl, pooled) for spec ``k``;
    ``measured`` names the qubits whose parity is the measured Pauli's
    eigenvalue (defaults to all measured qubits).
    """
    if len(counts) != len(prep_signs):
        raise ValueError(f"expected counts for {len(prep_signs)} prep specs, got {len(counts)}")
    terms, shots = [], []
    for k, tables in enumerate(counts):
        if isinstance(tables, CountsTable):
            tables = [tables]
        if not tables:
            raise ValueError(f"missing counts for prep spec {k}")
        n = sum(t.shots for t in tables)
        if n == 0:
            raise ValueError(f"prep spec {k} has zero shots")
        e = sum(t.parity_expectation(measured) * t.shots for t in tables) / n
        terms.append(prep_signs[k] * e)
        shots.append(n)
    value = propagation_sign * float(np.mean(terms))
    var = max(1.0 - value**2, 0.0) * sum(1.0 / n for n in shots) / len(shots) ** 2
    return EigenvalueEstimate(value, int(sum(shots)), math.sqrt(var), value > CLAMP_FLOOR)


# --------------------------------------------------------------------------- design matrix


@dataclass(frozen=True)
class DesignMatrix:
    matrix: sparse.csr_matrix
    rows: tuple[tuple[int, str], ...]  # (circuit id, probe label)
    index: ParameterIndex

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def build_design_matrix(
    circuits: Sequence[Circuit],
    probe_sets: Sequence[Sequence[Probe]],
    index: ParameterIndex,
    gateset: GateSet | None = None,
) -> DesignMatrix:
    """Row per (circuit, probe); entry ``(mu, v)`` counts visits of parameter ``v`` along the probe's path."""
    gs = gateset or builtin_gateset()
    data, indices, indptr, rows = [], [], [0], []
    for ci, (c, probes) in enumerate(zip(circuits, probe_sets)):
        for probe in probes:
            acc: dict[int, int] = {}
            for step in propagate(c, probe.pauli, gs).steps:
                col = index.column(step.gate, step.qubits, step.pauli)
                acc[col] = acc.get(col, 0) + 1
            for col in sorted(acc):
                indices.append(col)
                data.append(acc[col])
            indptr.append(len(indices))
            rows.append((ci, probe.label))
    mat = sparse.csr_matrix(
        (np.array(data, dtype=np.int64), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(rows), len(index)),
    )
    return DesignMatrix(mat, tuple(rows), index)


@dataclass(frozen=True)
class RankDiagnostics:
    rank: int
    n_columns: int
    singular_values: np.ndarray = field(repr=False)
    uncovered: tuple[Column, ...] = ()
    dependent: tuple[Column, ...] = ()

    @property
    def full_rank(self) -> bool:
        return self.rank >= self.n_columns

    @property
    def condition(self) -> float:
        """Ratio of extreme singular values (inf when rank deficient)."""
        if not self.full_rank or self.singular_values.size < self.n_columns:
            return math.inf
        return float(self.singular_values[0] / self.singular_values[self.n_columns - 1])

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "n_columns": self.n_columns,
            "full_rank": self.full_rank,
            "condition": self.condition if math.isfinite(self.condition) else None,
            "uncovered": [list(c[:1]) + [list(c[1]), c[2]] for c in self.uncovered],
            "dependent": [list(c[:1]) + [list(c[1]), c[2]] for c in self.dependent],
        }


def check_rank(a: DesignMatrix | np.ndarray, index: ParameterIndex | None = None) -> RankDiagnostics:
    """Numerical rank (singular values above ``1e-10`` of the largest) and the deficient parameters."""
    if isinstance(a, DesignMatrix):
        index = index or a.index
        dense = a.dense().astype(float)
    else:
        dense = np.asarray(a, dtype=float)
    n_cols = dense.shape[1]
    if dense.size == 0:
        sv = np.zeros(0)
        rank = 0
        vt = np.eye(n_cols)
    else:
        _, sv, vt = np.linalg.svd(dense)
        rank = int(np.sum(sv > RANK_RTOL * sv[0])) if sv.size and sv[0] > 0 else 0
    labels = index.columns if index is not None else tuple(("col", (i,), "") for i in range(n_cols))
    coverage = np.abs(dense).sum(axis=0) if dense.size else np.zeros(n_cols)
    uncovered = tuple(labels[i] for i in range(n_cols) if coverage[i] == 0)
    null = vt[rank:]
    weight_in_null = np.abs(null).max(axis=0) if null.size else np.zeros(n_cols)
    dependent = tuple(
        labels[i] for i in range(n_cols) if coverage[i] != 0 and weight_in_null[i] > 1e-8
    )
    return RankDiagnostics(rank, n_cols, sv, uncovered, dependent)


# --------------------------------------------------------------------------- solve


@dataclass
class SolveReport:
    index: ParameterIndex
    lambdas: np.ndarray
    channels: dict[Location, PauliChannel]
    residual_norm: float
    rank: RankDiagnostics
    clamped_rows: tuple[int, ...] = ()
    lambda_stderr: np.ndarray | None = None
    rate_stderr: dict[Location, np.ndarray] | None = None
    weighted: bool = False
    true_lambdas: np.ndarray | None = None
    true_channels: dict[Location, PauliChannel] | None = None
    eigenvalue_abs_errors: np.ndarray | None = None
    tvds: dict[Location, float] | None = None

    @property
    def mean_abs_error(self) -> float:
        return float(np.mean(self.eigenvalue_abs_errors))

    @property
    def mean_tvd(self) -> float:
        return float(np.mean(list(self.tvds.values())))

    def compare(self, truth: NoiseModel) -> SolveReport:
        """Fill in per-parameter eigenvalue errors and per-location TVDs against ``truth``."""
        true = np.empty(len(self.index))
        evs = {loc: rates_to_eigenvalues(truth.channel(*loc)) for loc in self.index.locations()}
        for i, (g, qs, p) in enumerate(self.index.columns):
            true[i] = evs[(g, qs)][p]
        self.true_lambdas = true
        self.true_channels = {loc: truth.channel(*loc) for loc in self.channels}
        self.eigenvalue_abs_errors = np.abs(self.lambdas - true)
        self.tvds = {loc: tvd(ch, truth.channel(*loc)) for loc, ch in self.channels.items()}
        return self

    def to_dict(self) -> dict:
        params = []
        for i, (g, qs, p) in enumerate(self.index.columns):
            row = {"index": i, "gate": g, "qubits": list(qs), "pauli": p, "lambda": float(self.lambdas[i])}
            if self.lambda_stderr is not None:
                row["stderr"] = float(self.lambda_stderr[i])
            if self.true_lambdas is not None:
                row["true_lambda"] = float(self.true_lambdas[i])
                row["abs_error"] = float(self.eigenvalue_abs_errors[i])
            params.append(row)
        chans = []
        for (g, qs), ch in self.channels.items():
            entry = {"gate": g, "qubits": list(qs), "channel": ch.to_dict(), "negative_mass": ch.negative_mass}
            if self.rate_stderr is not None:
                entry["stderr"] = dict(zip(ch.labels, map(float, self.rate_stderr[(g, qs)])))
            if self.tvds is not None:
                entry["tvd"] = self.tvds[(g, qs)]
                entry["true_channel"] = self.true_channels[(g, qs)].to_dict()
            chans.append(entry)
        out = {
            "parameters": params,
            "channels": chans,
            "residual_norm": self.residual_norm,
            "rank": self.rank.to_dict(),
            "weighted": self.weighted,
            "clamp_floor": CLAMP_FLOOR,
            "clamped_rows": list(self.clamped_rows),
            "clamp_note": (
                "non-positive circuit eigenvalue estimates are clamped to clamp_floor before the log "
                "and flagged instead of dropped, since dropping rows can cost design-matrix rank"
            ),
        }
        if self.tvds is not None:
            out["summary"] = {"mean_abs_error": self.mean_abs_error, "mean_tvd": self.mean_tvd}
        return out


def solve(
    a: DesignMatrix,
    estimates: Sequence[EigenvalueEstimate | float],
    truth: NoiseModel | None = None,
    weighted: bool = False,
) -> SolveReport:
    """Least squares on ``ln Lambda``; rates follow from the inverse transform.

    The fit is unweighted unless ``weighted`` is set, in which case rows are
    scaled by the inverse standard error of ``ln Lambda``.  Estimates at or
    below :data:`CLAMP_FLOOR` (or above 1) are clamped before taking the log,
    and their rows are reported in ``clamped_rows``.
    """
    values = np.array([e.value if isinstance(e, EigenvalueEstimate) else float(e) for e in estimates])
    if values.shape[0] != a.shape[0]:
        raise ValueError(f"{values.shape[0]} estimates for {a.shape[0]} design rows")
    diag = check_rank(a)
    if not diag.full_rank:
        raise RankDeficientError(
            f"design matrix has rank {diag.rank} < {diag.n_columns} parameters", diag
        )
    if values.size and np.all(values <= CLAMP_FLOOR):
        raise ValueError("every circuit eigenvalue estimate is non-positive")
    clamped = tuple(int(i) for i in np.flatnonzero((values <= CLAMP_FLOOR) | (values > 1.0)))
    clipped = np.clip(values, CLAMP_FLOOR, 1.0)
    b = np.log(clipped)

    has_errors = all(isinstance(e, EigenvalueEstimate) for e in estimates) and len(estimates) > 0
    log_se = None
    if has_errors:
        se = np.array([max(e.stderr, 1.0 / max(e.shots, 1)) for e in estimates])
        log_se = se / clipped
    if weighted and log_se is None:
        raise ValueError("weighted solve needs EigenvalueEstimate inputs with standard errors")

    dense = a.dense().astype(float)
    row_w = 1.0 / log_se if weighted else np.ones(len(b))
    x, *_ = np.linalg.lstsq(dense * row_w[:, None], b * row_w, rcond=None)
    residual = float(np.linalg.norm(dense @ x - b))
    lambdas = np.exp(x)

    lambda_stderr = None
    cov_lam = None
    if log_se is not None:
        solver = np.linalg.pinv(dense * row_w[:, None]) * row_w[None, :]
        cov_x = (solver * log_se**2) @ solver.T
        cov_lam = cov_x * np.outer(lambdas, lambdas)
        lambda_stderr = np.sqrt(np.diag(cov_lam))

    channels, rate_stderr = {}, {}
    for loc in a.index.locations():
        k = len(loc[1])
        cols = a.index.location_columns(loc)
        lam = np.concatenate([[1.0], lambdas[cols]])
        channels[loc] = eigenvalues_to_rates(EigenvalueVector(k, lam))
        if cov_lam is not None:
            w = sign_matrix(k)[:, 1:] / 4**k
            rate_stderr[loc] = np.sqrt(np.diag(w @ cov_lam[np.ix_(cols, cols)] @ w.T))
    report = SolveReport(
        a.index,
        lambdas,
        channels,
        residual,
        diag,
        clamped,
        lambda_stderr=lambda_stderr,
        rate_stderr=rate_stderr or None,
        weighted=weighted,
    )
    if truth is not None:
        report.compare(truth)
    return report


# --------------------------------------------------------------------------- resources


def resource_estimate(n_qubits: int, g1: int, g2: int, epsilon: float) -> dict:
    """Minimum independent rows and the order of the measurement budget at additive error ``epsilon``."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    shots = math.ceil(1.0 / epsilon**2 - 1e-9)
    return {
        "min_independent_rows": 3 * g1 * n_qubits + 15 * g2 * max(n_qubits - 1, 0),
        "shots_per_expectation_order": shots,
        "total_measurement_order": n_qubits * (g1 + g2) * shots,
    }


# --------------------------------------------------------------------------- circuit design


@dataclass(frozen=True)
class CircuitDesign:
    circuits: tuple[Circuit, ...]
    probes: tuple[tuple[Probe, ...], ...]
    matrix: DesignMatrix
    rank: RankDiagnostics
    attempts: int


def design_circuits(
    n_qubits: int,
    n_circuits: int,
    m_half: int,
    m_prime: int,
    gateset: GateSet | None = None,
    rng: np.random.Generator | int | None = None,
    max_attempts: int = 200,
    max_weight: int = 2,
    index: ParameterIndex | None = None,
    max_condition: float | None = DEFAULT_MAX_CONDITION,
) -> CircuitDesign:
    """Draw circuit collections until the design matrix has full column rank.

    A numerically full-rank matrix can still be so ill-conditioned that shot
    noise is amplified by orders of magnitude, so collections whose condition
    number exceeds ``max_condition`` are redrawn too (``None`` disables this).
    Raises :class:`RankDeficientError` with the last attempt's diagnostics
    when ``max_attempts`` collections all fall short.
    """
    if n_circuits < 1:
        raise ValueError("n_circuits must be >= 1")
    gs = gateset or builtin_gateset()
    rng = np.random.default_rng(rng)
    index = index or ParameterIndex.for_device(gs, n_qubits)
    diag = None
    for attempt in range(1, max_attempts + 1):
        circuits = tuple(generate_circuit(n_qubits, m_half, m_prime, gs, rng) for _ in range(n_circuits))
        probes = tuple(select_probes(c, max_weight, gs) for c in circuits)
        a = build_design_matrix(circuits, probes, index, gs)
        diag = check_rank(a)
        if diag.full_rank and (max_condition is None or diag.condition <= max_condition):
            return CircuitDesign(circuits, probes, a, diag, attempt)
    raise RankDeficientError(
        f"no full-rank design after {max_attempts} attempts (best rank {diag.rank}/{diag.n_columns})",
        diag,
    )


# --------------------------------------------------------------------------- pipeline


class CoverageError(ValueError):
    """Counts do not match the planned jobs (missing, extra or wrong shot totals)."""


@dataclass(frozen=True)
class ExperimentPlan:
    config: RunConfig
    index: ParameterIndex
    design: CircuitDesign
    twirls: tuple[tuple[TwirledCircuit, ...], ...]
    jobs: tuple[ShotJob, ...]
    gateset: GateSet = field(default_factory=builtin_gateset)

    @property
    def circuits(self) -> tuple[Circuit, ...]:
        return self.design.circuits

    @property
    def probes(self) -> tuple[tuple[Probe, ...], ...]:
        return self.design.probes

    def jobs_for(self, circuit_id: int, probe_id: int) -> list[ShotJob]:
        return [j for j in self.jobs if j.circuit_id == circuit_id and j.probe_id == probe_id]


def _split(total: int, parts: int) -> list[int]:
    q, r = divmod(total, parts)
    return [q + (1 if i < r else 0) for i in range(parts)]


def plan_jobs(
    config: RunConfig,
    design: CircuitDesign,
    gateset: GateSet | None = None,
) -> tuple[tuple[tuple[TwirledCircuit, ...], ...], tuple[ShotJob, ...]]:
    """Twirl every circuit and lay out one job per (circuit, twirl, probe, prep spec).

    A circuit's shots are split evenly over its twirls, then each probe splits
    its twirl's share evenly over its prep specs.
    """
    gs = gateset or builtin_gateset()
    twirls, jobs = [], []
    for ci, c in enumerate(design.circuits):
        if config.n_twirls == 0:
            ensemble = [(identity_twirl(c), config.shots_per_circuit)]
        else:
            ensemble = ensemble_plan(c, config.n_twirls, config.shots_per_circuit, config.rng(1, ci), gs)
        twirls.append(tuple(tw for tw, _ in ensemble))
        for ti, (tw, shots) in enumerate(ensemble):
            for pi, probe in enumerate(design.probes[ci]):
                specs = prep_specs(probe.pauli)
                meas = measurement_spec(probe.output)
                for si, (spec, n) in enumerate(zip(specs, _split(shots, len(specs)))):
                    if n < 1:
                        raise ValueError(
                            f"{shots} shots cannot cover the {len(specs)} prep specs of probe {probe.label}"
                        )
                    jobs.append(
                        ShotJob(
                            job_id=f"c{ci}-t{ti}-p{pi}-s{si}",
                            circuit=tw,
                            prep=spec,
                            measured_pauli=probe.output,
                            measured_qubits=meas.qubits,
                            shots=n,
                            rng_key=(config.seed, 2, ci, ti, pi, si),
                            circuit_id=ci,
                            twirl_id=ti,
                            probe_id=pi,
                            prep_id=si,
                        )
                    )
    return tuple(twirls), tuple(jobs)


def make_plan(config: RunConfig) -> ExperimentPlan:
    gs = config.load_gateset()
    index = ParameterIndex.for_device(gs, config.n_qubits)
    design = design_circuits(
        config.n_qubits,
        config.n_circuits,
        config.m_half,
        config.m_prime,
        gs,
        config.rng(0),
        max_attempts=config.max_attempts,
        max_weight=config.max_weight,
        index=index,
        max_condition=config.max_condition,
    )
    twirls, jobs = plan_jobs(config, design, gs)
    return ExperimentPlan(config, index, design, twirls, jobs, gs)


def default_noise_model(config: RunConfig) -> NoiseModel:
    gs = config.load_gateset()
    return random_noise_model(gs, config.n_qubits, config.noise_strength, config.rng(3))


def execute(plan: ExperimentPlan, model: NoiseModel, gateset: GateSet | None = None) -> list[CountsTable]:
    """Run every job of ``plan`` on the Pauli-frame simulator."""
    gs = gateset or plan.gateset
    return [sample_shots(job, model, gs) for job in plan.jobs]


def check_coverage(plan: ExperimentPlan, counts: Iterable[CountsTable]) -> dict[str, CountsTable]:
    """Match counts to planned jobs; raise :class:`CoverageError` on any discrepancy."""
    by_id: dict[str, CountsTable] = {}
    duplicates = []
    for t in counts:
        if t.job_id in by_id:
            duplicates.append(t.job_id)
        by_id[t.job_id] = t
    planned = {j.job_id: j for j in plan.jobs}
    missing = sorted(set(planned) - set(by_id))
    extra = sorted(set(by_id) - set(planned))
    problems = []
    for jid in sorted(set(planned) & set(by_id)):
        job, t = planned[jid], by_id[jid]
        if t.shots != job.shots:
            problems.append(f"{jid}: {t.shots} shots, planned {job.shots}")
        if tuple(t.measured_qubits) != tuple(job.measured_qubits):
            problems.append(f"{jid}: measured qubits {t.measured_qubits}, planned {job.measured_qubits}")
    if missing or extra or duplicates or problems:
        parts = []
        if missing:
            parts.append(f"missing jobs: {', '.join(missing)}")
        if extra:
            parts.append(f"unexpected jobs: {', '.join(extra)}")
        if duplicates:
            parts.append(f"duplicate jobs: {', '.join(sorted(set(duplicates)))}")
        parts += problems
        raise CoverageError("; ".join(parts))
    return by_id


def estimate_all(plan: ExperimentPlan, counts: Iterable[CountsTable]) -> list[EigenvalueEstimate]:
    """One estimate per design-matrix row, pooling each prep spec over twirls."""
    by_id = check_coverage(plan, counts)
    grouped: dict[tuple[int, int, int], list[CountsTable]] = {}
    for job in plan.jobs:
        grouped.setdefault((job.circuit_id, job.probe_id, job.prep_id), []).append(by_id[job.job_id])
    out = []
    for ci, probes in enumerate(plan.probes):
        for pi, probe in enumerate(probes):
            specs = prep_specs(probe.pauli)
            tables = [grouped.get((ci, pi, si), []) for si in range(len(specs))]
            out.append(estimate_eigenvalue(tables, [s.sign for s in specs], probe.sign))
    return out


@dataclass
class CharacterizationResult:
    plan: ExperimentPlan
    counts: list[CountsTable]
    estimates: list[EigenvalueEstimate]
    report: SolveReport
    noise_model: NoiseModel | None = None


def run_characterization(
    config: RunConfig,
    noise_model: NoiseModel | None = None,
    counts: Sequence[CountsTable] | None = None,
) -> CharacterizationResult:
    """Plan, execute (simulated unless ``counts`` are supplied), estimate and solve.

    On the simulator the whole run is a deterministic function of
    ``config.seed``.  With a noise model available the report carries
    per-parameter errors and per-location TVDs.
    """
    plan = make_plan(config)
    gs = plan.gateset
    if counts is None:
        if noise_model is None:
            noise_model = default_noise_model(config)
        counts = execute(plan, noise_model, gs)
    estimates = estimate_all(plan, counts)
    report = solve(plan.design.matrix, estimates, truth=noise_model)
    return CharacterizationResult(plan, list(counts), estimates, report, noise_model)
