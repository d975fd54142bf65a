"""Reading and writing run artifacts: plans, counts, estimates, reports and plot-data CSVs.

A run directory looks like::

    config.json        run configuration (master seed included)
    plan.json          gate set, parameter index, circuits, probes, twirls, jobs
    noise_model.json   ground-truth model, when the simulator produced the counts
    counts/<job>.json  one CountsTable per job (simulated or ingested)
    estimates.json     circuit eigenvalue estimate per design-matrix row
    report.json        recovered eigenvalues, channels, diagnostics
    *.csv              plot data
    archive.json       tool version and file list

JSON is written with sorted keys so equal inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .channels import NoiseModel
from .clifford import Circuit, GateSet
from .config import RunConfig
from .protocol import (
    PREP_GATES,
    CircuitDesign,
    EigenvalueEstimate,
    ExperimentPlan,
    ParameterIndex,
    Probe,
    build_design_matrix,
    check_rank,
    measurement_spec,
)
from .schemas import SchemaError, validate
from .simulate import CountsTable, PrepSpec, ShotJob, TwirledCircuit
from .clifford import propagate


def write_json(path, data) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, sort_keys=True, indent=1) + "\n")


def read_json(path, kind: str | None = None):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    if kind is not None:
        try:
            validate(kind, data)
        except SchemaError as exc:
            raise SchemaError(f"{path}: {exc}") from None
    return data


# --------------------------------------------------------------------------- plan


def job_to_dict(job: ShotJob) -> dict:
    meas = measurement_spec(job.measured_pauli)
    return {
        "job_id": job.job_id,
        "circuit_id": job.circuit_id,
        "twirl_id": job.twirl_id,
        "probe_id": job.probe_id,
        "prep_id": job.prep_id,
        "prep": job.prep.to_dict(),
        "prep_gates": [list(PREP_GATES[s]) for s in job.prep.states],
        "measured_pauli": job.measured_pauli.label,
        "measured_qubits": list(job.measured_qubits),
        "measure_gates": {str(q): list(g) for q, g in meas.rotations.items()},
        "shots": job.shots,
        "rng_key": list(job.rng_key),
    }


def plan_to_dict(plan: ExperimentPlan) -> dict:
    circuits = []
    for ci, c in enumerate(plan.circuits):
        circuits.append(
            {
                "circuit_id": ci,
                "circuit": c.to_dict(),
                "probes": [p.to_dict() for p in plan.probes[ci]],
                "twirls": [tw.to_dict() for tw in plan.twirls[ci]],
            }
        )
    return {
        "version": __version__,
        # the output path is not part of the experiment; leaving it out keeps archives relocatable
        "config": {k: v for k, v in plan.config.to_dict().items() if k != "out_dir"},
        "gateset": plan.gateset.to_list(),
        "index": plan.index.to_list(),
        "design": {
            "attempts": plan.design.attempts,
            "rank": plan.design.rank.rank,
            "n_rows": plan.design.matrix.shape[0],
            "n_columns": plan.design.matrix.shape[1],
        },
        "circuits": circuits,
        "jobs": [job_to_dict(j) for j in plan.jobs],
    }


def plan_from_dict(d: dict) -> ExperimentPlan:
    validate("plan", d)
    config = RunConfig.from_dict(d["config"])
    gs = GateSet.from_list(d["gateset"])
    index = ParameterIndex.from_list(d["index"])
    circuits, probes, twirls = [], [], []
    for entry in sorted(d["circuits"], key=lambda e: e["circuit_id"]):
        c = Circuit.from_dict(entry["circuit"])
        ps = tuple(Probe.from_dict(p) for p in entry["probes"])
        for p in ps:
            tr = propagate(c, p.pauli, gs)
            if tr.output.unsigned() != p.output or tr.net_sign != p.sign:
                raise SchemaError(f"circuit {entry['circuit_id']}: probe {p.label} does not match its circuit")
        circuits.append(c)
        probes.append(ps)
        twirls.append(tuple(TwirledCircuit.from_dict(c, t) for t in entry["twirls"]))
    matrix = build_design_matrix(circuits, probes, index, gs)
    design = CircuitDesign(tuple(circuits), tuple(probes), matrix, check_rank(matrix), d["design"]["attempts"])
    jobs = []
    for j in d["jobs"]:
        ci, ti = j["circuit_id"], j["twirl_id"]
        jobs.append(
            ShotJob(
                job_id=j["job_id"],
                circuit=twirls[ci][ti],
                prep=PrepSpec.from_dict(j["prep"]),
                measured_pauli=_label(j["measured_pauli"]),
                measured_qubits=tuple(j["measured_qubits"]),
                shots=j["shots"],
                rng_key=tuple(j["rng_key"]),
                circuit_id=ci,
                twirl_id=ti,
                probe_id=j["probe_id"],
                prep_id=j["prep_id"],
            )
        )
    return ExperimentPlan(config, index, design, tuple(twirls), tuple(jobs), gs)


def _label(s: str):
    from .pauli import parse_label

    return parse_label(s)


def save_plan(plan: ExperimentPlan, path) -> None:
    write_json(path, plan_to_dict(plan))


def load_plan(path) -> ExperimentPlan:
    return plan_from_dict(read_json(path))


# --------------------------------------------------------------------------- counts


def save_counts(tables: Iterable[CountsTable], directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for t in tables:
        write_json(directory / f"{t.job_id}.json", t.to_dict())


def load_counts(directory) -> list[CountsTable]:
    """Every ``*.json`` CountsTable in ``directory``; raises :class:`SchemaError` on bad files."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"counts directory {directory} does not exist")
    tables = []
    for path in sorted(directory.glob("*.json")):
        data = read_json(path, "counts")
        try:
            tables.append(CountsTable.from_dict(data))
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}") from None
    return tables


# --------------------------------------------------------------------------- estimates / report


def estimates_to_dict(plan: ExperimentPlan, estimates: Sequence[EigenvalueEstimate]) -> dict:
    rows = []
    for i, ((ci, label), est) in enumerate(zip(plan.design.matrix.rows, estimates)):
        rows.append({"row": i, "circuit_id": ci, "probe": label, **est.to_dict()})
    return {"rows": rows}


def estimates_from_dict(d: dict) -> list[EigenvalueEstimate]:
    validate("estimates", d)
    return [
        EigenvalueEstimate(r["value"], r["shots"], r["stderr"], r["valid"])
        for r in sorted(d["rows"], key=lambda r: r["row"])
    ]


def save_noise_model(model: NoiseModel, path) -> None:
    write_json(path, model.to_list())


def load_noise_model(path) -> NoiseModel:
    return NoiseModel.from_list(read_json(path, "noise_model"))


def _qubits(qs) -> str:
    return "-".join(str(q) for q in qs)


def write_csvs(report: dict, directory) -> list[Path]:
    """Plot data: eigenvalues and error rates per parameter index, TVD per gate, error distribution.

    Columns of ``eigenvalues.csv`` and ``error_rates.csv``:
    ``index, gate, qubits, pauli, value, stderr`` plus ``true_value, abs_error``
    when a ground-truth model was supplied.  ``tvd.csv`` and
    ``eigenvalue_errors.csv`` exist only with ground truth.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    has_truth = "summary" in report
    written = []

    def emit(name, header, rows):
        path = directory / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        written.append(path)

    header = ["index", "gate", "qubits", "pauli", "value", "stderr"]
    if has_truth:
        header += ["true_value", "abs_error"]

    rows = []
    for p in report["parameters"]:
        row = [p["index"], p["gate"], _qubits(p["qubits"]), p["pauli"], repr(p["lambda"]), repr(p.get("stderr", ""))]
        if has_truth:
            row += [repr(p["true_lambda"]), repr(p["abs_error"])]
        rows.append(row)
    emit("eigenvalues.csv", header, rows)

    chans = {(c["gate"], tuple(c["qubits"])): c for c in report["channels"]}
    rows = []
    for p in report["parameters"]:
        c = chans[(p["gate"], tuple(p["qubits"]))]
        value = c["channel"]["probs"][p["pauli"]]
        row = [p["index"], p["gate"], _qubits(p["qubits"]), p["pauli"], repr(value),
               repr(c.get("stderr", {}).get(p["pauli"], ""))]
        if has_truth:
            true = c["true_channel"]["probs"][p["pauli"]]
            row += [repr(true), repr(abs(value - true))]
        rows.append(row)
    emit("error_rates.csv", header, rows)

    if has_truth:
        emit(
            "tvd.csv",
            ["gate", "qubits", "tvd"],
            [[c["gate"], _qubits(c["qubits"]), repr(c["tvd"])] for c in report["channels"]],
        )
        emit(
            "eigenvalue_errors.csv",
            ["index", "abs_error"],
            [[p["index"], repr(p["abs_error"])] for p in report["parameters"]],
        )
    return written


def write_manifest(directory, config: RunConfig) -> None:
    directory = Path(directory)
    files = sorted(
        str(p.relative_to(directory))
        for p in directory.rglob("*")
        if p.is_file() and p.name != "archive.json"
    )
    write_json(directory / "archive.json", {"version": __version__, "seed": config.seed, "files": files})
