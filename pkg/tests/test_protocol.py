import numpy as np
import pytest

from aces.channels import NoiseModel, gate_locations, random_noise_model, rates_to_eigenvalues
from aces.clifford import Circuit, Operation, builtin_gateset, generate_circuit, propagate
from aces.config import RunConfig
from aces.pauli import parse_label
from aces.protocol import (
    MEASURE_GATES,
    PREP_GATES,
    CoverageError,
    EigenvalueEstimate,
    ParameterIndex,
    Probe,
    RankDeficientError,
    build_design_matrix,
    check_coverage,
    check_rank,
    design_circuits,
    estimate_all,
    estimate_eigenvalue,
    execute,
    make_plan,
    measurement_spec,
    prep_specs,
    resource_estimate,
    run_characterization,
    select_probes,
    solve,
)
from aces.simulate import PREP_STATES, CountsTable, analytic_circuit_eigenvalue
from oracles import PAULI, rotation_from_gates, state_from_gates

GS = builtin_gateset()
H0 = Operation("H", (0,))


def probe(c, label):
    p = parse_label(label)
    tr = propagate(c, p)
    return Probe(p, tr.output.unsigned(), tr.net_sign)


# --------------------------------------------------------------------------- state prep and readout


@pytest.mark.parametrize("state", sorted(PREP_STATES))
def test_prep_gates_make_claimed_eigenstate(state):
    eig, pauli = PREP_STATES[state]
    psi = state_from_gates(PREP_GATES[state])
    assert np.allclose(PAULI[pauli] @ psi, eig * psi)


@pytest.mark.parametrize("pauli", "XYZ")
def test_measure_gates_rotate_onto_z(pauli):
    r = rotation_from_gates(MEASURE_GATES[pauli])
    assert np.allclose(r @ PAULI[pauli] @ r.conj().T, PAULI["Z"])


def test_prep_spec_examples():
    z = prep_specs(parse_label("Z"))
    assert [(s.states, s.sign) for s in z] == [(("0",), 1), (("1",), -1)]
    xi = prep_specs(parse_label("XI"))
    assert [(s.states, s.sign) for s in xi] == [(("+", "0"), 1), (("-", "0"), -1)]
    assert [s.sign for s in prep_specs(parse_label("ZZ"))] == [1, -1, -1, 1]
    for spec in prep_specs(parse_label("YX")):
        assert spec.expectation(parse_label("YX")) == spec.sign
    with pytest.raises(ValueError):
        prep_specs(parse_label("II"))


def test_measurement_spec_examples():
    assert measurement_spec(parse_label("ZI")).rotations == {}
    assert measurement_spec(parse_label("ZI")).qubits == (0,)
    xz = measurement_spec(parse_label("XZ"))
    assert xz.rotations == {0: ("H",)} and xz.qubits == (0, 1)
    assert measurement_spec(parse_label("Y")).rotations == {0: MEASURE_GATES["Y"]}
    with pytest.raises(ValueError):
        measurement_spec(parse_label("I"))


# --------------------------------------------------------------------------- probes


def test_select_probe_examples():
    empty = Circuit(1, ())
    assert [p.label for p in select_probes(empty)] == ["X", "Y", "Z"]
    h = Circuit(1, ((H0,),))
    assert [p.label for p in select_probes(h)] == ["X", "Y", "Z"]
    cz = Circuit(2, ((Operation("CZ", (0, 1)),),))
    kept = {p.label: p for p in select_probes(cz)}
    assert kept["XI"].output.label == "XZ"
    chain = Circuit(3, ((Operation("CZ", (0, 1)),), (Operation("CZ", (1, 2)),)))
    assert propagate(chain, "IXI").output.label == "ZXZ"
    assert "IXI" not in {p.label for p in select_probes(chain)}
    assert all(len(p.pauli.support) == 1 for p in select_probes(chain, max_weight=1))


def test_parameter_index():
    idx = ParameterIndex.for_device(GS, 2)
    assert len(idx) == 51
    assert idx[0] == ("I", (0,), "X")
    assert idx.column("CZ", (0, 1), "ZZ") == 50
    with pytest.raises(KeyError, match="unknown location"):
        idx.column("CZ", (1, 2), "XX")
    assert ParameterIndex.from_list(idx.to_list()) == idx
    assert len(ParameterIndex.for_device(GS, 1)) == 18


# --------------------------------------------------------------------------- design matrix


def test_design_matrix_examples():
    idx = ParameterIndex.for_device(GS, 1)
    hh = Circuit(1, ((H0,), (H0,)))
    a = build_design_matrix([hh], [[probe(hh, "X")]], idx).dense()
    expected = np.zeros(len(idx))
    expected[idx.column("H", (0,), "X")] = 1
    expected[idx.column("H", (0,), "Z")] = 1
    assert np.array_equal(a[0], expected)

    empty = Circuit(1, ())
    assert not build_design_matrix([empty], [[probe(empty, "Z")]], idx).dense().any()

    # Z passes S three times as Z
    s3 = Circuit(1, ((Operation("S", (0,), 3),),))
    a = build_design_matrix([s3], [[probe(s3, "Z")]], idx).dense()
    assert a[0, idx.column("S", (0,), "Z")] == 3


def test_design_matrix_row_bookkeeping():
    c = generate_circuit(2, 4, 6, rng=0)
    ps = select_probes(c)
    a = build_design_matrix([c, c], [ps, ps[:2]], ParameterIndex.for_device(GS, 2))
    assert a.shape == (len(ps) + 2, 51)
    assert a.rows[len(ps)] == (1, ps[0].label)
    # each row's entries sum to the number of noisy gate visits
    for row, p in zip(a.dense(), ps):
        assert row.sum() == len(propagate(c, p.pauli).steps)


def test_check_rank_examples():
    assert check_rank(np.array([[1.0, 2.0]])).rank == 1
    a = np.array([[1.0, 0, 1], [0, 1, 1]])
    assert check_rank(a).rank == 2
    assert check_rank(np.vstack([a, a, a])).rank == 2
    diag = check_rank(np.array([[1.0, 0, 0], [2.0, 0, 0]]))
    assert not diag.full_rank
    assert diag.uncovered == (("col", (1,), ""), ("col", (2,), ""))
    assert diag.condition == float("inf")


def test_design_retry_reports_rank_failure():
    with pytest.raises(RankDeficientError) as err:
        design_circuits(2, 1, 4, 6, rng=0, max_attempts=3)
    diag = err.value.diagnostics
    assert diag.rank < 51 and diag.n_columns == 51


def test_design_reaches_full_rank():
    design = design_circuits(2, 5, 4, 6, rng=np.random.default_rng(0))
    assert design.rank.rank == 51
    assert design.rank.condition <= 1e3
    assert all(c.depth == 14 for c in design.circuits)


# --------------------------------------------------------------------------- estimation and solve


def test_estimate_eigenvalue_examples():
    # noiseless: every spec gives its own sign, so the difference trick returns 1
    t_plus = CountsTable("a", 0, 0, 0, (0,), {"0": 100})
    t_minus = CountsTable("b", 0, 0, 1, (0,), {"1": 100})
    est = estimate_eigenvalue([[t_plus], [t_minus]], [1, -1], 1)
    assert est.value == 1.0 and est.stderr == 0.0 and est.shots == 200
    # negative propagation sign folds out
    flipped = estimate_eigenvalue([[t_minus], [t_plus]], [1, -1], -1)
    assert flipped.value == 1.0
    noisy = estimate_eigenvalue(
        [[CountsTable("a", 0, 0, 0, (0,), {"0": 90, "1": 10})], [CountsTable("b", 0, 0, 1, (0,), {"1": 80, "0": 20})]],
        [1, -1],
        1,
    )
    assert abs(noisy.value - 0.7) < 1e-12
    assert abs(noisy.stderr - np.sqrt((1 - 0.49) / 200)) < 1e-12
    with pytest.raises(ValueError):
        estimate_eigenvalue([[t_plus]], [1, -1], 1)


def test_exact_recovery_from_oracle():
    design = design_circuits(2, 5, 4, 6, rng=np.random.default_rng(1))
    nm = random_noise_model(GS, 2, 0.01, rng=1)
    b = [
        analytic_circuit_eigenvalue(c, nm, p.pauli)[1]
        for c, ps in zip(design.circuits, design.probes)
        for p in ps
    ]
    report = solve(design.matrix, b, truth=nm)
    assert np.max(report.eigenvalue_abs_errors) < 1e-9
    assert report.mean_tvd < 1e-9


def test_noiseless_solve_gives_identity_channels():
    design = design_circuits(2, 5, 4, 6, rng=np.random.default_rng(2))
    report = solve(design.matrix, [1.0] * design.matrix.shape[0])
    assert np.allclose(report.lambdas, 1)
    for ch in report.channels.values():
        assert np.allclose(ch.probs, np.eye(4**ch.k)[0])


def test_solve_rejects_rank_deficient():
    design = design_circuits(2, 5, 4, 6, rng=np.random.default_rng(2))
    m = design.matrix
    keep = m.matrix[:3]
    from aces.protocol import DesignMatrix

    short = DesignMatrix(keep, m.rows[:3], m.index)
    with pytest.raises(RankDeficientError):
        solve(short, [0.9] * 3)


def test_solve_clamps_and_flags_nonpositive_rows():
    design = design_circuits(2, 5, 4, 6, rng=np.random.default_rng(3))
    b = np.full(design.matrix.shape[0], 0.95)
    b[4] = -0.01
    report = solve(design.matrix, b)
    assert report.clamped_rows == (4,)
    assert report.to_dict()["clamped_rows"] == [4]


def test_weighted_solve_runs_and_reports_stderr():
    cfg = RunConfig(shots_per_circuit=2000, n_twirls=2, seed=4)
    res = run_characterization(cfg)
    report = solve(res.plan.design.matrix, res.estimates, weighted=True)
    assert report.weighted and report.lambda_stderr is not None
    assert np.all(report.lambda_stderr > 0)
    with pytest.raises(ValueError):
        solve(res.plan.design.matrix, [e.value for e in res.estimates], weighted=True)


def test_resource_estimate_examples():
    r = resource_estimate(2, 6, 1, 0.01)
    assert r["min_independent_rows"] == 51
    assert r["shots_per_expectation_order"] == 10_000
    assert r["total_measurement_order"] == 2 * 7 * 10_000
    r = resource_estimate(1, 6, 0, 0.1)
    assert (r["min_independent_rows"], r["shots_per_expectation_order"]) == (18, 100)
    with pytest.raises(ValueError):
        resource_estimate(2, 6, 1, 0)


# --------------------------------------------------------------------------- pipeline


def small_config(**kw):
    base = dict(shots_per_circuit=1200, n_twirls=3, seed=5)
    base.update(kw)
    return RunConfig(**base)


def test_plan_job_layout():
    plan = make_plan(small_config())
    ps = plan.probes
    expected = sum(3 * 2 ** len(p.pauli.support) for probes in ps for p in probes)
    assert len(plan.jobs) == expected
    # every probe row receives the full circuit budget
    for ci, probes in enumerate(ps):
        for pi in range(len(probes)):
            assert sum(j.shots for j in plan.jobs_for(ci, pi)) == 1200
    assert len({j.job_id for j in plan.jobs}) == len(plan.jobs)


def test_untwirled_plan():
    plan = make_plan(small_config(n_twirls=0))
    assert all(len(tw) == 1 for tw in plan.twirls)
    assert all(j.twirl_id == 0 for j in plan.jobs)


def test_plan_is_deterministic():
    a, b = make_plan(small_config()), make_plan(small_config())
    assert a.circuits == b.circuits
    assert [j.job_id for j in a.jobs] == [j.job_id for j in b.jobs]


def test_coverage_errors_name_jobs():
    plan = make_plan(small_config())
    nm = random_noise_model(GS, 2, 0.01, rng=0)
    counts = execute(plan, nm)
    with pytest.raises(CoverageError, match=plan.jobs[3].job_id):
        check_coverage(plan, counts[:3] + counts[4:])
    extra = CountsTable("zzz", 0, 0, 0, counts[0].measured_qubits, counts[0].counts)
    with pytest.raises(CoverageError, match="unexpected jobs: zzz"):
        check_coverage(plan, counts + [extra])
    short = CountsTable(counts[0].job_id, 0, 0, 0, counts[0].measured_qubits, {"0" * len(counts[0].measured_qubits): 1})
    with pytest.raises(CoverageError, match="shots"):
        check_coverage(plan, [short] + counts[1:])
    with pytest.raises(CoverageError, match="duplicate"):
        check_coverage(plan, counts + counts[:1])


def test_noiseless_pipeline_recovers_identity():
    cfg = small_config()
    quiet = NoiseModel.noiseless(gate_locations(GS, 2))
    res = run_characterization(cfg, noise_model=quiet)
    assert all(e.value == 1.0 for e in res.estimates)
    assert res.report.mean_tvd < 1e-12
    assert res.report.mean_abs_error < 1e-12


def test_pipeline_estimates_consistent_with_oracle():
    cfg = small_config(shots_per_circuit=20_000, n_twirls=2)
    nm = random_noise_model(GS, 2, 0.01, rng=9)
    res = run_characterization(cfg, noise_model=nm)
    z = []
    for (c, probes), start in zip(zip(res.plan.circuits, res.plan.probes), np.cumsum([0] + [len(p) for p in res.plan.probes])):
        for k, p in enumerate(probes):
            est = res.estimates[start + k]
            lam = analytic_circuit_eigenvalue(c, nm, p.pauli)[1]
            z.append((est.value - lam) / est.stderr)
    z = np.array(z)
    assert np.max(np.abs(z)) < 5
    assert 0.5 < np.sqrt(np.mean(z**2)) < 1.5


def test_pipeline_with_supplied_counts_matches_live_run():
    cfg = small_config()
    nm = random_noise_model(GS, 2, 0.01, rng=3)
    live = run_characterization(cfg, noise_model=nm)
    again = run_characterization(cfg, noise_model=nm, counts=live.counts)
    assert np.array_equal(live.report.lambdas, again.report.lambdas)
    assert estimate_all(live.plan, live.counts) == live.estimates
    assert isinstance(live.estimates[0], EigenvalueEstimate)


def test_truth_comparison_fields():
    res = run_characterization(small_config())
    d = res.report.to_dict()
    assert "summary" in d and "tvd" in d["channels"][0]
    for p in d["parameters"]:
        assert abs(p["abs_error"] - abs(p["lambda"] - p["true_lambda"])) < 1e-15
    loc = res.plan.index.locations()[0]
    ev = rates_to_eigenvalues(res.noise_model.channel(*loc))
    assert d["parameters"][0]["true_lambda"] == ev["X"]
