"""Release acceptance gate.

Each criterion runs at its stated tolerance and prints one PASS/FAIL line
(run with ``pytest -s`` or see captured output). The statistical criteria
are deterministic: all seeds are fixed here.
"""

import time

import numpy as np
import pytest

from conftest import angular_degrees
from test_rankagg import naive_minimizers, random_problem

from ptselect.condmeans import build_surface, eval_mu
from ptselect.data import ResponseSpec, TrialDataset
from ptselect.engine import EngineConfig, fit_engine, recommend
from ptselect.rankagg import aggregate_ce, aggregate_exact, exact_minimizers, psi
from ptselect.scoring import score_panel_from_links
from ptselect.simulation import (
    ScenarioConfig,
    censoring_preset,
    generate_replicate,
    model_set,
    run_scenario,
    scenario_preset,
)
from ptselect.singleindex import fit_sim_complete, fit_sim_ipcw, predict_link, predict_link_values
from ptselect.survival import SurvivalRecord, fit_aalen_censoring, ipcw_weights, kaplan_meier

pytestmark = pytest.mark.acceptance


def report(criterion: str, passed: bool, details: str, elapsed: float):
    status = "PASS" if passed else "FAIL"
    print(f"\n[ACCEPTANCE] {criterion}: {status} ({details}) [{elapsed:.1f}s]")


# --- criterion 1: zero-censoring equivalence ---------------------------------


def _paired_dataset(seed: int) -> tuple[TrialDataset, TrialDataset]:
    rng = np.random.default_rng(seed)
    n, K, r = 50, 2, 3
    arms = np.repeat(np.arange(1, K + 1), n)
    X = rng.uniform(-1, 1, (n * K, r))
    y1 = np.exp(0.4 * (X @ np.array([0.6, -0.8, 0.0]))) + np.where(arms == 1, 0.3, 0.0)
    y1 = y1 + 0.05 * rng.normal(size=n * K) + 1.0
    y2 = np.cos(X @ np.array([0.0, 0.6, 0.8])) + np.where(arms == 2, 0.2, 0.0)
    y2 = y2 + 0.05 * rng.normal(size=n * K)
    manifest = {"schema": "ptselect.dataset/1", "arm_column": "arm",
                "covariates": ["x1", "x2", "x3"], "responses": []}
    common = dict(
        arms=arms, X=X,
        covariate_names=("x1", "x2", "x3"),
        arm_names=("arm-1", "arm-2"),
        manifest=manifest,
    )
    censored_view = TrialDataset(
        specs=(ResponseSpec("y1", "right_censored"), ResponseSpec("y2", "complete")),
        complete={"y2": y2},
        censored={"y1": (y1, np.ones(y1.size, dtype=bool))},
        **common,
    )
    complete_view = TrialDataset(
        specs=(ResponseSpec("y1", "complete"), ResponseSpec("y2", "complete")),
        complete={"y1": y1, "y2": y2},
        censored={},
        **common,
    )
    return censored_view, complete_view


def test_criterion_1_zero_censoring_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for seed in range(20):
        cens_ds, comp_ds = _paired_dataset(1000 + seed)
        cfg = EngineConfig(seed=seed)
        a = fit_engine(cens_ds, config=cfg)
        b = fit_engine(comp_ds, config=cfg)
        for j in range(2):
            for k in range(2):
                worst = max(worst, float(np.max(np.abs(a.fits[j][k].beta - b.fits[j][k].beta))))
                worst = max(worst, abs(a.fits[j][k].bandwidth - b.fits[j][k].bandwidth))
        rng = np.random.default_rng(seed)
        for i in range(3):
            x0 = rng.uniform(-1, 1, 3)
            ra = recommend(a, x0, [0.6, 0.4], seed=i)
            rb = recommend(b, x0, [0.6, 0.4], seed=i)
            worst = max(worst, float(np.max(np.abs(ra.mu - rb.mu))))
            ok = ok and (ra.k_star == rb.k_star)
    elapsed = time.perf_counter() - t0
    passed = ok and worst <= 1e-10 and elapsed < 300
    report("criterion 1 (zero-censoring equivalence)", passed,
           f"max deviation {worst:.2e}, k* agree={ok}, 20 datasets", elapsed)
    assert ok
    assert worst <= 1e-10
    assert elapsed < 300


# --- criterion 2: rank aggregation oracles ------------------------------------


def test_criterion_2_rank_aggregation_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    exact_agree = 0
    for _ in range(500):
        k = int(rng.integers(2, 7))
        j = int(rng.integers(1, 6))
        prob = random_problem(rng, k=k, j=j)
        o_val, o_set = naive_minimizers(prob.lists, prob.weights, prob.rho)
        val, mins = exact_minimizers(prob)
        tie_seed = int(rng.integers(2**31))
        got = aggregate_exact(prob, np.random.default_rng(tie_seed))
        want = (o_set[int(np.random.default_rng(tie_seed).integers(len(o_set)))]
                if len(o_set) > 1 else o_set[0])
        if mins == o_set and abs(val - o_val) <= 1e-10 and got == want:
            exact_agree += 1

    ce_agree = 0
    for i in range(100):
        prob = random_problem(rng, k=int(rng.integers(2, 6)))
        exact = aggregate_exact(prob, np.random.default_rng(3000 + i))
        ce = aggregate_ce(prob, np.random.default_rng(4000 + i))
        ce_agree += abs(psi(prob, ce) - psi(prob, exact)) <= 1e-9
    elapsed = time.perf_counter() - t0
    passed = exact_agree == 500 and ce_agree >= 95 and elapsed < 120
    report("criterion 2 (rank-aggregation oracle)", passed,
           f"exact {exact_agree}/500, CE {ce_agree}/100", elapsed)
    assert exact_agree == 500
    assert ce_agree >= 95
    assert elapsed < 120


# --- criterion 3: single-index recovery ---------------------------------------


def test_criterion_3_sim_recovery():
    t0 = time.perf_counter()
    hits = 0
    beta = np.array([1.0, 1.0, 0.0, 0.0, 0.0]) / np.sqrt(2.0)
    for seed in range(50):
        rng = np.random.default_rng(10_000 + seed)
        X = rng.uniform(-1, 1, (400, 5))
        y = 2.0 * (X @ beta) + 1.0
        fit = fit_sim_complete(X, y, rng=np.random.default_rng(seed))
        hits += angular_degrees(fit.beta, beta) < 2.0

    ms = model_set(1)
    cens_angles = []
    for seed in range(50):
        cfg = ScenarioConfig(model_set=1, J=1, n=400, sigma=0.1, error_corr=0.3,
                             censoring=censoring_preset(1, "random", 25),
                             weights=(1.0,), seed=seed)
        ds = generate_replicate(cfg, np.random.default_rng(20_000 + seed))
        mask = ds.arm_mask(1)
        t, events = ds.censored["resp1"]
        records = [SurvivalRecord(float(ti), bool(ei), xi)
                   for ti, ei, xi in zip(t[mask], events[mask], ds.X[mask])]
        table = ipcw_weights(fit_aalen_censoring(records), records)
        fit = fit_sim_ipcw(ds.X[mask], t[mask], events[mask], table,
                           rng=np.random.default_rng(seed))
        cens_angles.append(angular_degrees(fit.beta, ms.beta(1, 1)))
    median_angle = float(np.median(cens_angles))
    elapsed = time.perf_counter() - t0
    passed = hits >= 48 and median_angle < 10.0 and elapsed < 900
    report("criterion 3 (SIM recovery)", passed,
           f"noiseless <2deg in {hits}/50; censored median {median_angle:.2f}deg", elapsed)
    assert hits >= 48  # >= 95% of 50 seeds
    assert median_angle < 10.0
    assert elapsed < 900


# --- criterion 4: censoring-weight validity -----------------------------------


def test_criterion_4_censoring_weight_validity():
    t0 = time.perf_counter()
    # hand-computed toy: censoring at t=2 of {1,2,3,4} gives exp(-1/3)
    records = [SurvivalRecord(float(t), e, np.array([]))
               for t, e in [(1, True), (2, False), (3, True), (4, True)]]
    table = ipcw_weights(fit_aalen_censoring(records), records)
    toy_ok = table.weights[2] == np.exp(-1.0 / 3.0) and table.weights[3] == np.exp(-1.0 / 3.0)

    worst_gap, all_ok = 0.0, True
    rng = np.random.default_rng(99)
    for _ in range(50):
        n = 100
        times = rng.exponential(2.0, n)
        events = rng.uniform(size=n) < rng.uniform(0.4, 0.8)
        recs = [SurvivalRecord(float(t), bool(e), np.array([])) for t, e in zip(times, events)]
        model = fit_aalen_censoring(recs)
        km = kaplan_meier(recs, target="censoring")
        for t in np.sort(times):
            lam = model.cumulative_hazard(recs[0], float(t))
            gap = abs(float(np.exp(-lam)) - km(float(t)))
            tol = max(0.02, lam**2)
            worst_gap = max(worst_gap, gap - tol)
            all_ok = all_ok and gap <= tol
    elapsed = time.perf_counter() - t0
    passed = toy_ok and all_ok and elapsed < 60
    report("criterion 4 (censoring-weight validity)", passed,
           f"toy exact={toy_ok}, Aalen-vs-KM within tolerance={all_ok}", elapsed)
    assert toy_ok
    assert all_ok
    assert elapsed < 60


# --- criterion 5: desk-scale accuracy cells ------------------------------------


@pytest.mark.slow
def test_criterion_5_cell_no_censoring():
    t0 = time.perf_counter()
    cfg = scenario_preset("ms1-j4-n100-none", replicates=200, seed=0)
    rep = run_scenario(cfg)
    elapsed = time.perf_counter() - t0
    passed = abs(rep.accuracy - 0.853) <= 0.06 and rep.excluded == 0
    report("criterion 5a (desk-scale cell, no censoring)", passed,
           f"accuracy {rep.accuracy:.4f} vs 0.853 +/- 0.06, excluded {rep.excluded}", elapsed)
    assert rep.excluded == 0
    assert abs(rep.accuracy - 0.853) <= 0.06


@pytest.mark.slow
def test_criterion_5_cell_random50():
    t0 = time.perf_counter()
    cfg = scenario_preset("ms1-j4-n100-random50", replicates=200, seed=0)
    rep = run_scenario(cfg)
    elapsed = time.perf_counter() - t0
    passed = abs(rep.accuracy - 0.760) <= 0.07 and rep.excluded == 0
    report("criterion 5b (desk-scale cell, 50% random censoring)", passed,
           f"accuracy {rep.accuracy:.4f} vs 0.760 +/- 0.07, excluded {rep.excluded}", elapsed)
    assert rep.excluded == 0
    assert abs(rep.accuracy - 0.760) <= 0.07


# --- criterion 6: directional censoring property -------------------------------


@pytest.mark.slow
@pytest.mark.parametrize("set_id,n", [(1, 100), (1, 400), (2, 100), (2, 400)])
def test_criterion_6_directional_censoring(set_id, n):
    t0 = time.perf_counter()
    acc = {}
    for cens in ("none", "random50"):
        cfg = scenario_preset(f"ms{set_id}-j3-n{n}-{cens}", replicates=200, seed=0)
        rep = run_scenario(cfg)
        acc[cens] = rep.accuracy
    elapsed = time.perf_counter() - t0
    passed = acc["none"] >= acc["random50"] - 0.03
    report(f"criterion 6 (directional, ms{set_id} n={n})", passed,
           f"none {acc['none']:.4f} vs 50% {acc['random50']:.4f}", elapsed)
    assert acc["none"] >= acc["random50"] - 0.03


# --- criterion 7: IPCW bias reduction ------------------------------------------


def _c7_one_seed(seed: int) -> tuple[float, float]:
    """Return (IPCW MAE, naive complete-case MAE) against generator truth.

    Truth is the same conditional-mean smoother applied to a large fresh
    uncensored sample from the generator, scored by the same fitted models:
    the uncensored value of the estimand, so the comparison isolates how
    each estimator handles censoring.
    """
    sigma = 0.5  # high-noise setting: censoring bias is first-order here
    cfg = ScenarioConfig(model_set=1, J=1, n=400, sigma=sigma, error_corr=0.3,
                         censoring=censoring_preset(1, "random", 50),
                         weights=(1.0,), seed=seed)
    ds = generate_replicate(cfg, np.random.default_rng((seed, 0)))
    eng = fit_engine(ds, config=EngineConfig(seed=seed))

    cfg_big = ScenarioConfig(model_set=1, J=1, n=4000, sigma=sigma, error_corr=0.3,
                             censoring=censoring_preset(1, "none", 0),
                             weights=(1.0,), seed=seed)
    big = generate_replicate(cfg_big, np.random.default_rng((seed, 50)))
    y_big, _ = big.censored["resp1"]

    naive, oracle = [], []
    for k in (1, 2, 3):
        s = eng.surfaces[0][k - 1]
        naive.append(build_surface(0, k, s.scores, s.labels, s.values,
                                   weights=s.events.astype(float), events=s.events,
                                   censored_mode=True, bandwidth=s.bandwidth))
        mk = big.arm_mask(k)
        links = np.stack([predict_link_values(f, big.X[mk]) for f in eng.fits[0]], axis=1)
        panels = [score_panel_from_links(links[i][None, :],
                                         np.random.default_rng((seed, 7, k, i)))
                  for i in range(links.shape[0])]
        oracle.append(build_surface(0, k,
                                    np.array([p.scores[0].s for p in panels]),
                                    np.array([p.scores[0].d for p in panels]),
                                    y_big[mk], bandwidth=s.bandwidth))

    rng = np.random.default_rng((seed, 1))
    errs_i, errs_n = [], []
    for i in range(25):
        x0 = rng.uniform(-1, 1, 5)
        links = np.array([predict_link(f, x0) for f in eng.fits[0]])
        panel = score_panel_from_links(links[None, :], np.random.default_rng((seed, 2, i)))
        s_val, d = panel.scores[0].s, panel.scores[0].d
        truth = eval_mu(oracle[d - 1], s_val, d)
        errs_i.append(abs(eval_mu(eng.surfaces[0][d - 1], s_val, d) - truth))
        errs_n.append(abs(eval_mu(naive[d - 1], s_val, d) - truth))
    return float(np.mean(errs_i)), float(np.mean(errs_n))


@pytest.mark.slow
def test_criterion_7_ipcw_bias_reduction():
    t0 = time.perf_counter()
    wins = 0
    for seed in range(30):
        mae_ipcw, mae_naive = _c7_one_seed(seed)
        wins += mae_ipcw < mae_naive
    elapsed = time.perf_counter() - t0
    passed = wins >= 24 and elapsed < 600
    report("criterion 7 (IPCW bias reduction)", passed, f"IPCW wins {wins}/30 seeds", elapsed)
    assert wins >= int(0.8 * 30)
    assert elapsed < 600


# --- criterion 8: determinism of CLI and service --------------------------------


def test_criterion_8_determinism(tmp_path, fixture_engine):
    import json

    from fastapi.testclient import TestClient

    from ptselect.archive import save_engine
    from ptselect.cli import main
    from ptselect.service import EngineStore, create_app

    t0 = time.perf_counter()
    engine_path = tmp_path / "engine.json"
    save_engine(fixture_engine, engine_path)

    rec_args = ["recommend", "--engine", str(engine_path),
                "--covariates", "5.6,6.5,40.0,70.0,12.0",
                "--weights", "0.5,0.3,0.2", "--seed", "7"]
    outs = []
    for name in ("a.json", "b.json"):
        assert main(rec_args + ["--out", str(tmp_path / name)]) == 0
        outs.append((tmp_path / name).read_bytes())
    cli_rec_ok = outs[0] == outs[1]

    sim_outs = []
    for name in ("s1.json", "s2.json"):
        assert main(["simulate", "--preset", "ms1-j3-n100-none", "--replicates", "2",
                     "--seed", "3", "--out", str(tmp_path / name)]) == 0
        sim_outs.append((tmp_path / name).read_bytes())
    cli_sim_ok = sim_outs[0] == sim_outs[1]

    agg_src = tmp_path / "lists.json"
    agg_src.write_text(json.dumps({"lists": [{"values": [0.2, 0.5, 0.1]}], "weights": [1.0]}))
    agg_outs = []
    for name in ("g1.json", "g2.json"):
        assert main(["aggregate", "--lists", str(agg_src), "--seed", "2",
                     "--out", str(tmp_path / name)]) == 0
        agg_outs.append((tmp_path / name).read_bytes())
    cli_agg_ok = agg_outs[0] == agg_outs[1]

    store = EngineStore()
    store.put("e", fixture_engine)
    with TestClient(create_app(store)) as client:
        body = {"covariates": [5.6, 6.5, 40.0, 70.0, 12.0],
                "weights": [0.5, 0.3, 0.2], "seed": 7}
        r1 = client.post("/engines/e/recommend", json=body)
        r2 = client.post("/engines/e/recommend", json=body)
        service_ok = r1.content == r2.content
        b1 = client.post("/engines/e/recommend-batch",
                         json={"rows": [[5.6, 6.5, 40.0, 70.0, 12.0]],
                               "weights": [0.5, 0.3, 0.2], "seed": 7})
        b2 = client.post("/engines/e/recommend-batch",
                         json={"rows": [[5.6, 6.5, 40.0, 70.0, 12.0]],
                               "weights": [0.5, 0.3, 0.2], "seed": 7})
        batch_ok = b1.content == b2.content

    elapsed = time.perf_counter() - t0
    passed = cli_rec_ok and cli_sim_ok and cli_agg_ok and service_ok and batch_ok
    report("criterion 8 (determinism)", passed,
           f"cli recommend={cli_rec_ok} simulate={cli_sim_ok} aggregate={cli_agg_ok} "
           f"service={service_ok} batch={batch_ok}", elapsed)
    assert passed
