import numpy as np
import pytest

from ptselect.simulation import (
    CensoringSpec,
    ScenarioConfig,
    censoring_preset,
    generate_replicate,
    model_set,
    run_scenario,
    scenario_preset,
    truth_label,
)


def base_cfg(**kw):
    defaults = dict(
        model_set=1,
        J=4,
        n=100,
        sigma=0.1,
        error_corr=0.3,
        censoring=CensoringSpec(kind="none"),
        weights=(0.7, 0.1, 0.1, 0.1),
        replicates=4,
        seed=0,
    )
    defaults.update(kw)
    return ScenarioConfig(**defaults)


def test_model_set_betas_are_unit_vectors():
    for set_id in (1, 2):
        ms = model_set(set_id)
        for j in (1, 2, 3, 4):
            for k in (1, 2, 3):
                assert np.linalg.norm(ms.beta(j, k)) == pytest.approx(1.0, abs=1e-12)


def test_no_censoring_leaves_all_events():
    ds = generate_replicate(base_cfg(), np.random.default_rng(0))
    _, events = ds.censored["resp1"]
    assert events.all()
    assert ds.arm_sizes() == (100, 100, 100)


def test_noiseless_responses_sit_on_the_surfaces():
    cfg = base_cfg(sigma=1e-12)
    ds = generate_replicate(cfg, np.random.default_rng(1))
    ms = model_set(1)
    for k in (1, 2, 3):
        m = ds.arm_mask(k)
        got = ds.complete["resp2"][m]
        want = ms.mean(2, k, ds.X[m])
        assert np.allclose(got, want, atol=1e-9)


def test_random_censoring_hits_target_fraction():
    # 25% preset, n=400, averaged over replicates, per arm
    cfg = base_cfg(n=400, censoring=censoring_preset(1, "random", 25), replicates=1)
    fracs = {1: [], 2: [], 3: []}
    for rep in range(50):
        ds = generate_replicate(cfg, np.random.default_rng(rep))
        _, events = ds.censored["resp1"]
        for k in (1, 2, 3):
            fracs[k].append(1.0 - events[ds.arm_mask(k)].mean())
    for k in (1, 2, 3):
        assert np.mean(fracs[k]) == pytest.approx(0.25, abs=0.04)


def test_fifty_percent_presets_are_calibrated():
    for set_id in (1, 2):
        cfg = base_cfg(
            model_set=set_id, n=400, censoring=censoring_preset(set_id, "random", 50), replicates=1
        )
        fracs = []
        for rep in range(20):
            ds = generate_replicate(cfg, np.random.default_rng(rep))
            _, events = ds.censored["resp1"]
            fracs.append(1.0 - events.mean())
        assert np.mean(fracs) == pytest.approx(0.50, abs=0.06)


def test_covariate_dependent_censoring_depends_on_direction():
    cfg = base_cfg(n=2000, censoring=censoring_preset(1, "covdep", 50), replicates=1)
    ds = generate_replicate(cfg, np.random.default_rng(3))
    _, events = ds.censored["resp1"]
    side = ds.X @ np.array([0.7, 0.3, 0.0, 0.5, -0.5]) > 0
    # zeta1 < zeta2: censoring lighter on the positive side
    assert (1 - events[side].mean()) < (1 - events[~side].mean()) - 0.05


def test_double_exponential_errors_have_target_moments():
    cfg = base_cfg(error_dist="double_exponential", sigma=0.5, error_corr=0.7, n=4000, J=3, weights=(1, 1, 1))
    from ptselect.simulation import _draw_errors

    eps = _draw_errors(cfg, 40000, np.random.default_rng(4))
    cov = np.cov(eps.T)
    assert np.allclose(np.diag(cov), 0.25, atol=0.02)
    assert cov[0, 1] / np.sqrt(cov[0, 0] * cov[1, 1]) == pytest.approx(0.7, abs=0.03)
    # Laplace marginals: excess kurtosis 3 (vs 0 for a normal)
    z = eps[:, 0] / eps[:, 0].std()
    kurt = np.mean(z**4) - 3.0
    assert 2.0 < kurt < 4.5


def test_truth_label_is_seed_reproducible():
    cfg = base_cfg()
    x0 = np.random.default_rng(5).uniform(-1, 1, 5)
    a = truth_label(cfg, x0, np.random.default_rng(6))
    b = truth_label(cfg, x0, np.random.default_rng(6))
    assert a == b
    labels = {truth_label(cfg, x0, np.random.default_rng(s)) for s in range(30)}
    assert labels <= {1, 2, 3}


def test_truth_label_dominant_arm_in_noiseless_limit():
    ms = model_set(1)
    cfg = base_cfg(sigma=1e-9)
    rng = np.random.default_rng(7)
    for _ in range(5):
        x0 = rng.uniform(-1, 1, 5)
        label = truth_label(cfg, x0, np.random.default_rng(1))
        g = np.array([[float(ms.mean(j, k, x0[None, :])[0]) for k in (1, 2, 3)] for j in (1, 2, 3, 4)])
        # the label must be an arm that wins at least one response outright
        winners = {int(np.argmax(g[j])) + 1 for j in range(4)}
        assert label in winners


def test_run_scenario_bookkeeping_and_determinism():
    cfg = base_cfg(n=40, replicates=4, optimizer_restarts=3, optimizer_max_evals=60)
    rep1 = run_scenario(cfg)
    rep2 = run_scenario(cfg)
    assert rep1.hits + rep1.misses + rep1.excluded == cfg.replicates
    assert 0.0 <= rep1.accuracy <= 1.0
    assert rep1.per_replicate == rep2.per_replicate
    assert rep1.to_dict() == rep2.to_dict()
    assert "wall_clock_s" not in rep1.to_dict()  # volatile timing kept out


def test_run_scenario_flags_excessive_failures():
    # n=7 per arm cannot support a 5-dimensional index fit: every replicate
    # fails, is excluded, and the 2% threshold trips
    cfg = base_cfg(n=7, replicates=2, optimizer_restarts=2, optimizer_max_evals=30)
    report = run_scenario(cfg)
    assert report.excluded == 2
    assert report.hits + report.misses == 0
    assert report.failed_threshold_exceeded
    assert len(report.failures) == 2


def test_scenario_preset_parsing():
    cfg = scenario_preset("ms1-j4-n100-none", replicates=10, seed=3)
    assert (cfg.model_set, cfg.J, cfg.n, cfg.censoring.kind) == (1, 4, 100, "none")
    assert cfg.weights == (0.7, 0.1, 0.1, 0.1)
    cfg = scenario_preset("ms2-j3-n400-random50")
    assert (cfg.model_set, cfg.J, cfg.n) == (2, 3, 400)
    assert cfg.censoring.kind == "random" and cfg.censoring.zeta == (0.26, 0.45, 0.55)
    assert cfg.optimizer_restarts == 5  # large-n preset trades budget
    cfg = scenario_preset("ms1-j3-n100-covdep25")
    assert cfg.censoring.kind == "covdep"
    with pytest.raises(ValueError):
        scenario_preset("nonsense")


def test_invalid_configs_rejected():
    with pytest.raises(ValueError):
        base_cfg(model_set=3)
    with pytest.raises(ValueError):
        base_cfg(weights=(1.0,))
    with pytest.raises(ValueError):
        CensoringSpec(kind="weird")
