import math

import numpy as np
import pytest

from dirmod import beamformer as bf, sim
from dirmod.errors import ConfigError
from dirmod.verify import ser_bound_campaign


def test_rayleigh_statistics():
    r = np.random.default_rng(5)
    H = sim.sample_rayleigh(1000, 1000, 2.0, r)
    n = H.size
    assert abs(np.mean(np.abs(H) ** 2) - 2.0) <= 0.01 * 2.0
    assert abs(np.var(H.real) - 1.0) <= 0.01 and abs(np.var(H.imag) - 1.0) <= 0.01
    assert abs(H.mean()) <= 3 * math.sqrt(2.0 / n)


def test_rayleigh_reproducible():
    a = sim.sample_rayleigh(3, 4, 1.0, np.random.default_rng(8))
    b = sim.sample_rayleigh(3, 4, 1.0, np.random.default_rng(8))
    np.testing.assert_array_equal(a, b)


def test_awgn_zero_variance_identity():
    x = np.array([1 + 2j, -3j])
    np.testing.assert_array_equal(sim.add_awgn(x, 0.0, np.random.default_rng(0)), x)


def test_awgn_statistics_and_reproducibility():
    x = np.zeros(10 ** 6, complex)
    y = sim.add_awgn(x, 0.5, np.random.default_rng(1))
    assert abs(np.mean(np.abs(y) ** 2) - 0.5) <= 0.01 * 0.5
    np.testing.assert_array_equal(y, sim.add_awgn(x, 0.5, np.random.default_rng(1)))


def _noiseless(**kw):
    base = dict(noise_variance_R=0.0, noise_variance_E=0.0, trials=1, seed=11)
    base.update(kw)
    return sim.ScenarioConfig(**base)


def test_noiseless_dm_trial_legitimate_exact():
    cfg = _noiseless(scheme="dm", K=4, L=8, N=6)
    for t in range(20):
        (rec,) = sim.run_trial(cfg, sim.trial_streams(cfg.seed, t))
        assert rec.ok and rec.ser_R == 0


def test_noiseless_zf_trial_eavesdropper_exact():
    cfg = _noiseless(scheme="zf", K=4, L=8, N=6)
    for t in range(20):
        (rec,) = sim.run_trial(cfg, sim.trial_streams(cfg.seed, t))
        assert rec.ok and rec.ser_E == 0 and rec.eve_strategy == "zf"


def test_noiseless_dm_direct_attack_usually_fails():
    cfg = _noiseless(scheme="dm", K=4, L=8, N=6)
    recs = [sim.run_trial(cfg, sim.trial_streams(cfg.seed, t))[0] for t in range(200)]
    assert all(r.eve_strategy == "direct" for r in recs)
    # P(all four streams right) = 8**-4 per trial
    assert np.mean([r.ser_E > 0 for r in recs]) > 0.95


def test_dm_power_equals_qp_objective():
    cfg = sim.ScenarioConfig(scheme="dm", K=3, L=5, N=4, trials=1, seed=2)
    for t in range(10):
        streams = sim.trial_streams(cfg.seed, t)
        (rec,) = sim.run_trial(cfg, streams)
        streams = sim.trial_streams(cfg.seed, t)
        H_R = sim.sample_rayleigh(3, 5, 1.0, streams["H_R"])
        s = sim.sample_symbols(8, 3, streams["symbols"])
        sol = bf.design(H_R, s, 8.0)
        assert abs(rec.consumed_power - sol.qp.objective) <= 1e-10 * sol.qp.objective


def test_scenario_deterministic_and_thread_independent():
    cfg = sim.ScenarioConfig(K=2, L=4, N=3, trials=60, seed=9, sweep="L", sweep_values=(3, 5))
    a = sim.run_scenario(cfg)
    b = sim.run_scenario(cfg)
    c = sim.run_scenario(cfg, threads=2)
    assert a == b == c


def test_trial_order_does_not_matter():
    cfg = sim.ScenarioConfig(K=2, L=4, N=5, trials=10, seed=4)
    fwd = [sim.run_trial(cfg, sim.trial_streams(4, t)) for t in range(10)]
    rev = [sim.run_trial(cfg, sim.trial_streams(4, t)) for t in reversed(range(10))]
    assert fwd == rev[::-1]


def test_curve_point_aggregation():
    cfg = sim.ScenarioConfig(K=2, L=4, N=3, trials=50, seed=1)
    pts = sim.run_scenario(cfg)
    assert [p.scheme for p in pts] == ["dm", "zf"]
    for p in pts:
        assert p.trials_used == 50 and p.stderr_power >= 0 and p.x == 4.0
        assert 0 <= p.mean_ser_R <= 1 and 0 <= p.mean_ser_E <= 1


def test_skipped_trials_are_counted_and_flagged():
    cfg = sim.ScenarioConfig(K=4, L=2, N=3, trials=5, seed=1)
    dm, zf_pt = sim.run_scenario(cfg)
    assert dm.trials_used == 0 and dm.flagged
    assert dm.skipped_status == {sim.STRUCTURE_INFEASIBLE: 5}
    assert zf_pt.skipped_status == {sim.PRECODER_UNDEFINED: 5}


def test_dm_legitimate_ser_respects_analytic_bound():
    results, failures = ser_bound_campaign(gamma_values=(1.0, 2.0), trials=1500, seed=3)
    assert not failures, [f.message for f in failures]
    assert len(results) == 2


@pytest.mark.parametrize("field,value", [
    ("K", 0), ("trials", 0), ("M", 6), ("scheme", "mmse"), ("sweep", "N"),
    ("channel_variance", 0.0), ("noise_variance_R", -1.0), ("gamma_sqrt", 0.0), ("seed", -1),
])
def test_config_validation_names_field(field, value):
    with pytest.raises(ConfigError) as info:
        sim.ScenarioConfig(**{field: value})
    assert info.value.field == field


def test_config_round_trip():
    cfg = sim.preset("fig3", seed=5, trials=10)[1]
    assert sim.ScenarioConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("name,checks", [
    ("fig2", dict(N=6, gamma_sqrt=8.0, beta=8.0)),
    ("fig3", dict(K=4, gamma_sqrt=8.0, beta=8.0)),
    ("fig4", dict(L=8, N=6)),
])
def test_presets_use_caption_parameters(name, checks):
    cfgs = sim.preset(name)
    assert cfgs
    for cfg in cfgs:
        for k, v in checks.items():
            assert getattr(cfg, k) == v
        assert cfg.M == 8 and cfg.trials == 10000


def test_gamma_sweep_moves_beta_too():
    cfg = sim.ScenarioConfig(sweep="gamma", sweep_values=(2.0, 5.0))
    assert [(c.gamma_sqrt, c.beta) for _, c in cfg.points()] == [(2.0, 2.0), (5.0, 5.0)]


def test_unknown_preset():
    with pytest.raises(ConfigError):
        sim.preset("fig9")
