import dataclasses

import numpy as np
import pytest

from panelfx.errors import InvalidConfig
from panelfx.estimators import fixed_effects_within
from panelfx.panel import balance_report
from panelfx.simulate import (
    SimConfig,
    Study,
    _raw,
    derive_seed,
    generate_corpus,
    generate_panel,
    load_sim_config,
    monte_carlo,
    normals,
    simulate_arrays,
    uniforms,
)


def splitmix64_reference(state, count):
    """Scalar splitmix64 in plain Python integers."""
    mask = (1 << 64) - 1
    out = []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return out


class TestStream:
    def test_known_first_output(self):
        assert int(_raw(0, 0, 1)[0]) == 0xE220A8397B1DCDAF

    @pytest.mark.parametrize("state", [0, 1, 42, 2**64 - 1])
    def test_matches_scalar_reference(self, state):
        assert [int(v) for v in _raw(state, 0, 50)] == splitmix64_reference(state, 50)

    def test_offsets_are_consistent(self):
        full = uniforms(7, 0, 100)
        np.testing.assert_array_equal(uniforms(7, 40, 60), full[40:])

    def test_uniform_range_and_moments(self):
        u = uniforms(123, 0, 200_000)
        assert u.min() >= 0.0 and u.max() < 1.0
        assert abs(u.mean() - 0.5) < 0.005

    def test_normal_moments(self):
        z = normals(5, 0, 200_000)
        assert abs(z.mean()) < 0.01 and abs(z.std() - 1.0) < 0.01

    def test_derive_seed_distinct(self):
        seeds = {derive_seed(42, r) for r in range(1000)}
        assert len(seeds) == 1000


class TestGenerate:
    def test_deterministic(self):
        cfg = SimConfig(seed=99)
        assert generate_panel(cfg) == generate_panel(cfg)
        assert generate_panel(cfg) != generate_panel(dataclasses.replace(cfg, seed=100))

    def test_balanced_shape(self):
        panel = generate_panel(SimConfig(n_entities=12, periods=5))
        rep = balance_report(panel)
        assert rep.balanced and rep.n_entities == 12 and rep.n_times == 5
        assert panel.times == (1, 2, 3, 4, 5)

    def test_noiseless_recovers_delta(self):
        panel = generate_panel(SimConfig(delta=0.79, sigma_e=0.0, sigma_u=5.0, rho=0.5, seed=3))
        fe = fixed_effects_within(panel, "Y", "D")
        assert fe.delta == pytest.approx(0.79, abs=1e-12)
        assert float(fe.residuals @ fe.residuals) <= 1e-18 * panel.n_rows * 100**2

    def test_fully_noiseless(self):
        panel = generate_panel(SimConfig(delta=0.79, sigma_u=0.0, sigma_e=0.0, seed=3))
        for r in panel.rows:
            assert r.values["Y"] == 0.79 * r.values["D"]
        fe = fixed_effects_within(panel, "Y", "D")
        assert fe.delta == pytest.approx(0.79, abs=1e-14)
        assert float(fe.residuals @ fe.residuals) <= 1e-24 * panel.n_rows * 100**2

    @pytest.mark.parametrize("rho", [0.0, 0.8])
    def test_effect_regressor_correlation(self, rho):
        x, _, u = simulate_arrays(SimConfig(n_entities=1000, rho=rho, seed=8))
        corr = np.corrcoef(u, x.mean(axis=1))[0, 1]
        assert corr == pytest.approx(rho, abs=0.08)

    def test_regressor_bounds(self):
        x, _, _ = simulate_arrays(SimConfig(regressor_low=40, regressor_high=90))
        assert x.min() >= 40 and x.max() < 90

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_entities": 0},
            {"periods": 0},
            {"rho": 1.5},
            {"sigma_e": -1.0},
            {"regressor_low": 5.0, "regressor_high": 5.0},
            {"seed": -1},
        ],
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(InvalidConfig):
            SimConfig(**kwargs)


class TestMonteCarlo:
    def test_reproducible(self):
        cfg = SimConfig(seed=17)
        assert monte_carlo(cfg, 20, "fe_slope") == monte_carlo(cfg, 20, Study.FE_SLOPE)

    def test_slope_summary_fields(self):
        s = monte_carlo(SimConfig(), 30, "pooled_slope")
        assert s.rejection_rate is None and s.mean_statistic is None
        assert s.bias == pytest.approx(s.mean_estimate - s.true_delta)
        assert s.rmse**2 == pytest.approx(s.bias**2 + s.sd**2 * 29 / 30)

    def test_re_and_fe_agree_without_correlation(self):
        cfg = SimConfig(rho=0.0, seed=5)
        fe = monte_carlo(cfg, 500, "fe_slope")
        re = monte_carlo(cfg, 500, "re_slope")
        assert abs(fe.mean_estimate - re.mean_estimate) < 3 * fe.mc_se
        # RE is the efficient estimator here
        assert re.sd < fe.sd

    def test_test_study_reports_rates(self):
        s = monte_carlo(SimConfig(), 20, "bp_test")
        assert 0.0 <= s.rejection_rate <= 1.0 and s.mean_statistic > 0

    def test_bad_inputs(self):
        with pytest.raises(InvalidConfig):
            monte_carlo(SimConfig(), 0, "fe_slope")
        with pytest.raises(ValueError):
            monte_carlo(SimConfig(), 5, "nope")


def test_load_config(tmp_path):
    path = tmp_path / "sim.cfg"
    path.write_text("n_entities = 12  # sites\nrho=0.4\nseed = 0x10\n")
    cfg = load_sim_config(path)
    assert cfg == SimConfig(n_entities=12, rho=0.4, seed=16)


@pytest.mark.parametrize("text", ["colour = red\n", "rho = high\n", "rho = 2\n"])
def test_load_config_errors(tmp_path, text):
    path = tmp_path / "sim.cfg"
    path.write_text(text)
    with pytest.raises(InvalidConfig):
        load_sim_config(path)


def test_corpus_layout():
    rows = generate_corpus()
    assert len(rows) == 120
    assert sum(r["desktop_bounce"] is None for r in rows) == 1
    for r in rows:
        assert r["mobile_share"] + r["desktop_share"] == pytest.approx(100.0, abs=1e-3)
        assert 0 <= r["mobile_bounce"] <= 100
    assert generate_corpus() == rows
