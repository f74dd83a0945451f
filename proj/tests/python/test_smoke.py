import math

import numpy as np
import pytest

import gsslogit as g


@pytest.fixture(scope="module")
def design1():
    return g.simulate(design=1, setting=4, seed=7)


def test_simulate_shapes(design1):
    x, e, groups = design1["x"], design1["e"], design1["groups"]
    assert x.shape[0] == 100
    assert e.shape == (100,)
    assert set(np.unique(e)) <= {0, 1}
    assert len(groups) == 50
    assert all(4 <= len(grp) <= 6 for grp in groups)
    assert sorted(c for grp in groups for c in grp) == list(range(x.shape[1]))
    assert design1["true_model"] == [0, 1, 2]


def test_simulate_is_deterministic():
    a = g.simulate(seed=11)
    b = g.simulate(seed=11)
    np.testing.assert_array_equal(a["x"], b["x"])
    np.testing.assert_array_equal(a["e"], b["e"])


@pytest.mark.parametrize("engine", ["gibbs", "neuronized"])
def test_fit_recovers_true_groups(design1, engine):
    out = g.fit(design1["x"], design1["e"], design1["groups"], engine=engine, burnin=500, samples=500, seed=3)
    assert out["z"].shape == (500, 50)
    assert out["selected"] == [0, 1, 2]
    incl = out["inclusion"]
    assert np.all((incl >= 0) & (incl <= 1))
    assert g.select_median_probability_model(incl) == out["selected"]


def test_metrics_hand_example():
    assert g.matthews_correlation(3, 46, 1, 0) == pytest.approx(0.8568, abs=1e-4)
    m = g.compute_metrics([0, 1], [0, 1], 5, np.zeros(2), np.zeros((4, 2)), np.array([0, 1, 0, 1]))
    assert m["sensitivity"] == 1.0 and m["specificity"] == 1.0 and m["mcc"] == 1.0
    assert m["mspe"] == pytest.approx(0.25)


def test_hyperparams():
    h = g.Hyperparams(tau2=1.0, q=0.02)
    assert h.sigma02 == pytest.approx(math.pi**2 * 5.3 / (3 * 7.3))
    assert h.alpha0 == pytest.approx(2.0537489, abs=1e-6)
    assert g.t_scale_for(7.3) == pytest.approx(h.sigma02)
    with pytest.raises(g.UsageError):
        g.Hyperparams(tau2=-1.0, q=0.02)


def test_truncated_normal_respects_bounds():
    v = g.sample_truncated_normal(0.0, 1.0, 5.0, math.inf, 10000, seed=2)
    assert np.all(v > 5.0)
    assert v.mean() == pytest.approx(5.1865, abs=0.01)


def test_oracle_tv_small_problem():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((40, 4))
    y = x[:, 0] + rng.standard_normal(40)
    h = g.Hyperparams(tau2=1.0, q=0.4)
    out = g.oracle_tv(x, [[0, 1], [2, 3]], y, np.ones(40), h, sweeps=20000, seed=5)
    assert len(out["models"]) == 4
    assert sum(out["exact"]) == pytest.approx(1.0)
    assert out["tv"] < 0.05


def test_bad_groups_raise(design1):
    with pytest.raises(g.GssError):
        g.fit(design1["x"], design1["e"], [[0, 1]], samples=10, burnin=0)
