import math

import pytest

import pairrank as pr


def test_models():
    th = pr.PreferenceModel.thurstone(0.4)
    assert pr.preference_prob(th, 0.4) == pytest.approx(0.841344746068543, abs=1e-12)
    btl = pr.PreferenceModel.parse("btl")
    assert pr.inverse_preference(btl, 0.75) == pytest.approx(math.log(3.0), abs=1e-14)
    with pytest.raises(pr.DomainError):
        pr.inverse_preference(btl, 1.0)
    with pytest.raises(pr.Error):
        pr.PreferenceModel.parse("probit")


def test_estimate_noiseless_btl():
    a = [3, 1, 4, 1, 5]
    counts = [(i, j, a[i] + a[j], a[i]) for i in range(5) for j in range(i)]
    for algo in ("ls", "wls", "ml"):
        out = pr.estimate(5, counts, pr.PreferenceModel.btl(), algo=algo)
        assert out["reference"] == 4
        for i in range(5):
            assert out["q_hat"][i] == pytest.approx(math.log(a[i] / a[4]), abs=1e-9)
    with pytest.raises(pr.NumericalError):
        pr.estimate(4, [(1, 0, 5, 2), (3, 2, 5, 2)], pr.PreferenceModel.btl())


def test_graph_and_analysis():
    edges = pr.build_graph("regular", 20, degree=4, seed=3)
    assert len(edges) == 40
    path = [(1, 0), (2, 1)]
    wa = pr.walk_analysis(3, path)
    assert wa["inf_norm_m_inverse"] == pytest.approx(5.0)
    assert wa["theta"][0][0] == pytest.approx(2.0)
    assert wa["lambda_c_max"] >= 1.0


def test_metrics():
    assert pr.kendall_tau([0, 1, 2, 3], [3, 2, 1, 0]) == 6
    assert not pr.epsilon_error([0.0, 0.05, 0.5], [2, 1, 0], 0.04)
    assert pr.aligned_mse([1.0, 2.0], [0.0, 1.0]) == pytest.approx(0.0)


def test_sweep_is_deterministic():
    kw = dict(graph="regular", degree=4, trials=20, seed=5, algos=["ls", "wls"])
    m = pr.PreferenceModel.thurstone(0.4)
    a = pr.sweep(12, [20.0, 40.0], m, **kw)
    b = pr.sweep(12, [20.0, 40.0], m, threads=2, **kw)
    assert a == b
    assert len(a) == 4
    assert {p["algo"] for p in a} == {"ls", "wls"}
    two = pr.sweep(20, [60.0], m, graph="regular", degree=4, trials=5, seed=1, algos=["wls"], adaptive=(4, 4))
    assert two[0]["spent_per_object"] <= 60.0
