import math
import os

import numpy as np
import pytest

import ppconv


def test_ball_measure_constant_density():
    f = ppconv.Density.constant(2, 1.0, ppconv.Box.cube(2, -1.0, 2.0))
    x = np.array([0.5, 0.5])
    assert f.ball_measure(x, 0.1) == pytest.approx(math.pi * 0.01, rel=1e-12)
    assert f.invert_ball_measure(x, math.pi * 0.01) == pytest.approx(0.1, rel=1e-10)


def test_errors_carry_the_code():
    f = ppconv.Density.constant(2, 1.0, ppconv.Box.cube(2, 0.0, 1.0))
    with pytest.raises(ppconv.PpconvError, match="ball-escapes-support"):
        f.ball_measure(np.array([0.5, 0.5]), 0.9)


def test_sample_poisson_is_reproducible():
    box = ppconv.Box.cube(2, 0.0, 1.0)
    f = ppconv.Density.constant(2, 1.0, box)
    a = ppconv.sample_poisson(f, 500.0, box, seed=4)
    b = ppconv.sample_poisson(f, 500.0, box, seed=4)
    assert a.shape[1] == 2
    assert np.array_equal(a, b)
    assert abs(len(a) - 500) < 5 * math.sqrt(500)


def test_radii():
    square = np.array([[2.0, 0.0], [-2.0, 0.0], [0.0, 2.0], [0.0, -2.0]])
    x = np.zeros(2)
    assert ppconv.inradius(x, square) == pytest.approx(1.0)
    assert ppconv.circumradius(x, square) == pytest.approx(math.sqrt(2.0), abs=1e-9)
    assert ppconv.is_cell_bounded(x, square)
    assert math.isinf(ppconv.circumradius(x, square[:2]))


def test_constants():
    p, se = ppconv.estimate_p_k(1, 2, 20000, 3)
    assert abs(p - 0.5) < 4 * se
    assert ppconv.alpha2(1, 0.5) == 1.0


def test_processes():
    f = ppconv.Density.constant(2, 1.0, ppconv.Box.cube(2, -1.0, 2.0))
    w = ppconv.Window(ppconv.Box.cube(2, 0.0, 1.0))
    s = ppconv.inradius_process(f, w, 1000.0, seed=2)
    hat = ppconv.inradius_process(f, w, 1000.0, seed=2, variant="two_pow_d_c")
    assert np.array_equal(s["atoms"], hat["atoms"])
    assert np.all(np.diff(s["atoms"]) >= 0)
    c = ppconv.circumradius_process(f, w, 1000.0, seed=2, alpha2=1.0, cap=2.0)
    assert np.all(c["atoms"] <= 2.0)

    model = ppconv.BernoulliModel.iid(0.2, 0.0, 2)
    r = ppconv.run_process(model, 1, 20.0, seed=5)
    assert r["atoms"].size > 0
    assert ppconv.run_indicators([0, 1, 1, 1, 0, 1, 1], 3) == [0, 1, 0, 0, 0]


def test_statistics():
    assert ppconv.ks_distance([0.0] * 10, "gumbel") == pytest.approx(1 - math.exp(-1))
    d, se = ppconv.consecutive_ratio_statistic([1] * 200, 1.0, 1)
    assert d == 1.0
    assert se == 0.0


def test_run_experiment_from_dict():
    cfg = {"schema_version": 1, "experiment": "pk_estimate", "seed": 3, "d": 1, "k": 2,
           "samples": 20000, "expected": {"value": 0.5, "tolerance": 0.02}}
    assert ppconv.describe(cfg)["experiment"] == "pk_estimate"
    report = ppconv.run_experiment(cfg)
    assert report["pass"] is True
    assert report["checks"]
    with pytest.raises(ppconv.PpconvError, match="config"):
        ppconv.run_experiment({"schema_version": 1, "experiment": "nope", "seed": 1})


@pytest.mark.skipif("PPCONV_CONFIG_DIR" not in os.environ, reason="needs the shipped configs")
def test_shipped_configs_describe():
    d = os.environ["PPCONV_CONFIG_DIR"]
    names = sorted(n for n in os.listdir(d) if n.endswith(".json"))
    assert names
    for n in names:
        assert ppconv.describe(ppconv.load_config(os.path.join(d, n)))["experiment"] in ppconv.experiment_kinds()
