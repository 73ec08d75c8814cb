import numpy as np
import pytest

cx = pytest.importorskip("convexify")

SMALL = {"grid__n_x1": 21, "grid__n_t": 21}


def test_config_overrides_and_hash():
    a = cx.Config("carleman.lambda = 2\n")
    b = cx.Config("", {"carleman.lambda": "2"})
    assert a.hash() == b.hash()
    assert a.hash() != cx.Config().hash()
    assert "tikhonov.alpha" in cx.Config.keys()
    assert cx.Config(a.canonical()).canonical() == a.canonical()


def test_bad_config_raises():
    with pytest.raises(cx.ConvexifyError):
        cx.Config("bogus.key = 1\n")
    with pytest.raises(cx.ConvexifyError):
        cx.forward(noise__delta=1.5)


def test_forward_default_coefficient():
    out = cx.forward(**SMALL)
    x1 = out["x1"]
    assert out["t"].shape == out["g1"].shape == out["g2"].shape == (21,)
    np.testing.assert_allclose(out["c_true"], np.sin(x1) / (2 + np.sin(x1)), rtol=1e-12, atol=1e-15)
    again = cx.forward(**SMALL)
    assert np.array_equal(out["g1"], again["g1"])
    assert out["grid_hash"] == again["grid_hash"]


def test_session_gradient_matches_differences():
    s = cx.Session(cx._config(carleman__lambda=2, forward__generator="eigenmode", **SMALL))
    assert s.size == int(np.prod(s.shape))
    zero = np.zeros(s.size)
    assert s.J(zero) == 0.0
    assert np.abs(s.gradient(zero)).max() == 0.0

    rng = np.random.default_rng(0)
    w = 0.1 * rng.standard_normal(s.size)
    h = 0.1 * rng.standard_normal(s.size)
    eps = 1e-5
    fd = (s.J(w + eps * h) - s.J(w - eps * h)) / (2 * eps)
    assert fd == pytest.approx(float(s.gradient(w) @ h), rel=1e-6)


def test_session_recover_and_norm():
    s = cx.Session(cx._config(forward__generator="eigenmode", **SMALL))
    c = s.recover(s.w_true)
    out = cx.forward(forward__generator="eigenmode", **SMALL)
    assert c.shape == out["c_true"].shape
    assert np.abs(c - out["c_true"]).max() < 0.05
    # constants have only the L2 term: the square root of the box area
    area = np.ptp(out["x1"]) * np.ptp(out["t"])
    assert s.h4_norm(np.ones(s.size)) == pytest.approx(np.sqrt(area), rel=1e-12)
    with pytest.raises(cx.ConvexifyError):
        s.J(np.zeros(3))


def test_invert_noiseless_separable():
    out = cx.invert(forward__mu=0.5, tikhonov__R=1e7, tikhonov__alpha=1e-8, optimize__restarts=0, **SMALL)
    rep = out["report"]
    assert rep["rel_L2_c"] <= 0.05
    J = out["history_J"]
    assert np.all(np.diff(J) <= 0.0)
    assert out["c_rec"].shape == out["c_true"].shape


def test_verify_exact_checks_pass():
    rep = cx.verify(verify__trials=4, verify__pairs=10, verify__bank=4, verify__adversarial_trials=20, **SMALL)
    assert rep["exact_pass"]
    assert {c["name"] for c in rep["checks"]} >= {"expansion_identity", "gradient_consistency", "bregman_identity"}


def test_sweep_rows():
    rows = cx.sweep(sweep__lambdas="0,2", **SMALL)
    assert [r["lambda"] for r in rows] == [0.0, 2.0]
    assert all(r["rel_L2_c"] <= 0.05 for r in rows)
