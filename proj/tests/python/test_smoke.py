import numpy as np
import pytest

import gllrss


def small_instance(seed=3):
    return gllrss.generate_instance(n=10, m=30, rank=2, sigma_n=0.5, seed=seed)


def test_version():
    assert gllrss.__version__ == "0.1.0"


def test_generate_instance_shapes():
    d = small_instance()
    assert d["L"].shape == (10, 10)
    assert d["X"].shape == (10, 30)
    assert d["Y"].shape == (10, 30)
    assert np.allclose(d["R"], np.eye(10))
    assert np.isclose(np.trace(d["L"]), 10.0)
    ok, _ = gllrss.validate_cgl(d["L"])
    assert ok


def test_gl_lrss_returns_valid_laplacian():
    d = small_instance()
    cfg = gllrss.SolverConfig()
    cfg.alpha, cfg.beta, cfg.gamma = 0.01, 1.0, 0.0
    res = gllrss.gl_lrss(d["Y"], None, cfg)
    ok, report = gllrss.validate_cgl(res.l_hat, 1e-6)
    assert ok, report
    assert np.isclose(np.trace(res.l_hat), 10.0, rtol=1e-6)
    assert res.x_hat.shape == d["Y"].shape
    trace = np.asarray(res.objective_trace)
    assert np.all(np.diff(trace) <= 1e-6)
    scores = gllrss.score(res.l_hat, d["L"], x_hat=res.x_hat, x_true=d["X"])
    assert 0.0 <= scores["f_measure"] <= 1.0
    assert scores["lce"] >= 0.0


def test_diagonal_transition_and_acf():
    d = gllrss.generate_instance(n=8, m=40, rank=2, seed=5, transition="gaussian")
    coeffs = np.diag(d["R"])
    res = gllrss.gl_lrss(d["Y"], coeffs)
    assert res.outer_iterations >= 1
    c = gllrss.estimate_transition_acf(d["Y"])
    assert c.shape == (8,)
    assert np.all((c >= 0) & (c < 1))


def test_svt_and_projection():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((5, 7))
    s = np.linalg.svd(m, compute_uv=False)
    assert np.allclose(gllrss.svt(m, s[0]), 0.0)
    expected = np.linalg.svd(m, compute_uv=False) - 0.3
    got = np.linalg.svd(gllrss.svt(m, 0.3), compute_uv=False)
    assert np.allclose(got[expected > 0], expected[expected > 0])
    p = gllrss.project_cgl_star(rng.standard_normal((2, 2)) * 0 + 3.0, 2.0)
    assert np.allclose(p, [[1, -1], [-1, 1]])


def test_weighted_difference():
    x = np.arange(12, dtype=float).reshape(3, 4)
    d = gllrss.weighted_difference(x)
    assert np.allclose(d[:, 0], x[:, 0])
    assert np.allclose(d[:, 1:], x[:, 1:] - x[:, :-1])


def test_errors_map_to_value_error():
    with pytest.raises(ValueError):
        gllrss.svt(np.ones((2, 2)), -1.0)
    with pytest.raises(ValueError):
        gllrss.gl_lrss(np.ones((3, 1)))
    with pytest.raises(ValueError):
        gllrss.generate_instance(graph="lattice")
