import math

import numpy as np
import pytest

import pdrssn


def test_sphere_roundtrip():
    p = np.array([0.0, 0.0, 1.0])
    q = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
    v = pdrssn.sphere_log(p, q)
    assert abs(np.linalg.norm(v) - pdrssn.sphere_dist(p, q)) < 1e-12
    assert np.allclose(pdrssn.sphere_exp(p, v), q, atol=1e-12)


def test_spd_roundtrip():
    p = np.diag([1.0, 2.0, 3.0])
    q = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 4.0]])
    assert np.allclose(pdrssn.spd_exp(p, pdrssn.spd_log(p, q)), q, atol=1e-10)
    assert pdrssn.spd_dist(p, p) < 1e-12


def test_generators():
    lem = pdrssn.lemniscate(64)
    assert lem.shape == (64, 1, 3)
    assert np.allclose(np.linalg.norm(lem, axis=-1), 1.0)
    assert pdrssn.rotations_image(5).shape == (5, 5, 3)
    spd = pdrssn.spd_image(4)
    assert spd.shape == (4, 4, 3, 3)
    assert np.all(np.linalg.eigvalsh(spd) > 0)
    with pytest.raises(pdrssn.Error):
        pdrssn.rotations_image(2)


def test_delta_and_rates():
    assert abs(pdrssn.exact_rof_delta(math.pi / 2, 10, 5.0) - 0.31831) < 1e-5
    q = pdrssn.q_rates([1e-1, 1e-2, 1e-4, 1e-8])
    assert q[0] is None and q[1] is None
    assert q[2] == pytest.approx(2.0) and q[3] == pytest.approx(2.0)


def test_run_known_minimizer():
    summary = pdrssn.run({
        "experiment": "known_minimizer_1d",
        "manifold": "Sphere2",
        "dataset": {"ell": 4},
        "params": {"alpha": 1.0, "sigma": 0.5, "tau": 0.5},
        "solver": {"max_iters": 30, "eps_rel_stop": 1e-10},
        "warm_starts": ["dual_warm"],
    })
    assert [r["ok"] for r in summary["runs"]] == [True]
    assert summary["summary"][0]["final_dist_to_reference"] < 1e-8


def test_config_error():
    with pytest.raises(pdrssn.ConfigError):
        pdrssn.run({"experiment": "denoise_2d", "params": {"alpha": -1.0}})
