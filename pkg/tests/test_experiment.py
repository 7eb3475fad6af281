import numpy as np
import pytest

from ldma.config import ScenarioConfig
from ldma.experiment import (
    DropError,
    generate_scenario,
    run_drop,
    run_experiment,
    write_result,
)

SMALL = dict(n1=64, users=3, drops=4, snr_db=[10.0], r_min=4.0, r_max=30.0)


def test_uniform_radius_mean():
    cfg = ScenarioConfig(users=100, r_min=4.0, r_max=100.0, num_nlos=0, kappa=float("inf"))
    r = np.concatenate([[l.r for l in generate_scenario(cfg, d).locations] for d in range(100)])
    assert r.size == 10_000
    assert r.mean() == pytest.approx(52.0, rel=0.02)


def test_linear_users_share_angle():
    cfg = ScenarioConfig(distribution="linear", theta=1.3, phi=0.25, users=6, n1=64)
    locs = generate_scenario(cfg, 0).locations
    assert {(l.theta, l.phi) for l in locs} == {(1.3, 0.25)}


def test_same_drop_same_users():
    cfg = ScenarioConfig(**SMALL)
    a, b = generate_scenario(cfg, 2), generate_scenario(cfg, 2)
    assert a.locations == b.locations
    np.testing.assert_array_equal(a.matrix, b.matrix)
    assert generate_scenario(cfg, 3).locations != a.locations


def test_single_user_interference_free():
    for snr in (0.0, 10.0, 20.0):
        cfg = ScenarioConfig(n1=128, users=1, num_nlos=0, kappa=float("inf"),
                             schemes=["infinite-zf"], snr_db=[snr], drops=3)
        res = run_experiment(cfg)
        assert res.mean("infinite-zf") == pytest.approx(np.log2(1 + 10 ** (snr / 10) * 128), rel=1e-6)


def test_paired_channels_across_schemes():
    base = ScenarioConfig(**SMALL, schemes=["ldma-zf"])
    other = base.replace(schemes=["sdma-zf", "ldma-wmmse"])
    for d in range(3):
        np.testing.assert_array_equal(generate_scenario(base, d).matrix, generate_scenario(other, d).matrix)


def test_threads_do_not_change_results():
    cfg = ScenarioConfig(**SMALL, schemes=["ldma-zf", "sdma-wmmse"])
    a = run_experiment(cfg, threads=1)
    b = run_experiment(cfg, threads=3)
    assert [r["sum_rate"] for r in a.rows] == [r["sum_rate"] for r in b.rows]
    assert [r["drop"] for r in b.rows] == sorted(r["drop"] for r in b.rows)


def test_drop_error_coordinates():
    cfg = ScenarioConfig(n1=64, users=3, distribution="linear", num_nlos=0, kappa=float("inf"),
                         r_min=40.0, r_max=40.0, schemes=["infinite-zf"], snr_db=[5.0], drops=1)
    with pytest.raises(DropError) as info:
        run_drop(cfg, 0)
    assert info.value.drop == 0 and info.value.scheme == "infinite-zf" and info.value.snr_db == 5.0
    rows = run_drop(cfg.replace(ill_conditioned="drop-users"), 0)
    assert rows[0]["sum_rate"] == pytest.approx(np.log2(1 + 10 ** 0.5 * 64))


def test_write_result(tmp_path):
    cfg = ScenarioConfig(**SMALL, schemes=["ldma-zf", "fd-zf"])
    res = run_experiment(cfg)
    paths = write_result(res, tmp_path)
    lines = open(paths["summary"]).read().splitlines()
    assert lines[0] == "snr_db,scheme,mean_sum_rate,std_sum_rate,drops"
    assert len(lines) == 3
    drops = open(paths["drops"]).read().splitlines()
    assert drops[0].endswith("rate_1,rate_2,rate_3") and len(drops) == 1 + 2 * 4
    assert '"seed": 0' in open(paths["metadata"]).read()
