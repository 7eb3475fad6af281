import csv
import json

import pytest

from ldma.recipes import FIGURE_IDS, figure_recipes, linear_users_curves, run_recipe


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_ids_and_unknown():
    assert list(FIGURE_IDS) == ["fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11",
                                "fig12a", "fig12b"]
    with pytest.raises(KeyError, match="fig12b"):
        figure_recipes("fig13")


def test_recipe_contents():
    assert [v for v, _ in figure_recipes("fig11").configs] == [64, 128, 256, 512]
    fig8 = figure_recipes("fig8")
    cfg = fig8.configs[0][1]
    assert cfg.users == 10 and cfg.n1 == 512 and cfg.num_nlos == 5
    assert set(cfg.schemes) >= {"ldma-zf", "sdma-zf", "ldma-wmmse", "sdma-wmmse"}
    fig6 = figure_recipes("fig6").configs[0][1]
    assert "fd-zf" in fig6.schemes and fig6.distribution == "linear"


def test_fig4_emits(tmp_path):
    meta = run_recipe("fig4", tmp_path)
    rows = _rows(tmp_path / "fig4.csv")
    assert rows[0][:3] == ["N", "exact", "fresnel_approx"]
    assert rows[1][0] == "64" and rows[-1][0] == "4096"
    side = json.loads((tmp_path / "fig4.json").read_text())
    assert side["figure_id"] == "fig4" and "fig4_upa.csv" in meta["files"]


def test_fig5_emits(tmp_path):
    run_recipe("fig5", tmp_path)
    rows = _rows(tmp_path / "fig5.csv")
    assert rows[0] == ["beta0", "abs_gbar", "envelope"]
    env = [float(r[2]) for r in rows[1:]]
    assert all(a >= b for a, b in zip(env, env[1:]))


def test_snr_recipe_small(tmp_path):
    meta = run_recipe("fig8", tmp_path, drops=2, seed=1)
    rows = _rows(tmp_path / "fig8.csv")
    assert rows[0] == ["snr_db", "scheme", "mean_sum_rate", "std_sum_rate", "drops"]
    assert {r[4] for r in rows[1:]} == {"2"}
    assert meta["runs"][0]["seed"] == 1


def test_linear_curves_small():
    c = linear_users_curves([1, 2, 3], n=128, grid_size=40)
    assert c["aub-no-NA"][0] == pytest.approx(c["reachable-same-positions"][0])
    for k in range(3):
        assert c["exhaustive-max"][k] >= c["reachable-same-positions"][k] - 1e-9
