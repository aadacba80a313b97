import json
import math

import pytest

raresim = pytest.importorskip("raresim")


def test_version_string():
    assert raresim.__version__.startswith("raresim ")


def test_benchmark_registry():
    ids = raresim.benchmark_ids()
    assert "g11" in ids
    assert "oscillator" in ids


def test_evaluate_g11():
    # g11 = 4 - (x1 + x2) / sqrt(2); at the origin that is 4
    assert raresim.evaluate("g11", [0.0, 0.0]) == pytest.approx(4.0)
    boundary = [2.0 * math.sqrt(2.0), 2.0 * math.sqrt(2.0)]
    assert raresim.evaluate("g11", boundary) == pytest.approx(0.0, abs=1e-12)


def test_evaluate_rejects_bad_dimension():
    with pytest.raises(ValueError):
        raresim.evaluate("g11", [0.0, 0.0, 0.0], d=2)


def test_single_run_is_deterministic():
    cfg = json.dumps(
        {"benchmark": "g11", "d": 2, "mode": "standard",
         "N": 100, "p0": 0.1, "seed": 1, "max_levels": 12}
    )
    a = raresim.run(cfg)
    b = raresim.run(cfg)
    assert a["p_f"] == b["p_f"]
    assert a["p_f"] > 0.0
    assert a["n_total"] == b["n_total"]
    assert a["levels_count"] == len(a["levels"])


def test_experiment_aggregate(tmp_path):
    cfg = json.dumps(
        {"benchmark": "g11", "d": 2, "mode": "standard",
         "N": 100, "p0": 0.1, "n_runs": 2, "seed": 1,
         "max_levels": 12, "out": str(tmp_path)}
    )
    rep = raresim.run_experiment(cfg)
    assert rep["total_runs"] == 2
    assert rep["failed_runs"] == 0
    assert len(rep["cells"]) == 1
    assert rep["cells"][0]["mean_pf"] > 0.0
    assert (tmp_path / "aggregate.csv").exists()
    assert (tmp_path / "plotdata.csv").exists()


def test_invalid_config_raises():
    with pytest.raises(ValueError):
        raresim.run(json.dumps({"p0": 1.5}))
