import json
import math

import pytest

import pinlab


def test_kernel_and_green():
    assert pinlab.kernel(1, 2, [0]) == pytest.approx(0.5)
    assert pinlab.kernel(2, 1, [1, 0]) == pytest.approx(0.25)
    g = pinlab.green_pair(4)
    assert not g["divergent"]
    assert abs(g["series"] - g["quadrature"]) / g["value"] < 1e-6
    assert pinlab.green_pair(2)["divergent"]


def test_critical_points():
    assert pinlab.critical_point("discrete", 1) == 0.0
    assert pinlab.critical_point("discrete", 2) == 0.0
    g4 = pinlab.green_pair(4)["value"]
    assert pinlab.critical_point("discrete", 4) == pytest.approx(math.log1p(1 / g4), rel=1e-6)
    rho = 0.5
    assert pinlab.critical_point("continuous", 3, rho) * pinlab.green_ct_value(3, rho) == pytest.approx(1.0, rel=1e-10)
    with pytest.raises(pinlab.ConfigError):
        pinlab.critical_point("sideways", 3)


def test_quenched_routes_agree():
    for route in ("enumeration", "field"):
        a = pinlab.quenched_partition(2, 0.4, 6, 3, True, route)
        b = pinlab.quenched_partition(2, 0.4, 6, 3, True, "renewal")
        assert a == pytest.approx(b, rel=1e-10)


def test_walk_is_reproducible():
    a = pinlab.sample_walk(3, 20, 5)
    assert a == pinlab.sample_walk(3, 20, 5)
    assert len(a) == 21 * 3
    assert a[:3] == [0, 0, 0]


def test_renewal_and_size_bias():
    assert pinlab.renewal_gf(4, 100, 1.0) == pytest.approx(1.0, rel=1e-12)
    lhs, rhs = pinlab.size_bias_check(0.5, 2, 1, lambda x: x * x)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_run_and_errors(tmp_path):
    cfg = {"command": "annealed", "params": {"d": [1, 5], "z_grid": [1.01], "N": 40}, "output": str(tmp_path / "a")}
    files = pinlab.run(json.dumps(cfg))
    assert "critical.csv" in files
    assert files["critical.csv"] == pinlab.sha256_hex((tmp_path / "a" / "critical.csv").read_bytes().decode())
    again = pinlab.run(json.dumps(cfg), out=str(tmp_path / "b"), threads=2)
    assert again == files
    del cfg["params"]["d"]
    with pytest.raises(pinlab.ConfigError, match="params.d"):
        pinlab.run(json.dumps(cfg))
    with pytest.raises(pinlab.ConfigError):
        pinlab.run("{ nope")
