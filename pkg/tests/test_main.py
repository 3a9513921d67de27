import json
import math

import pandas as pd
import pytest

import analytics
import main
import selftest
from main import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VERIFY
from selftest import SelftestFailure


def test_parse_config_defaults():
    config = main.parse_config(["simulate"])
    assert config.seed == 0
    assert config.ns == (10000,)
    assert config.alphas == main.FAN_ALPHAS
    assert main.parse_config(["verify", "--seed", "3"]).trials == 100


def test_parse_config_lists():
    config = main.parse_config(["simulate", "--alpha", "0.1,0.2", "--alpha", "0.5", "--n", "1e3", "--n", "200"])
    assert config.alphas == (0.1, 0.2, 0.5)
    assert config.ns == (1000, 200)


def test_parse_config_drops_repeated_values():
    config = main.parse_config(["simulate", "--alpha", "0.5,0.5", "--alpha", "0.50", "--n", "100,1e2"])
    assert config.alphas == (0.5,)
    assert config.ns == (100,)


def test_simulate_repeated_alpha_writes_each_route_once(tmp_path):
    argv = ["simulate", "--n", "50", "--alpha", "0.5,0.5", "--trials", "2", "--exit-grid", "0", "--out", str(tmp_path)]
    assert main.main(argv) == EXIT_OK
    routes = pd.read_csv(tmp_path / "routes_n=50_alpha=0.5.csv", float_precision="round_trip")
    assert sorted(routes["trial"].unique()) == [0, 1]
    for _, group in routes.groupby("trial"):
        assert group["m"].tolist() == list(range(1, len(group) + 1))


@pytest.mark.parametrize("argv", [
    ["verify"],
    ["curve", "--alpha", "1.0"],
    ["simulate", "--n", "1"],
    ["simulate", "--trials", "0"],
    ["curve", "--format", "xml"],
    ["curve", "--grid", "1"],
    ["simulate", "--n", "2.5"],
    ["simulate", "--alpha", "half"],
    ["curve", "--calibrate"],
    ["plot"],
])
def test_usage_errors(argv, tmp_path):
    assert main.main(argv + ["--out", str(tmp_path)]) == EXIT_USAGE


def test_curve_files(tmp_path):
    assert main.main(["curve", "--alpha", "0,0.5", "--out", str(tmp_path)]) == EXIT_OK
    zero = pd.read_csv(tmp_path / "curve_alpha=0.csv", float_precision="round_trip")
    assert list(zero.columns) == ["s", "beta", "kappa", "U", "V"]
    assert (zero["beta"] == 0.0).all()
    assert len(zero) == analytics.DEFAULT_GRID_SIZE

    half = pd.read_csv(tmp_path / "curve_alpha=0.5.csv", float_precision="round_trip")
    assert (half["s"].iloc[0], half["beta"].iloc[0]) == pytest.approx((0.0, math.sqrt(2)), abs=1e-12)
    assert (half["s"].iloc[-1], half["beta"].iloc[-1]) == pytest.approx((2 / math.pi, 2 / math.pi), abs=1e-12)
    assert half["V"].iloc[0] == pytest.approx(4 / math.pi, abs=1e-12)


def test_curve_csv_format(tmp_path):
    main.main(["curve", "--alpha", "0.3", "--grid", "5", "--out", str(tmp_path)])
    raw = (tmp_path / "curve_alpha=0.3.csv").read_bytes()
    assert b"\r\n" not in raw
    assert raw.startswith(b"s,beta,kappa,U,V\n")
    frame = pd.read_csv(tmp_path / "curve_alpha=0.3.csv", float_precision="round_trip")
    assert frame["beta"].tolist() == [analytics.beta(0.3, s) for s in frame["s"]]


def test_curve_json(tmp_path):
    main.main(["curve", "--alpha", "0.5", "--grid", "2", "--format", "json", "--out", str(tmp_path)])
    data = json.loads((tmp_path / "curve_alpha=0.5.json").read_text(encoding="utf-8"))
    assert data["schema_version"] == 1
    assert data["samples"][0] == pytest.approx([0.0, math.sqrt(2)], abs=1e-12)


def test_curve_fan(tmp_path):
    assert main.main(["curve", "--grid", "20", "--out", str(tmp_path)]) == EXIT_OK
    assert len(list(tmp_path.glob("curve_alpha=*.csv"))) == 9


def test_simulate_two_boxes(tmp_path):
    assert main.main(["simulate", "--n", "2", "--alpha", "0", "--trials", "3", "--out", str(tmp_path)]) == EXIT_OK
    routes = pd.read_csv(tmp_path / "routes_n=2_alpha=0.csv", float_precision="round_trip")
    assert routes.groupby("trial")["m"].max().tolist() == [2, 2, 2]
    assert (routes["column"] == 1).all()


def test_simulate_is_reproducible(tmp_path):
    argv = ["simulate", "--n", "2000", "--alpha", "0.5", "--trials", "2", "--seed", "0", "--exit-grid", "16"]
    assert main.main(argv + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main.main(argv + ["--workers", "2", "--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("routes_n=2000_alpha=0.5.csv", "exit_points_n=2000_alpha=0.5.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def _loose_thresholds(path):
    path.write_text(json.dumps({"schema_version": 1, "sup_distance": {"100": 0.5},
                                "kappa_statistic": {"100": 1.5}}), encoding="utf-8")
    return path


def test_verify_trivial_pass(tmp_path):
    thresholds = _loose_thresholds(tmp_path / "thresholds.json")
    argv = ["verify", "--n", "100", "--alpha", "0", "--trials", "1", "--seed", "0",
            "--thresholds", str(thresholds), "--format", "json", "--out", str(tmp_path)]
    assert main.main(argv) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert report["cells"][0]["sup_distance_median"] == pytest.approx(0.1)


def test_verify_report_is_byte_identical(tmp_path):
    argv = ["verify", "--n", "100,300", "--alpha", "0.3,0.7", "--trials", "4", "--seed", "5", "--calibrate"]
    assert main.main(argv + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main.main(argv + ["--workers", "2", "--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("report.csv", "thresholds.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_calibrated_thresholds_load_back(tmp_path):
    main.main(["verify", "--n", "100", "--alpha", "0.5", "--trials", "3", "--seed", "1", "--calibrate",
               "--out", str(tmp_path)])
    assert main.main(["verify", "--n", "100", "--alpha", "0.5", "--trials", "3", "--seed", "1",
                      "--thresholds", str(tmp_path / "thresholds.json"), "--out", str(tmp_path)]) == EXIT_OK


def test_verify_fails_on_corrupted_beta(tmp_path, fresh_curves, monkeypatch, caplog):
    original = analytics.beta
    monkeypatch.setattr(analytics, "beta", lambda alpha, s: 1.5 * original(alpha, s))
    argv = ["verify", "--n", "1000", "--alpha", "0.5", "--trials", "1", "--seed", "0", "--out", str(tmp_path)]
    assert main.main(argv) == EXIT_VERIFY
    assert "sup_distance_threshold" in caplog.text


def test_missing_thresholds_file_is_io_error(tmp_path):
    argv = ["verify", "--n", "100", "--alpha", "0", "--trials", "1", "--seed", "0",
            "--thresholds", str(tmp_path / "missing.json"), "--out", str(tmp_path)]
    assert main.main(argv) == EXIT_IO


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    assert main.main(["curve", "--alpha", "0.5", "--grid", "3", "--out", str(blocker / "sub")]) == EXIT_IO


def test_selftest_passes():
    assert main.main(["selftest"]) == EXIT_OK


def test_selftest_catches_omega_sign_flip(monkeypatch, caplog):
    original = analytics.omega
    monkeypatch.setattr(analytics, "omega", lambda u: -original(u))
    assert main.main(["selftest"]) == EXIT_VERIFY
    assert "omega_identities" in caplog.text


def test_selftest_check_raises_without_asserts(monkeypatch):
    monkeypatch.setattr(analytics, "omega", lambda u: 0.0)
    with pytest.raises(SelftestFailure, match="omega"):
        selftest.check_omega()


@pytest.mark.parametrize("content", [
    '{"schema_version": 1, "kappa_statistic": {"1000": 0.3}}',
    '{"schema_version": 1, "sup_distance": {"1000": "x"}, "kappa_statistic": {"1000": 0.3}}',
    '{"schema_version": 1, "sup_distance": {}, "kappa_statistic": {"1000": 0.3}}',
    '{"schema_version": 1, "sup_distance": {"1000": 0.0}, "kappa_statistic": {"1000": 0.3}}',
    '{"schema_version": 1, "sup_distance": [0.3], "kappa_statistic": {"1000": 0.3}}',
    '[1, 2]',
    '{"schema_version": 2}',
    'not json',
])
def test_malformed_thresholds_file_is_usage_error(tmp_path, content, caplog):
    path = tmp_path / "thresholds.json"
    path.write_text(content, encoding="utf-8")
    argv = ["verify", "--n", "100", "--alpha", "0", "--trials", "1", "--seed", "0",
            "--thresholds", str(path), "--out", str(tmp_path)]
    assert main.main(argv) == EXIT_USAGE
    assert str(path) in caplog.text
