"""End-to-end smoke tests for the Python bindings and the CLI."""

import math
import os
import subprocess
import sys

import pytest

import fsvr


def make_prices(n=500, seed=7, phi=0.7, noise=0.01):
    """Mean-reverting log-return walk, matching the C++ test fixtures."""
    rng = __import__("random").Random(seed)
    dates, closes = [], []
    log_price, ret = math.log(100.0), 0.0
    day = __import__("datetime").date(2015, 1, 1)
    step = __import__("datetime").timedelta(days=1)
    for _ in range(n):
        ret = phi * ret + noise * rng.gauss(0.0, 1.0)
        log_price += ret
        closes.append(math.exp(log_price))
        dates.append(day.isoformat())
        day += step
    return dates, closes


def quick_config():
    config = fsvr.PipelineConfig()
    config.som.rows = 2
    config.som.cols = 2
    config.som.epochs = 10
    config.n_test = 60
    config.min_cluster_size = 5
    config.svr.c = 5.0
    config.svr.epsilon = 0.1
    return config


@pytest.fixture(scope="module")
def trained():
    dates, closes = make_prices()
    series = fsvr.price_series(dates, closes)
    model = fsvr.train_two_stage(series, quick_config())
    return series, model


def test_feature_construction_counts():
    dates, closes = make_prices(300)
    series = fsvr.price_series(dates, closes)
    features = fsvr.build_features(series)
    assert len(features) == 300 - 105
    rows = features.inputs()
    assert len(rows) == len(features)
    assert len(rows[0]) == 5


def test_parse_price_csv_errors():
    with pytest.raises(fsvr.FormatError):
        fsvr.parse_price_csv("Open,High\n1,2\n")
    with pytest.raises(fsvr.DataError):
        fsvr.parse_price_csv("Date,Close\n2020-01-02,-5\n")
    # Both are subclasses of the shared base.
    with pytest.raises(fsvr.Error):
        fsvr.parse_price_csv("")


def test_metrics_round_trip():
    assert fsvr.ds([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 100.0
    assert fsvr.mae([1.0, 2.0], [1.0, 2.0]) == 0.0
    report = fsvr.compute_metrics([0.0, 2.0, 1.0], [0.5, 1.5, 0.5])
    assert report.n == 3
    assert report.nmse > 0.0


def test_train_predict_evaluate(trained):
    series, model = trained
    features = fsvr.build_features(series)
    predictions = fsvr.predict_dataset(model, features)
    assert len(predictions) == len(features)
    assert all(math.isfinite(p) for p in predictions)

    one = fsvr.predict(model, list(features.inputs()[0]))
    assert one == pytest.approx(predictions[0])

    test_tail = fsvr.split_train_test(features, 60)[1]
    report = fsvr.evaluate(model, test_tail)
    assert report.n == 60
    assert math.isfinite(report.nmse)


def test_save_load_parity(trained):
    series, model = trained
    text = fsvr.save_model(model)
    loaded = fsvr.load_model(text)
    assert fsvr.state_fingerprint(loaded) == fsvr.state_fingerprint(model)
    features = fsvr.build_features(series)
    assert fsvr.predict_dataset(loaded, features) == fsvr.predict_dataset(model, features)
    with pytest.raises(fsvr.DataError):
        fsvr.load_model("not json")


def test_rule_export(trained):
    _, model = trained
    assert model.cluster_count >= 1
    counts = model.rule_counts
    assert all(v >= 0 for v in counts.values())


def test_extraction_equivalence_small():
    rng = __import__("random").Random(3)
    rows = [[rng.uniform(-2, 2)] for _ in range(30)]
    targets = [math.sin(r[0]) for r in rows]
    config = fsvr.SvrConfig()
    config.c = 20.0
    config.epsilon = 0.05
    config.sigma = 0.8
    model = fsvr.train_svr(config, rows, targets)
    assert not model.trivial
    ruleset = fsvr.extract_rules(model)
    for _ in range(100):
        x = [rng.uniform(-3, 3)]
        assert fsvr.infer(ruleset, x) == pytest.approx(fsvr.predict_svr(model, x), abs=1e-10)
    text = fsvr.export_rules(ruleset)
    assert text.startswith("R1: IF x1=Gaussmf(")


def test_config_text_round_trip():
    config = quick_config()
    parsed = fsvr.parse_config(fsvr.config_to_text(config))
    assert parsed.som.rows == config.som.rows
    assert parsed.n_test == config.n_test
    with pytest.raises(fsvr.FormatError):
        fsvr.parse_config("bogus.key = 1\n")


def cli_path():
    path = os.environ.get("FSVR_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("FSVR_CLI not set; CLI smoke tests need the built binary")
    return path


def write_price_csv(tmp_path, n=500, seed=7):
    dates, closes = make_prices(n, seed)
    lines = ["Date,Close"] + [f"{d},{c:.6f}" for d, c in zip(dates, closes)]
    path = tmp_path / "prices.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def run_cli(*args):
    return subprocess.run([cli_path(), *args], capture_output=True, text=True)


def test_cli_features_and_train(tmp_path):
    prices = write_price_csv(tmp_path)
    features = tmp_path / "features.csv"
    result = run_cli("features", "-i", str(prices), "-o", str(features))
    assert result.returncode == 0, result.stderr
    header = features.read_text().splitlines()[0]
    assert header.split(",")[:2] == ["date", "x1"]

    config = tmp_path / "run.conf"
    config.write_text("som.rows = 2\nsom.cols = 2\nsom.epochs = 10\n"
                      "n_test = 60\nmin_cluster_size = 5\nsvr.c = 5\nsvr.epsilon = 0.1\n")
    model = tmp_path / "model.json"
    result = run_cli("train", "-i", str(prices), "-c", str(config), "-o", str(model))
    assert result.returncode == 0, result.stderr
    assert model.exists()

    result = run_cli("predict", "-m", str(model), "-i", str(features))
    assert result.returncode == 0, result.stderr
    assert result.stdout.startswith("date,prediction")

    result = run_cli("evaluate", "-m", str(model), "-t", str(features), "-n", "smoke")
    assert result.returncode == 0, result.stderr
    assert result.stdout.startswith("stock,model,nmse,mae,ds,n")
    assert result.stdout.splitlines()[1].startswith("smoke,som-fsvr,")

    result = run_cli("export-rules", "-m", str(model))
    assert result.returncode == 0, result.stderr
    assert "cluster" in result.stdout


def test_cli_experiment(tmp_path):
    prices = write_price_csv(tmp_path)
    manifest = tmp_path / "manifest.txt"
    manifest.write_text(f"demo,{prices.name}\n# a comment\n")
    config = tmp_path / "run.conf"
    config.write_text("som.rows = 2\nsom.cols = 2\nsom.epochs = 10\n"
                      "n_test = 60\nmin_cluster_size = 5\nsvr.c = 5\nsvr.epsilon = 0.1\n")
    out_dir = tmp_path / "report"
    result = run_cli("experiment", "--manifest", str(manifest), "-c", str(config),
                     "-d", str(out_dir))
    assert result.returncode == 0, result.stderr
    assert (out_dir / "report.csv").exists()
    assert (out_dir / "config.txt").exists()
    assert (out_dir / "rules-demo.txt").exists()
    report = (out_dir / "report.csv").read_text()
    assert report.startswith("stock,model,nmse,mae,ds,n")
    assert "demo,som-fsvr," in report


def test_cli_exit_codes(tmp_path):
    result = run_cli("no-such-command")
    assert result.returncode == 1

    bad = tmp_path / "bad.csv"
    bad.write_text("Date,Close\n2020-01-02,-5\n")
    result = run_cli("features", "-i", str(bad))
    assert result.returncode == 2

    missing = tmp_path / "missing.csv"
    result = run_cli("features", "-i", str(missing))
    assert result.returncode == 2
