import json

import numpy as np
import pandas as pd
import pytest

from scripts.make_fixtures import logistic_fixture, write_series
from symchaos.cli import (
    EXIT_DIVERGENCE,
    EXIT_ERROR,
    EXIT_NOT_CHAOTIC,
    EXIT_OK,
    EXIT_WINDOWS,
    main,
    validate_report,
)
from symchaos.config import REFERENCE_MODEL_PATH
from symchaos.series_io import DimensionEstimate
from symchaos.state_model import LinearForcedModel, reference_model

LOGISTIC_FLAGS = ["--lag", "1", "--dim", "2", "--min-frag-len", "4"]


def test_analyze_logistic(fixture_csvs, tmp_path):
    report_path = tmp_path / "report.json"
    curve_path = tmp_path / "divergence.csv"
    code = main(["analyze", str(fixture_csvs["logistic"]), "-o", str(report_path), *LOGISTIC_FLAGS,
                 "--generations", "20", "--divergence-out", str(curve_path)])
    assert code == EXIT_OK

    report = validate_report(report_path)
    assert report.lyapunov.exponent > 0
    assert len(report.best_pairs) >= 1
    assert report.horizon > 0
    assert report.oracle_pairs is None or report.oracle_pairs[0].distance <= report.best_pairs[0].distance
    assert len(report.descriptors) == len(report.fragments)
    assert len(pd.read_csv(curve_path)) == len(report.lyapunov.divergence)


def test_analyze_is_deterministic(fixture_csvs, tmp_path):
    outputs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        assert main(["analyze", str(fixture_csvs["logistic"]), "-o", str(path), *LOGISTIC_FLAGS,
                     "--generations", "5", "--seed", "3"]) == EXIT_OK
        outputs.append(path.read_text())
    assert outputs[0] == outputs[1]


def test_analyze_sine_is_not_chaotic(fixture_csvs, tmp_path, capsys):
    code = main(["analyze", str(fixture_csvs["sine"]), "-o", str(tmp_path / "r.json")])
    assert code == EXIT_NOT_CHAOTIC
    assert "Lyapunov" in capsys.readouterr().out
    assert not (tmp_path / "r.json").exists()


def test_analyze_missing_file(tmp_path):
    assert main(["analyze", str(tmp_path / "missing.csv")]) == EXIT_ERROR


def test_generate_then_identify_round_trip(tmp_path):
    series_path, states_path, model_path = tmp_path / "y.csv", tmp_path / "states.json", tmp_path / "model.json"
    assert main(["generate", str(REFERENCE_MODEL_PATH), "--steps", "1000", "-o", str(series_path),
                 "--states-out", str(states_path)]) == EXIT_OK
    assert main(["identify", str(states_path), "-o", str(model_path)]) == EXIT_OK

    identified = LinearForcedModel.load(model_path)
    reference = reference_model()
    assert np.linalg.norm(identified.A - reference.A) < 1e-6
    assert np.abs(identified.psi_amp - reference.psi_amp).max() < 1e-6
    np.testing.assert_allclose(identified.C, reference.C, rtol=1e-6)


def test_modulated_generate_round_trip(tmp_path):
    states_path, model_path = tmp_path / "states.json", tmp_path / "model.json"
    assert main(["generate", str(REFERENCE_MODEL_PATH), "--steps", "1000", "-o", str(tmp_path / "y.csv"),
                 "--modulator", "p:0.001;breaks:300,600;q:1,0.5,1.2", "--states-out", str(states_path)]) == EXIT_OK
    assert json.loads(states_path.read_text())["modulator"].startswith("p:")
    assert main(["identify", str(states_path), "-o", str(model_path)]) == EXIT_OK
    assert np.linalg.norm(LinearForcedModel.load(model_path).A - reference_model().A) < 1e-6


def test_identify_too_few_transitions(tmp_path, capsys):
    path = tmp_path / "two.csv"
    path.write_text("0.1\n0.2\n")
    assert main(["identify", str(path), "--lag", "1", "--dim", "1", "-o", str(tmp_path / "m.json")]) == EXIT_ERROR
    assert "too few transitions" in capsys.readouterr().out


def test_identify_rank_deficient(tmp_path, capsys):
    path = tmp_path / "flat.csv"
    path.write_text("0.5\n" * 50)
    assert main(["identify", str(path), "--lag", "1", "--dim", "2", "-o", str(tmp_path / "m.json")]) == EXIT_ERROR
    assert "condition" in capsys.readouterr().out


def test_generate_unmodulated_output(tmp_path):
    out = tmp_path / "y.csv"
    assert main(["generate", str(REFERENCE_MODEL_PATH), "--steps", "1000", "-o", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert len(frame) == 1001
    model = reference_model()
    assert frame["y"].iloc[0] == pytest.approx(float(model.C @ model.x0))


def test_unit_modulator_is_byte_identical(tmp_path):
    plain, unit = tmp_path / "plain.csv", tmp_path / "unit.csv"
    assert main(["generate", str(REFERENCE_MODEL_PATH), "--steps", "500", "-o", str(plain)]) == EXIT_OK
    assert main(["generate", str(REFERENCE_MODEL_PATH), "--steps", "500", "-o", str(unit),
                 "--modulator", "p:0;breaks:;q:1"]) == EXIT_OK
    assert plain.read_bytes() == unit.read_bytes()


def test_generate_divergence(tmp_path, capsys):
    code = main(["generate", str(REFERENCE_MODEL_PATH), "--steps", "100", "-o", str(tmp_path / "y.csv"),
                 "--modulator", "p:0;breaks:;q:1e14"])
    assert code == EXIT_DIVERGENCE
    assert "step" in capsys.readouterr().out


def test_generate_malformed_modulator(tmp_path):
    assert main(["generate", str(REFERENCE_MODEL_PATH), "-o", str(tmp_path / "y.csv"),
                 "--modulator", "p:1;q:"]) == EXIT_ERROR


def test_sweep_tent_is_robust(tmp_path):
    out = tmp_path / "tent.csv"
    report = tmp_path / "tent.json"
    code = main(["sweep", "--family", "tent", "--lo", "1.1", "--hi", "1.9", "--steps", "81",
                 "-o", str(out), "--report", str(report)])
    assert code == EXIT_OK
    windows = json.loads(report.read_text())
    assert windows["windows"] == [] and windows["verdict"] == "robust"
    assert len(pd.read_csv(out)) == 81


def test_sweep_logistic_finds_windows(tmp_path):
    out = tmp_path / "logistic.csv"
    code = main(["sweep", "--family", "logistic", "--lo", "3.8", "--hi", "3.9", "--steps", "21",
                 "--iters", "20000", "-o", str(out)])
    assert code == EXIT_WINDOWS
    windows = json.loads(out.with_suffix(".windows.json").read_text())["windows"]
    assert any(lo <= 3.84 <= hi for lo, hi in windows)


def test_sweep_unknown_family(tmp_path):
    assert main(["sweep", "--family", "henon", "--lo", "0", "--hi", "1", "-o", str(tmp_path / "s.csv")]) == EXIT_ERROR


def test_sweep_missing_arguments():
    assert main(["sweep", "--family", "tent"]) == EXIT_ERROR


def test_compare_with_itself(fixture_csvs, tmp_path):
    out = tmp_path / "cmp.json"
    path = str(fixture_csvs["logistic"])
    assert main(["compare", path, path, "-o", str(out), *LOGISTIC_FLAGS]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["lambda_difference"] == 0.0
    assert report["mean_descriptor_distance"] == 0.0


def test_compare_scaled_copy(fixture_csvs, tmp_path):
    scaled = tmp_path / "scaled.csv"
    write_series(10 * logistic_fixture(5000), scaled)
    out = tmp_path / "cmp.json"
    assert main(["compare", str(fixture_csvs["logistic"]), str(scaled), "-o", str(out), *LOGISTIC_FLAGS]) == EXIT_OK
    assert json.loads(out.read_text())["mean_descriptor_distance"] < 1e-6


def test_compare_logistic_and_sine(fixture_csvs, tmp_path):
    out = tmp_path / "cmp.json"
    assert main(["compare", str(fixture_csvs["logistic"]), str(fixture_csvs["sine"]), "-o", str(out),
                 *LOGISTIC_FLAGS]) == EXIT_OK
    assert json.loads(out.read_text())["lyapunov_mismatch"] is True


def test_no_command_prints_help(capsys):
    assert main([]) == EXIT_ERROR
    assert "analyze" in capsys.readouterr().out


def test_identify_csv_fits_output_map(tmp_path):
    s = logistic_fixture(400)
    y = np.append(2.0 * s[:-1] - 0.5 * s[1:], 0.0)
    path = tmp_path / "tsy.csv"
    pd.DataFrame({"t": np.arange(s.size), "s": s, "y": y}).to_csv(path, index=False, header=False, float_format="%.17g")
    model_path = tmp_path / "m.json"
    assert main(["identify", str(path), "--column", "1", "--output-column", "2", "--lag", "1", "--dim", "2",
                 "-o", str(model_path)]) == EXIT_OK
    np.testing.assert_allclose(LinearForcedModel.load(model_path).C, [2.0, -0.5], atol=1e-8)


def test_identify_rejects_unknown_forcing_key(tmp_path, capsys):
    path = tmp_path / "states.json"
    states = np.random.default_rng(2).standard_normal((50, 2)).tolist()
    path.write_text(json.dumps({"states": states, "forcing": {"alpha": 1e-4, "gamma": 0.4, "beta": 1}}))
    assert main(["identify", str(path), "-o", str(tmp_path / "m.json")]) == EXIT_ERROR
    assert "beta" in capsys.readouterr().out


def test_compare_reports_saturated_embedding(fixture_csvs, tmp_path, monkeypatch):
    monkeypatch.setattr("symchaos.cli.estimate_dimension",
                        lambda *args, **kwargs: DimensionEstimate(dim=2, saturated=True, fnn_fractions=(0.5, 0.4)))
    out = tmp_path / "cmp.json"
    path = str(fixture_csvs["logistic"])
    assert main(["compare", path, path, "-o", str(out), "--lag", "1", "--min-frag-len", "4"]) == EXIT_OK
    assert any("saturated" in w for w in json.loads(out.read_text())["warnings"])
