"""
Tests for the fit CLI command.
"""
import json

import pytest
from typer.testing import CliRunner

from isotns.models import VarianceRecord
from isotns.reporting import emit
from isotns_cli.__main__ import app

runner = CliRunner()


@pytest.fixture
def mera_results(tmp_path):
    records = [
        VarianceRecord(family="mera-binary", chi=2, d=2, size=8, tau_or_site=t, n_samples=500,
                       mean_var=0.2 * 0.5184 ** t, stderr=0.004 * 0.5184 ** t, seed=0)
        for t in range(1, 9)
    ]
    return emit(records, tmp_path / "mera.csv")


def test_fit_default_window(mera_results, tmp_path):
    out = tmp_path / "fit.json"
    result = runner.invoke(app, ["fit", str(mera_results), "--output", str(out)])
    assert result.exit_code == 0, result.output
    assert "decay factor 0.518400" in result.output
    assert "on [2, 6]" in result.output
    assert "predicted b * eta = 0.518400" in result.output
    payload = json.loads(out.read_text())
    assert payload["fit"]["decay_factor"] == pytest.approx(0.5184, abs=1e-12)
    assert payload["predicted"] == pytest.approx(0.5184)


def test_fit_explicit_window(mera_results):
    result = runner.invoke(app, ["fit", str(mera_results), "--fit-min", "1", "--fit-max", "3"])
    assert result.exit_code == 0, result.output
    assert "3 points" in result.output


def test_window_too_small(mera_results):
    result = runner.invoke(app, ["fit", str(mera_results), "--fit-min", "4", "--fit-max", "5"])
    assert result.exit_code == 2
    assert "need at least 3" in result.output


def test_empty_results(tmp_path):
    path = emit([], tmp_path / "empty.csv")
    result = runner.invoke(app, ["fit", str(path)])
    assert result.exit_code == 1
    assert "holds no records" in result.output


def test_missing_file(tmp_path):
    result = runner.invoke(app, ["fit", str(tmp_path / "absent.csv")])
    assert result.exit_code == 1
    assert "Cannot read results" in result.output


@pytest.mark.parametrize("args", [
    ["{path}", "--fit-min", "1", "--fit-max", "3"],
    ["--fit-min", "1", "{path}", "--fit-max", "3"],
    ["--fit-min", "1", "--fit-max", "3", "{path}"],
], ids=["options-last", "options-around", "options-first"])
def test_option_placement(mera_results, args):
    result = runner.invoke(app, ["fit"] + [a.format(path=mera_results) for a in args])
    assert result.exit_code == 0, result.output
    assert "decay factor 0.518400" in result.output
    assert "on [1, 3]" in result.output
