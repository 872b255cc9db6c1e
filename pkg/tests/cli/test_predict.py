"""
Tests for the predict CLI command.
"""
import json

import pytest
from typer.testing import CliRunner

from isotns_cli.__main__ import app

runner = CliRunner()


def test_default_table():
    result = runner.invoke(app, ["predict"])
    assert result.exit_code == 0, result.output
    for family in ("mps", "ttns-binary", "ttns-ternary", "mera-binary", "mera-ternary"):
        assert family in result.output
    assert "mps bulk variance chi=2 d=2: 0.18518519" in result.output


def test_single_family_json(tmp_path):
    out = tmp_path / "table.json"
    result = runner.invoke(app, ["predict", "--family", "mera-binary", "--chis", "2", "--output", str(out)])
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert [row["family"] for row in payload["rows"]] == ["mera-binary"]
    assert payload["rows"][0]["b_eta"] == pytest.approx(0.5184)


def test_trh2_scales_bulk(tmp_path):
    out = tmp_path / "table.json"
    result = runner.invoke(app, ["predict", "--family", "mps", "--chis", "2", "--trh2", "2", "--output", str(out)])
    assert result.exit_code == 0, result.output
    assert json.loads(out.read_text())["rows"][0]["bulk_variance"] == pytest.approx(30 / 81)


def test_bad_chis():
    result = runner.invoke(app, ["predict", "--chis", "two"])
    assert result.exit_code == 1
