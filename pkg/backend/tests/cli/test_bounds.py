import json

import pandas as pd
import pytest

from app.main import app


def test_heisenberg_rmse_at_full_visibility(runner, tmp_path):
    result = runner.invoke(
        app,
        ["bounds", "--M", "8", "--N", "1000", "--eta", "0.1", "--V", "1", "--f", "0",
         "--out", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    table = pd.read_csv(tmp_path / "bounds.csv")
    assert set(table["strategy"]) == {"bft", "outlier"}
    assert table["rmse_lower"].tolist() == pytest.approx([0.019764] * 2, abs=1e-6)
    assert table["gain_db"].tolist() == pytest.approx([9.0309] * 2, abs=1e-4)
    assert (tmp_path / "bounds.manifest.json").is_file()


def test_outlier_advantage_column(runner, tmp_path):
    result = runner.invoke(
        app, ["bounds", "--M", "10", "--f", "2", "--V", "1", "--out", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    table = pd.read_csv(tmp_path / "bounds.csv")
    assert table["advantage_db"].tolist() == pytest.approx([-2.4988] * 2, abs=1e-4)
    m_eff = dict(zip(table["strategy"], table["m_eff"], strict=True))
    assert m_eff == {"bft": 6, "outlier": 8}


def test_doubling_range(runner, tmp_path):
    result = runner.invoke(app, ["bounds", "--M", "2..64", "--V", "0.5", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    table = pd.read_csv(tmp_path / "bounds.csv")
    assert sorted(set(table["M"])) == [2, 4, 8, 16, 32, 64]


def test_points_over_budget_are_skipped(runner, tmp_path):
    result = runner.invoke(
        app,
        ["bounds", "--M", "4,10", "--f", "2", "--strategy", "bft", "--out", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    table = pd.read_csv(tmp_path / "bounds.csv")
    assert set(table["M"]) == {10}


def test_empty_grid_is_a_usage_error(runner, tmp_path):
    result = runner.invoke(
        app, ["bounds", "--M", "4", "--f", "3", "--strategy", "bft", "--out", str(tmp_path)]
    )
    assert result.exit_code == 2
    assert "fault budget" in result.output


@pytest.mark.parametrize(
    "args",
    [
        ["--V", "1.5"],
        ["--strategy", "majority"],
        ["--M", "eight"],
        ["--N", "0"],
    ],
)
def test_invalid_values(runner, tmp_path, args):
    result = runner.invoke(app, ["bounds", *args, "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert not (tmp_path / "bounds.csv").exists()


def test_json_format(runner, tmp_path):
    result = runner.invoke(
        app, ["bounds", "--M", "8", "--V", "1", "--format", "json", "--out", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    rows = json.loads((tmp_path / "bounds.json").read_text())
    assert {row["strategy"] for row in rows} == {"bft", "outlier"}
    assert all(row["M"] == 8 for row in rows)
