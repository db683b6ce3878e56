import io
import json

import pandas as pd
import pytest
import yaml

from quantization_core.io.manage_quantization import build_parser, main

SMALL_BS = ["--model", "black-scholes", "--sigma", "0.2", "--r", "0.15", "--n", "5", "--budget", "const:10"]


def read_csv(text):
    return pd.read_csv(io.StringIO(text), float_precision="round_trip")


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.mark.parametrize(
    "argv",
    [
        ["build"],
        ["price"],
        ["mc-price"],
        ["normal-grid", "--size", "2"],
        ["bounds"],
        ["dispatch", "--N", "250"],
        ["compare-brownian"],
        ["table", "--name", "table1"],
    ],
)
def test_parser_accepts_every_command(argv):
    assert build_parser().parse_args(argv).command == argv[0]


def test_normal_grid(capsys):
    code, out, err = run(capsys, ["normal-grid", "--size", "4"])
    assert code == 0
    frame = read_csv(out)
    assert list(frame.columns) == ["index", "x", "weight"]
    assert frame["x"].iloc[-1] == pytest.approx(1.5104, abs=1e-4)
    assert "distortion" in err


def test_normal_grid_to_file(capsys, tmp_path):
    path = tmp_path / "out" / "grid.csv"
    code, out, _ = run(capsys, ["normal-grid", "--size", "3", "--out", str(path)])
    assert code == 0
    assert out == ""
    assert len(pd.read_csv(path)) == 3


def test_build_then_price_matches_fused_run(capsys, tmp_path):
    tree_path = tmp_path / "tree.json"
    code, _, _ = run(capsys, ["build", *SMALL_BS, "--out", str(tree_path), "--csv", str(tmp_path / "tree.csv")])
    assert code == 0
    assert json.loads(tree_path.read_text())["n"] == 5
    assert (tmp_path / "tree.csv").exists()

    code, out, _ = run(capsys, ["price", "--tree", str(tree_path), "--strike", "100", "--r", "0.15"])
    assert code == 0
    stored = read_csv(out)

    code, out, _ = run(capsys, ["price", *SMALL_BS, "--strike", "100"])
    assert code == 0
    fused = read_csv(out)

    assert list(stored.columns) == ["payoff", "strike", "r", "price"]
    assert abs(stored["price"].iloc[0] - fused["price"].iloc[0]) <= 1e-15


def test_price_reports_error_bound(capsys):
    code, out, _ = run(capsys, ["price", *SMALL_BS, "--payoff", "call", "--strike", "95", "--bound-lip", "1"])
    assert code == 0
    frame = read_csv(out)
    assert frame["payoff"].iloc[0] == "call"
    assert frame["error_bound"].iloc[0] > 0


def test_price_reads_rate_from_tree(capsys, tmp_path):
    tree_path = tmp_path / "tree.json"
    run(capsys, ["build", *SMALL_BS, "--out", str(tree_path)])
    code, out, _ = run(capsys, ["price", "--tree", str(tree_path)])
    assert code == 0
    assert read_csv(out)["r"].iloc[0] == 0.15


def test_price_on_brownian_tree_discounts_at_zero(capsys, tmp_path):
    tree_path = tmp_path / "tree.json"
    run(capsys, ["build", "--model", "brownian", "--x0", "0", "--n", "3", "--budget", "const:5",
                 "--out", str(tree_path)])
    code, out, _ = run(capsys, ["price", "--tree", str(tree_path), "--payoff", "put", "--strike", "1"])
    assert code == 0
    row = read_csv(out).iloc[0]
    assert row["r"] == 0.0
    terminal = json.loads(tree_path.read_text())["levels"][-1]
    undiscounted = sum(w * max(1.0 - x, 0.0) for x, w in zip(terminal["grid"], terminal["weights"]))
    assert row["price"] == pytest.approx(undiscounted, rel=1e-12)


def test_config_file_and_flag_precedence(capsys, tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text(yaml.safe_dump({"model": "brownian", "x0": 0.0, "n": 3, "budget": "const:5"}), encoding="utf-8")
    tree_path = tmp_path / "tree.json"
    code, _, _ = run(capsys, ["build", "--config", str(config), "--n", "4", "--out", str(tree_path)])
    assert code == 0
    document = json.loads(tree_path.read_text())
    assert document["n"] == 4
    assert document["model"] == {"name": "brownian"}
    assert len(document["levels"][-1]["grid"]) == 5


def test_unknown_config_key_fails(capsys, tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text("sizes: 3\n", encoding="utf-8")
    code, out, err = run(capsys, ["build", "--config", str(config)])
    assert code == 1
    assert out == ""
    assert "❌" in err


def test_unknown_flag_exits_with_usage_error(capsys):
    code, _, err = run(capsys, ["build", "--frobnicate"])
    assert code == 2
    assert "usage" in err


def test_unknown_table_exits_with_usage_error(capsys):
    code, _, _ = run(capsys, ["table", "--name", "table9"])
    assert code == 2


def test_missing_tree_file(capsys, tmp_path):
    code, _, err = run(capsys, ["price", "--tree", str(tmp_path / "absent.json")])
    assert code == 1
    assert "❌" in err


def test_invalid_budget(capsys):
    code, _, err = run(capsys, ["build", "--model", "brownian", "--n", "5", "--budget", "equal:3"])
    assert code == 1
    assert "❌" in err


def test_bounds(capsys):
    code, out, _ = run(
        capsys, ["bounds", "--model", "brownian", "--x0", "0", "--budget", "equal:250", "--n", "50", "--T", "1"]
    )
    assert code == 0
    values = dict(zip(*[read_csv(out)[column] for column in ("name", "value")]))
    assert values["kappa_p"] == pytest.approx(8.0)
    assert values["N_k"] == 5
    assert 0 < values["optimal_dispatch_bound"] <= values["bound"]


def test_dispatch_brownian(capsys):
    code, out, _ = run(capsys, ["dispatch", "--brownian", "--n", "50", "--N", "250,5000"])
    assert code == 0
    frame = read_csv(out)
    assert frame["N_50"].tolist() == [6, 127]


def test_mc_price_is_reproducible(capsys):
    argv = ["mc-price", *SMALL_BS[:8], "--paths", "5000", "--seed", "3", "--block-size", "1000"]
    code, first, _ = run(capsys, argv + ["--workers", "1"])
    assert code == 0
    code, second, _ = run(capsys, argv + ["--workers", "3"])
    assert code == 0
    assert first == second
    frame = read_csv(first)
    assert list(frame.columns) == ["price", "std_error", "ci_low", "ci_high", "paths", "seed"]
    assert frame["paths"].iloc[0] == 5000


def test_compare_brownian_command(capsys):
    code, out, _ = run(capsys, ["compare-brownian", "--n", "5", "--budgets", "50:100:50"])
    assert code == 0
    assert read_csv(out)["N"].tolist() == [50, 100]
