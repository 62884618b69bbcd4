import json

import jsonschema
import pytest

from moranweights import __version__


def test_version_flag(run_cli):
    code, out, _ = run_cli("--version")
    assert code == 0
    assert __version__ in out


def test_missing_subcommand_exits_one(run_cli):
    code, _, _ = run_cli()
    assert code == 1


def test_missing_required_argument_exits_one(run_cli):
    code, _, err = run_cli("simulate")
    assert code == 1
    assert "--pop-size" in err


def test_bad_configuration_exits_one(run_cli):
    code, _, err = run_cli("exact", "--pop-size", "3", "--order", "4")
    assert code == 1
    assert "error" in err


def test_bad_choice_exits_one(run_cli):
    code, _, _ = run_cli("simulate", "--pop-size", "10", "--variant", "magic")
    assert code == 1


def test_exact_output_schema(run_cli, load_schema):
    code, out, _ = run_cli("exact", "--pop-size", "10", "--order", "2", "--rational")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("exact"))
    assert doc["nu"] == {"{2}": "4/13", "{1,1}": "9/13"}
    assert doc["moments"]["{2}"] == "40/13"
    assert doc["K"] == {"{2}": "4/1", "{1,1}": "1/1"}
    assert doc["matrix"][0][0] == "19/20"


def test_exact_float_matrix_and_tree_solver(run_cli, load_schema):
    code, out, _ = run_cli("exact", "--pop-size", "8", "--order", "3", "--tree-theorem")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("exact"))
    assert doc["meta"]["method"] == "tree-theorem"
    assert isinstance(doc["matrix"][0][0], float)


def test_limit_output_schema(run_cli, load_schema):
    code, out, _ = run_cli(
        "limit",
        "--parents",
        "3",
        "--moments",
        "3",
        "--cdf",
        "0",
        "--quantile",
        "0.9",
        "--samples",
        "4000",
        "--seed",
        "11",
    )
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("limit"))
    assert doc["atom_mass"] == "1/3"
    assert doc["moments"] == {"1": "1/1", "2": "3/1", "3": "27/2"}
    assert doc["cdf"]["0.0"] == pytest.approx(1 / 3)
    assert doc["samples"]["ks_distance"] < 0.05


def test_simulate_writes_outputs(run_cli, load_schema, tmp_path):
    code, out, _ = run_cli(
        "simulate",
        "--pop-size",
        "10",
        "--replicates",
        "150",
        "--track",
        "2",
        "--seed",
        "4",
        "--checkpoints",
        "10",
        "100",
        "--out-dir",
        str(tmp_path),
    )
    assert code == 0
    assert "converged 150/150" in out
    doc = json.loads((tmp_path / "summary.json").read_text())
    jsonschema.validate(doc, load_schema("summary"))
    samples = (tmp_path / "samples.csv").read_text().splitlines()
    assert samples[2] == "replicate,seed,j,M_inf,extinct,converged,steps"
    assert len(samples) == 3 + 150 * 2
    trajectory = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert trajectory[2] == "n,j,M_n,l_n,L_n"


def test_simulate_trajectory_requires_checkpoints(run_cli, tmp_path):
    code, _, err = run_cli(
        "simulate",
        "--pop-size",
        "10",
        "--replicates",
        "5",
        "--trajectory",
        "0",
        "--out-dir",
        str(tmp_path),
    )
    assert code == 1
    assert "--checkpoints" in err


def test_simulate_strict_gate_exits_two(run_cli, tmp_path):
    code, _, err = run_cli(
        "simulate",
        "--pop-size",
        "10",
        "--replicates",
        "20",
        "--max-steps",
        "3",
        "--seed",
        "4",
        "--strict",
        "--out-dir",
        str(tmp_path),
    )
    assert code == 2
    assert "converged" in err


def test_simulate_out_dir_env_default(run_cli, tmp_path, monkeypatch):
    monkeypatch.setenv("MORANWEIGHTS_OUT", str(tmp_path))
    # parser reads the env var at construction time
    code, _, _ = run_cli(
        "simulate", "--pop-size", "10", "--replicates", "10", "--seed", "1"
    )
    assert code == 0
    assert (tmp_path / "samples.csv").exists()


def test_verify_single_suite(run_cli, load_schema, tmp_path):
    out_path = tmp_path / "verify.json"
    code, out, _ = run_cli(
        "verify", "--suite", "recursion", "--suite", "tree", "--out", str(out_path)
    )
    assert code == 0
    assert "[PASS] suite recursion" in out
    assert "[PASS] suite tree" in out
    doc = json.loads(out_path.read_text())
    jsonschema.validate(doc, load_schema("verify"))
    assert doc["passed"] is True


def test_verify_rejects_unknown_suite(run_cli):
    code, _, _ = run_cli("verify", "--suite", "nonsense")
    assert code == 1
