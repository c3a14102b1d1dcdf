import json

import pytest

from gwlimits.cli import main


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path), "--jobs", "1"])


def read(tmp_path, name):
    return (tmp_path / name).read_text()


def test_sample_tree_point_mass(tmp_path):
    assert run(tmp_path, "sample-tree", "--offspring", "1", "--seed", "1", "-a", "3") == 0
    assert read(tmp_path, "contour.csv") == "time,value\n0.0,0.0\n"
    assert read(tmp_path, "contour.svg").startswith("<svg")


def test_sample_tree_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(out, "sample-tree", "--seed", "7", "-a", "2") == 0
    for name in ("tree.json", "contour.csv", "contour.svg"):
        assert read(a, name) == read(b, name)


def test_sample_tree_forest(tmp_path):
    assert run(tmp_path, "sample-tree", "--seed", "7", "-a", "2", "--forest", "10") == 0
    assert len(json.loads(read(tmp_path, "tree.json"))["trees"]) == 10


def test_seed_is_mandatory_for_random_runs(tmp_path):
    assert run(tmp_path, "sample-tree") == 2


def test_verify_girsanov_exact(tmp_path):
    assert run(tmp_path, "verify", "girsanov-exact", "-a", "3") == 0
    rep = json.loads(read(tmp_path, "girsanov-exact.json"))
    assert rep["verdict"] == "pass"
    assert read(tmp_path, "girsanov-exact.csv").startswith("experiment,statistic")


def test_verify_martingale_tiny_cap(tmp_path):
    assert run(tmp_path, "verify", "martingale", "--cap", "16") == 3


def test_malformed_config(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert run(tmp_path, "verify", "martingale", "--config", str(cfg)) == 2
    cfg.write_text(json.dumps({"unknown": 1}))
    assert run(tmp_path, "verify", "martingale", "--config", str(cfg)) == 2


def test_bad_offspring_is_usage_error(tmp_path):
    assert run(tmp_path, "verify", "girsanov-exact", "--offspring", "0.5,0.6") == 2


def test_unknown_subcommand_exits_2(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["verify", "nope"])
    assert err.value.code == 2


def test_config_with_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"offspring": [0.25, 0, 0.75], "n_max": 3, "cap": 8}))
    assert run(tmp_path, "verify", "martingale", "--config", str(cfg)) == 0
    assert run(tmp_path, "verify", "martingale", "--config", str(cfg), "--n-max", "12") == 3


def test_converge_A1_rows(tmp_path):
    run(tmp_path, "converge", "A1", "--drift", "0")
    lines = read(tmp_path, "A1.csv").splitlines()
    assert lines[0] == "n,sup_deviation" and len(lines) == 4
    assert read(tmp_path, "A1.svg").startswith("<svg")


def test_converge_survival_mass(tmp_path):
    assert run(tmp_path, "converge", "survival-mass", "--drift", "1") == 0
    header = read(tmp_path, "survival-mass.csv").splitlines()[0]
    assert header == "n,value,target,deviation"


def test_converge_main1_and_A3(tmp_path):
    assert run(tmp_path, "converge", "main1", "--drift", "1") == 0
    assert run(tmp_path, "converge", "A3", "--drift", "1") == 0


def test_converge_extinction_small(tmp_path):
    code = run(tmp_path, "converge", "extinction", "--drift", "1", "--seed", "3", "--reps", "500",
               "--n-list", "50,100", "--tol", "0.2")
    assert code in (0, 1)
    svg = read(tmp_path, "extinction.svg")
    assert "exp(-x v(t))" in svg
    assert len(read(tmp_path, "extinction.csv").splitlines()) == 3


def test_converge_laplace_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        run(out, "converge", "laplace", "--drift", "0", "--seed", "5", "--reps", "1000", "-n", "100")
    assert read(a, "laplace.json") == read(b, "laplace.json")
    assert read(a, "laplace.csv") == read(b, "laplace.csv")


def test_mechanism_info(tmp_path, capsys):
    assert run(tmp_path, "mechanism-info", "--mechanism", '{"alpha": -1, "beta": 0.5}') == 0
    info = json.loads(capsys.readouterr().out)
    assert info["gamma"] == pytest.approx(2.0) and info["qstar"] == pytest.approx(1.0)
    assert info["grey"]["holds"] is True
