import json

import pytest

from rankembed import cli
from rankembed.errors import ConfigError
from rankembed.reports import emit, parse
from rankembed.suite import RunConfig, run_all

SMALL = {
    "roots": {"types": ["A2", "G2"]},
    "coxeter": {"order_types": ["A2", "B2"], "maxdist_types": ["A1xA1", "A2"]},
    "symmetric": {"exact_samples": 100, "samples": 600, "pilot_samples": 600, "path_samples": 300, "qi_ns": [2]},
    "trees": {"radius": 2, "samples": 20},
    "building": {"radius": 1, "val_bound": 1, "projection_radius": 1},
}


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="colour"):
        RunConfig.from_dict({"colour": 1})
    with pytest.raises(ConfigError, match="checks.trees.radios"):
        RunConfig.from_dict({"checks": {"trees": {"radios": 3}}})
    with pytest.raises(ConfigError, match="checks.forest"):
        RunConfig.from_dict({"checks": {"forest": {}}})
    with pytest.raises(ConfigError, match="seed"):
        RunConfig(seed=-1)
    with pytest.raises(ConfigError, match="threads"):
        RunConfig(threads=0)


def test_small_suite_is_deterministic_across_threads():
    a = run_all(RunConfig.from_dict({"seed": 11, "threads": 1, "checks": SMALL}))
    b = run_all(RunConfig.from_dict({"seed": 11, "threads": 8, "checks": SMALL}))
    assert len(a) >= 10 and all(r.passed for r in a)
    assert emit(a) == emit(b)
    assert emit(a, "csv") == emit(b, "csv")
    assert [r.check_name for r in a][:3] == ["roots.selection", "coxeter.weyl_orders", "coxeter.maxdist"]


def test_radius_zero_building_passes_trivially():
    checks = dict(SMALL, building={"radius": 0, "val_bound": 0, "projection_radius": 0})
    reps = run_all(RunConfig.from_dict({"checks": checks}))
    cert = next(r for r in reps if r.check_name == "building.certify")
    assert cert.passed and cert.constants["vertices"] == 1


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_roots_cli(capsys):
    code, out = run(capsys, "roots", "select", "--type", "A", "--rank", "3", "--json")
    assert code == 0
    assert json.loads(out) == {"type": "A3", "selected": [{"simple_coords": [1, 1, 1]}, {"simple_coords": [1, 1, 0]},
                                                          {"simple_coords": [0, 1, 1]}], "pairwise_sum_free": True}
    code, out = run(capsys, "roots", "list", "--type", "G", "--rank", "2", "--json")
    assert code == 0 and json.loads(out)["count"] == 6


def test_coxeter_cli(capsys):
    code, out = run(capsys, "coxeter", "maxdist", "--type", "A", "--rank", "2", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["sin2_theta"] == ["3/4", "3/4"] and doc["weyl_order"] == 6


def test_symmetric_cli(tmp_path, capsys):
    out, raw = tmp_path / "r.json", tmp_path / "s.csv"
    code, _ = run(capsys, "symmetric", "verify", "--n", "2", "--samples", "600", "--seed", "4",
                  "--dmin", "1", "--dmax", "16", "--out", str(out), "--csv", str(raw))
    doc = json.loads(out.read_text())
    assert code == 0
    assert list(doc)[:3] == ["n", "seed", "pass"]
    assert [b["range"] for b in doc["bins"]] == [[1, 2], [2, 4], [4, 8], [8, 16]]
    assert doc["witness_max"]["ratio"] == doc["lambda_hat"]
    assert len(raw.read_text().splitlines()) == 601


def test_trees_cli(capsys):
    code, out = run(capsys, "trees", "verify", "--q", "2", "--n", "2", "--radius", "2", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and len(doc["reports"]) == 4


def test_building_cli(tmp_path, capsys):
    ball, rep = tmp_path / "ball.json", tmp_path / "rep.json"
    assert cli.main(["building", "build", "--p", "2", "--radius", "1", "--out", str(ball)]) == 0
    assert len(json.loads(ball.read_text())["vertices"]) == 15
    assert cli.main(["building", "verify", "--p", "2", "--radius", "1", "--valbound", "1", "--out", str(rep)]) == 0
    (r,) = parse(rep.read_bytes())
    assert r.check_name == "building.certify" and r.passed


def test_all_cli_with_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 2, "checks": SMALL}))
    out = tmp_path / "all.json"
    assert cli.main(["all", "--config", str(cfg), "--threads", "2", "--out", str(out)]) == 0
    assert all(r.passed for r in parse(out.read_bytes()))


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["roots", "list", "--type", "Q", "--rank", "2"]) == 2
    assert cli.main(["nonsense"]) == 2
    assert cli.main(["building", "build", "--radius", "9"]) == 2
    assert cli.main(["symmetric", "verify", "--threads", "0"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"checks": {"trees": {"radios": 1}}}')
    assert cli.main(["all", "--config", str(bad)]) == 2
    assert "radios" in capsys.readouterr().err
    # an impossible threshold is a check failure, not a usage error
    assert cli.main(["symmetric", "verify", "--n", "2", "--samples", "300", "--min-ratio-floor", "5"]) == 1
