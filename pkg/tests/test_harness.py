import json

import pytest

from weilgeom import ConfigError, parse_config, run_suites
from weilgeom.cli import main
from weilgeom.harness import CHECKS, SUITES, parse_algebra_arg, parse_geometry_arg

TORSIONFUL = {"preset": "euclid", "christoffel": [[["0", "1"], ["0", "0"]], [["0", "0"], ["0", "0"]]]}


def test_minimal_config_defaults(monkeypatch):
    monkeypatch.delenv("WEILGEOM_SEED", raising=False)
    cfg = parse_config({"algebra": {"kind": "dual"}, "geometry": {"preset": "euclid"}})
    assert cfg.suites == SUITES
    assert (cfg.samples, cfg.tol, cfg.seed, cfg.report) == (100, 1e-9, 42, "text")


def test_config_round_trip(tmp_path):
    cfg = parse_config({"algebra": {"kind": "jet", "vars": 1, "order": 2}, "geometry": {"preset": "poincare"},
                        "suites": ["metric", "lift"], "samples": 7, "seed": 3, "expect_fail": ["metric.lift"]})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert parse_config(str(path)) == cfg
    assert parse_config(json.dumps(cfg.to_dict())) == cfg
    assert cfg.suites == ("lift", "metric")


@pytest.mark.parametrize("data,field", [
    ({"algebra": {"kind": "dual"}, "geometry": {"preset": "torus"}}, "geometry"),
    ({"algebra": {"kind": "jet"}, "geometry": {"preset": "euclid"}}, "algebra"),
    ({"algebra": {"kind": "dual"}, "geometry": {"preset": "euclid"}, "samples": 0}, "samples"),
    ({"algebra": {"kind": "dual"}, "geometry": {"preset": "euclid"}, "tol": -1}, "tol"),
    ({"algebra": {"kind": "dual"}, "geometry": {"preset": "euclid"}, "suites": ["nope"]}, "suites"),
    ({"algebra": {"kind": "dual"}, "geometry": {"preset": "euclid"}, "report": "xml"}, "report"),
    ({"algebra": {"kind": "dual"}, "geometry": {"preset": "euclid"}, "expect_fail": ["x.y"]}, "expect_fail"),
    ({"algebra": {"kind": "dual"}, "geometry": {"preset": "euclid"}, "colour": 1}, "colour"),
    ({"algebra": {"kind": "dual"}}, "geometry"),
])
def test_config_errors_name_the_field(data, field):
    with pytest.raises(ConfigError, match=field):
        parse_config(data)


def test_config_json_diagnostics(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"algebra": {"kind": "dual"},\n "geometry": }')
    with pytest.raises(ConfigError, match="line 2"):
        parse_config(str(path))
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(str(tmp_path / "missing.json"))


def test_singular_custom_metric_is_config_error():
    with pytest.raises(ConfigError):
        parse_config({"algebra": {"kind": "dual"},
                      "geometry": {"custom": {"dim": 2, "metric": [["0", "0"], ["0", "1"]]}}})


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("WEILGEOM_SEED", "7")
    base = {"algebra": {"kind": "dual"}, "geometry": {"preset": "euclid"}}
    assert parse_config(base).seed == 7
    assert parse_config(dict(base, seed=9)).seed == 9
    monkeypatch.setenv("WEILGEOM_SEED", "abc")
    with pytest.raises(ConfigError):
        parse_config(base)


def test_shorthand_parsing():
    assert parse_algebra_arg("jet(1,2)") == {"kind": "jet", "vars": 1, "order": 2}
    assert parse_algebra_arg("dual*dual") == {"kind": "tensor", "factors": [{"kind": "dual"}, {"kind": "dual"}]}
    assert parse_algebra_arg('{"kind": "dual"}') == {"kind": "dual"}
    assert parse_geometry_arg("euclid(3)") == {"preset": "euclid", "dim": 3}
    with pytest.raises(ConfigError):
        parse_algebra_arg("jet(1)")


def test_check_names_unique_and_anchored():
    names = [c.name for c in CHECKS]
    assert len(names) == len(set(names))
    assert all(c.anchor and c.suite in SUITES and c.name.startswith(c.suite + ".") for c in CHECKS)


def test_full_pipeline_jet_poincare():
    cfg = parse_config({"algebra": {"kind": "jet", "vars": 1, "order": 2}, "geometry": {"preset": "poincare"},
                        "seed": 42})
    rep = run_suites(cfg)
    assert rep.ok and rep.exit_code == 0
    assert len(rep.checks) == len(CHECKS)


def test_torsionful_expected_fail():
    cfg = parse_config({"algebra": {"kind": "dual"}, "geometry": TORSIONFUL, "suites": ["torsion"],
                        "expect_fail": ["torsion.free_preserved", "torsion.base_free"], "seed": 42})
    rep = run_suites(cfg)
    chk = rep["torsion.free_preserved"]
    assert not chk.passed and chk.max_dev > 0 and chk.expect == "fail"
    assert rep["torsion.lift"].passed and rep["torsion.control_lift"].passed
    assert rep.exit_code == 0
    cfg = parse_config(dict(cfg.to_dict(), expect_fail=[]))
    assert run_suites(cfg).exit_code == 1


def test_algebra_suite_single_sample_exact():
    cfg = parse_config({"algebra": {"kind": "jet", "vars": 1, "order": 2}, "geometry": {"preset": "euclid"},
                        "suites": ["algebra"], "samples": 1})
    rep = run_suites(cfg)
    for name in ("algebra.associative", "algebra.commutative", "algebra.augmentation"):
        assert rep[name].passed and rep[name].max_dev == 0


def test_report_schema():
    cfg = parse_config({"algebra": {"kind": "dual"}, "geometry": {"preset": "euclid"}, "suites": ["algebra"],
                        "samples": 5})
    rep = run_suites(cfg)
    data = json.loads(rep.to_json())
    assert set(data) == {"env", "checks"}
    assert data["env"]["seed"] == 42
    for c in data["checks"]:
        assert {"name", "anchor", "max_dev", "tol", "pass"} <= set(c)
    text = rep.to_text()
    assert "algebra.associative" in text and text.splitlines()[-1].endswith("checks as expected")


def test_cli_exit_codes(capsys):
    assert main(["check", "--algebra", "dual", "--geometry", "euclid", "--suite", "algebra",
                 "--samples", "5"]) == 0
    assert main(["check", "--algebra", "dual", "--geometry", json.dumps(TORSIONFUL), "--suite", "torsion",
                 "--samples", "5"]) == 1
    assert main(["check", "--algebra", "dual", "--geometry", "torus"]) == 2
    assert "config error" in capsys.readouterr().err
    assert main(["check", "--algebra", "dual", "--geometry", json.dumps(TORSIONFUL), "--suite", "torsion",
                 "--samples", "5", "--expect-fail", "torsion.free_preserved",
                 "--expect-fail", "torsion.base_free"]) == 0


def test_cli_config_file_and_overrides(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"algebra": {"kind": "dual"}, "geometry": {"preset": "sphere"},
                                "suites": ["lift"], "samples": 5}))
    assert main(["check", "--config", str(path), "--report", "json", "--seed", "11",
                 "--algebra", "hyperdual(2)"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["env"]["seed"] == 11 and data["env"]["algebra_dim"] == 4
    assert all(c["name"].startswith("lift.") for c in data["checks"])


def test_json_deterministic(capsys):
    args = ["check", "--algebra", "jet(2,2)", "--geometry", "sphere", "--suite", "metric", "--samples", "20",
            "--seed", "42", "--report", "json"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
