import json

import pytest

from tpsgeom import cli
from tpsgeom.errors import ConfigError
from tpsgeom.report import (
    SCHEMA_VERSION,
    Report,
    SuiteConfig,
    default_workers,
    make_check,
    parse_report,
    run_suite,
    serialize_report,
)

SMALL = dict(n=(1,), points=5, seed=7, workers=1)


def _strip_duration(data: bytes) -> dict:
    d = json.loads(data)
    d.pop("duration_s")
    return d


@pytest.mark.parametrize(
    "kwargs",
    [dict(suite="topology"), dict(n=(0,)), dict(points=0), dict(tol_fd=0.0), dict(format="xml"), dict(models=("ising",)), dict(workers=0)],
)
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        SuiteConfig(**kwargs)


def test_check_pass_flag_follows_tolerance():
    assert make_check("a", "x", 1, 1, 1e-9, 1e-8).passed
    assert not make_check("a", "x", 1, 1, 1e-7, 1e-8).passed
    assert not make_check("a", "x", 1, 1, float("nan"), 1.0).passed


def test_empty_report_serializes():
    r = Report({}, [])
    d = json.loads(serialize_report(r))
    assert d["schema_version"] == SCHEMA_VERSION
    assert d["summary"] == {"total": 0, "passed": 0, "failed": 0}
    assert b"0/0 passed" in serialize_report(r, "text")


def test_geometry_suite_passes_and_round_trips():
    r = run_suite(SuiteConfig(suite="geometry", **SMALL))
    assert r.all_passed
    assert r.summary["total"] == len(r.checks) > 0
    ids = [c.check_id for c in r.checks]
    assert len(ids) == len(set(ids))
    assert all(c.anchor for c in r.checks)
    back = parse_report(serialize_report(r))
    assert back == r


def test_report_is_deterministic():
    cfg = SuiteConfig(suite="heisenberg", **SMALL)
    a = _strip_duration(serialize_report(run_suite(cfg)))
    b = _strip_duration(serialize_report(run_suite(cfg)))
    assert a == b


def test_worker_pool_gives_same_checks():
    base = dict(SMALL, n=(1, 2))
    serial = run_suite(SuiteConfig(suite="geometry", **base))
    pooled = run_suite(SuiteConfig(suite="geometry", **dict(base, workers=2)))
    assert [c.__dict__ for c in serial.checks] == [c.__dict__ for c in pooled.checks]


def test_unreachable_tolerance_records_failures():
    r = run_suite(SuiteConfig(suite="connections", tol_closed=1e-20, **SMALL))
    assert not r.all_passed
    assert r.summary["failed"] > 0


def test_text_report_lists_constants():
    r = run_suite(SuiteConfig(suite="connections", **SMALL))
    text = serialize_report(r, "text").decode()
    assert "lambda=-4" in text and "PASS" in text


def test_workers_env(monkeypatch):
    monkeypatch.setenv("TPSGEOM_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("TPSGEOM_WORKERS", "many")
    with pytest.raises(ConfigError):
        default_workers()


def test_cli_exit_ok(tmp_path):
    out = tmp_path / "r.json"
    code = cli.main(["verify", "--suite", "geometry", "--n", "1", "--points", "4", "--workers", "1", "--out", str(out)])
    assert code == cli.EXIT_OK
    assert json.loads(out.read_text())["summary"]["failed"] == 0


def test_cli_exit_failed(tmp_path):
    code = cli.main(
        ["verify", "--suite", "connections", "--n", "1", "--points", "3", "--tol-closed", "1e-20", "--workers", "1", "--out", str(tmp_path / "r.json")]
    )
    assert code == cli.EXIT_FAILED


def test_cli_usage_errors(tmp_path, capsys):
    assert cli.main(["verify", "--n", "0"]) == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--suite", "nope"])
    assert exc.value.code == cli.EXIT_USAGE
    bad = tmp_path / "bad.yaml"
    bad.write_text("colour: blue\n")
    assert cli.main(["verify", "--config", str(bad)]) == cli.EXIT_USAGE


def test_cli_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("suite: heisenberg\nn: [1]\npoints: 3\nseed: 5\nformat: json\nworkers: 1\n")
    assert cli.main(["verify", "--config", str(cfg), "--seed", "9"]) == cli.EXIT_OK
    echoed = json.loads(capsys.readouterr().out)["config"]
    assert echoed["suite"] == "heisenberg" and echoed["seed"] == 9 and echoed["points"] == 3


def test_cli_statmech_single_model(capsys):
    code = cli.main(["verify", "--suite", "statmech", "--model", "two_level", "--format", "text", "--workers", "1"])
    assert code == cli.EXIT_OK
    assert "statmech.kl_remainder_order.two_level" in capsys.readouterr().out
