import math
from pathlib import Path

import pytest

from logdrift import cli
from logdrift.cli import (
    ConfigError,
    list_scenarios,
    parse_config_file,
    parse_u0,
    resolve_config,
    write_csv,
)


class _Args:
    scenario = None
    config = None
    seed = None
    output_dir = None
    threads = None

    def __init__(self, **kv):
        for k, v in kv.items():
            setattr(self, k, v)


def test_listing_is_sorted_and_annotated(capsys):
    assert cli.main(["--list"]) == 0
    out = capsys.readouterr().out
    names = [line.split(":")[0] for line in out.splitlines()
             if line and not line.startswith(" ")]
    assert len(names) == 8
    assert names == sorted(names)
    assert out.count("claim:") == 8
    assert list_scenarios() in out


def test_unknown_config_key_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("grid.n_mode=64\n")
    assert cli.main(["--scenario", "isometry", "--config", str(bad),
                     "--output-dir", str(tmp_path / "out")]) == 2
    assert "unknown config key" in capsys.readouterr().err


def test_unknown_scenario_exits_2(tmp_path, capsys):
    assert cli.main(["--scenario", "bogus",
                     "--output-dir", str(tmp_path)]) == 2
    assert "unknown scenario" in capsys.readouterr().err


def test_config_file_parsing(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\n\ngrid.n_modes = 32\ngrid.T=2.5\nu0=mode:1,3\n")
    parsed = parse_config_file(str(cfg))
    assert parsed == {"grid.n_modes": 32, "grid.T": 2.5, "u0": "mode:1,3"}
    cfg.write_text("grid.n_modes=abc\n")
    with pytest.raises(ConfigError):
        parse_config_file(str(cfg))
    cfg.write_text("just a line\n")
    with pytest.raises(ConfigError):
        parse_config_file(str(cfg))


def test_u0_grammar():
    assert parse_u0("zero", 8).l2_norm() == 0.0
    m = parse_u0("mode:2,1.5", 8)
    assert m.coeffs[1] == 1.5 and m.l2_norm() == 1.5
    r = parse_u0("random:4,7", 8)
    assert r.l2_norm() == pytest.approx(4.0)
    for bad in ("gauss", "mode:1", "mode:a,b", "random:1"):
        with pytest.raises(ConfigError):
            parse_u0(bad, 8)


def test_seed_precedence(tmp_path):
    cfgfile = tmp_path / "s.cfg"
    cfgfile.write_text("master_seed=11\n")
    # default
    cfg = resolve_config(_Args(scenario="isometry"), {})
    assert cfg["master_seed"] == 0
    # env beats default
    cfg = resolve_config(_Args(scenario="isometry"), {"LOGDRIFT_SEED": "777"})
    assert cfg["master_seed"] == 777
    # file beats env
    cfg = resolve_config(_Args(scenario="isometry", config=str(cfgfile)),
                         {"LOGDRIFT_SEED": "777"})
    assert cfg["master_seed"] == 11
    # flag beats file
    cfg = resolve_config(_Args(scenario="isometry", config=str(cfgfile),
                               seed=42), {"LOGDRIFT_SEED": "777"})
    assert cfg["master_seed"] == 42


def test_scenario_from_file_and_flag_priority(tmp_path):
    cfgfile = tmp_path / "s.cfg"
    cfgfile.write_text("scenario=factorization\n")
    cfg = resolve_config(_Args(config=str(cfgfile)), {})
    assert cfg["scenario"] == "factorization"
    cfg = resolve_config(_Args(scenario="isometry", config=str(cfgfile)), {})
    assert cfg["scenario"] == "isometry"


def test_invalid_values_rejected(tmp_path):
    with pytest.raises(ConfigError):
        resolve_config(_Args(scenario="isometry", threads=0), {})
    bad = tmp_path / "b.cfg"
    bad.write_text("u0=gauss:1\n")
    with pytest.raises(ConfigError):
        resolve_config(_Args(scenario="isometry", config=str(bad)), {})
    bad.write_text("drift.family=cubic\n")
    with pytest.raises(ConfigError):
        resolve_config(_Args(scenario="isometry", config=str(bad)), {})
    with pytest.raises(ConfigError):
        resolve_config(_Args(scenario="isometry"), {"LOGDRIFT_SEED": "x"})


def test_csv_format(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, ["a", "b", "c"], [(1, 1.0 / 3.0, True),
                                      (2, float("nan"), False)])
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "a,b,c"
    assert lines[1] == "1,0.33333333333333331,true"
    assert lines[2] == "2,nan,false"
    with pytest.raises(ValueError):
        write_csv(path, ["a"], [("x,y",)])


def test_isometry_run_end_to_end(tmp_path, capsys):
    out = tmp_path / "iso"
    code = cli.main(["--scenario", "isometry", "--output-dir", str(out)])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "scenario=isometry" in stdout
    assert stdout.strip().endswith("isometry: PASS")
    assert (out / "isometry.csv").exists()
    assert (out / "summary.txt").read_text().strip().endswith("status=PASS")
    resolved = (out / "resolved-config.txt").read_text()
    assert "master_seed=0" in resolved and "grid.n_modes=16" in resolved


def test_env_seed_used_by_main(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LOGDRIFT_SEED", "90210")
    out = tmp_path / "iso"
    assert cli.main(["--scenario", "isometry",
                     "--output-dir", str(out)]) == 0
    assert "master_seed=90210" in (out / "resolved-config.txt").read_text()


def test_contract_failure_exits_1_and_names_assertion(tmp_path, capsys):
    # a critical drift from moderate data never reaches the threshold, so
    # the blow-up scenario's contract must fail honestly
    cfgfile = tmp_path / "c.cfg"
    cfgfile.write_text("drift.family=log_linear\nu0=mode:1,2\n"
                       "ensemble=40\ngrid.n_steps=256\n")
    out = tmp_path / "run"
    code = cli.main(["--scenario", "blowup-phase", "--config", str(cfgfile),
                     "--output-dir", str(out)])
    assert code == 1
    err = capsys.readouterr().err
    assert "blow-up phase" in err
    assert "FAIL blow-up phase" in (out / "summary.txt").read_text()


def test_reruns_and_thread_counts_are_byte_identical(tmp_path):
    outs = []
    for name, threads in (("a", None), ("b", None), ("c", "3")):
        out = tmp_path / name
        argv = ["--scenario", "factorization", "--output-dir", str(out)]
        if threads:
            argv += ["--threads", threads]
        assert cli.main(argv) == 0
        outs.append(out)
    ref = (outs[0] / "factorization.csv").read_bytes()
    for out in outs[1:]:
        assert (out / "factorization.csv").read_bytes() == ref
    ref_sum = (outs[0] / "summary.txt").read_bytes()
    assert (outs[2] / "summary.txt").read_bytes() == ref_sum
