import json
import math
import subprocess
import sys

import pytest

from interwoven_pdc import cli, reference


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("text, value", [
    ("pi", math.pi), ("0.1pi", 0.1 * math.pi), ("pi/3", math.pi / 3),
    ("-2pi/3", -2 * math.pi / 3), ("1.5", 1.5), (" 2 * pi ", 2 * math.pi), (0.25, 0.25)])
def test_parse_angle(text, value):
    assert cli.parse_angle(text) == pytest.approx(value)


@pytest.mark.parametrize("text", ["xx", "pi3", "2pi/", ""])
def test_parse_angle_rejects(text):
    with pytest.raises(cli.ArgumentError):
        cli.parse_angle(text)


def test_config_round_trip():
    cfg = cli.RunConfig("bell", g="0.05, 0.1", phases="pi", visibility=0.7)
    back = cli.RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back == cfg
    assert cfg.grid_step == pytest.approx(0.01 * math.pi)
    assert cfg.order == 4 and cfg.phase_sum == pytest.approx(math.pi)
    assert cli.RunConfig("lp", parties=5).order == 5


@pytest.mark.parametrize("kwargs", [
    {"command": "nope"}, {"command": "bell", "parties": 1}, {"command": "bell", "g": 0.7},
    {"command": "bell", "phases": "1,2"}, {"command": "bell", "grid_step": "-pi"},
    {"command": "bell", "scenario": "x"}, {"command": "bell", "order": 0},
    {"command": "bell", "visibility": 2}, {"command": "dump-state", "pumps": "on,off"},
    {"command": "dump-state", "pumps": "on,off,maybe"}, {"command": "bell", "g": ""}])
def test_config_validation(kwargs):
    with pytest.raises(cli.ArgumentError):
        cli.RunConfig(**kwargs)


def test_unknown_config_key():
    with pytest.raises(cli.ArgumentError):
        cli.RunConfig.from_dict({"command": "bell", "colour": "red"})


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"g": [0.05], "visibility": 0.5, "grid_step": 0.5}))
    cfg = cli.resolve_config(["bell", "--config", str(path), "--visibility", "0.9"])
    assert cfg.g == [0.05]
    assert cfg.visibility == 0.9
    assert cfg.grid_step == 0.5


def test_bad_config_file(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text("[1, 2]")
    assert run(capsys, "bell", "--config", str(path))[0] == cli.EXIT_ARGS
    assert run(capsys, "bell", "--config", str(tmp_path / "missing.json"))[0] == cli.EXIT_ARGS


def test_bell_default_run(capsys):
    code, out, _ = run(capsys, "bell")
    assert code == cli.EXIT_OK
    assert "lifted_ch: max 1e-06 at 1pi (=1 |g|^6); windows [0.67pi, 1.33pi]" in out
    assert "genuine: max 3e-06 at 1pi" in out


def test_bell_low_visibility_has_no_violation(capsys, tmp_path):
    code, out, _ = run(capsys, "bell", "--visibility", "0.4", "--grid-step", "0.05pi",
                       "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    assert out.count("windows none") == 3
    data = json.loads((tmp_path / "bell.json").read_text())
    assert not any(r["violated"] for r in data["results"])
    assert (tmp_path / "bell.csv").read_text().startswith("g,phase_sum,lifted_ch,")


def test_bell_four_parties(capsys):
    code, out, _ = run(capsys, "bell", "--parties", "4", "--grid-step", "0.25pi")
    assert code == cli.EXIT_OK
    assert "doubly_lifted_ch: max 1e-08 at 1pi (=1 |g|^8)" in out


def test_bell_both_backends(capsys, tmp_path):
    code, out, _ = run(capsys, "bell", "--grid-step", "0.5pi", "--backend", "both",
                       "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    assert "lifted_ch_numeric: max 8.13206e-07 at 1pi" in out
    header = (tmp_path / "bell.csv").read_text().splitlines()[0]
    assert header.startswith("g,phase_sum,lifted_ch_symbolic,symmetrized_ch_symbolic,")


def test_violation_windows():
    assert cli.violation_windows([0, 1, 2, 3, 4], [-1, 1, 1, -1, 2]) == [[1, 2], [4, 4]]
    assert cli.violation_windows([0, 1], [0, 0]) == []


def test_repeat_runs_are_byte_identical(tmp_path, capsys):
    outs = []
    d = tmp_path / "out"
    for _ in range(2):
        code, out, _ = run(capsys, "lp", "--grid-step", "0.5pi", "--out", str(d))
        assert code == cli.EXIT_OK
        outs.append((out, {p.name: p.read_bytes() for p in sorted(d.iterdir())}))
    assert outs[0] == outs[1]
    assert set(outs[0][1]) == {"lp.csv", "lp.json"}


def test_lp_on_off_reports_certificate(capsys):
    code, out, _ = run(capsys, "lp", "--grid-step", "0.5pi")
    assert code == cli.EXIT_OK
    assert "1 infeasible" in out and "phase_sum=1pi" in out
    assert "infeasible exactly where CH > 0" in out


def test_lp_zero_coupling(capsys):
    code, out, _ = run(capsys, "lp", "--g", "0", "--grid-step", "0.5pi")
    assert code == cli.EXIT_OK
    assert "0 infeasible" in out


def test_lp_phases_only_sample(capsys):
    code, out, _ = run(capsys, "lp", "--scenario", "phases-only", "--grid-step", "0.5pi")
    assert code == cli.EXIT_OK
    assert "all feasible" in out


def test_reproduce_exit_codes(capsys, monkeypatch):
    code, out, _ = run(capsys, "reproduce")
    assert code == cli.EXIT_OK and out.strip().endswith("all pass")
    code, out, _ = run(capsys, "reproduce", "--order", "2")
    assert code == cli.EXIT_OK and "35 skipped" in out
    occ, k, terms = reference.AMPLITUDES[0]
    monkeypatch.setattr(reference, "AMPLITUDES",
                        [(occ, k, [("2", 0, 0)] + terms[1:])] + reference.AMPLITUDES[1:])
    code, out, _ = run(capsys, "reproduce")
    assert code == cli.EXIT_FAIL and "FAIL amplitude" in out
    assert run(capsys, "reproduce", "--parties", "4")[0] == cli.EXIT_ARGS


def test_reproduce_numeric_backend(capsys):
    code, out, _ = run(capsys, "reproduce", "--backend", "numeric", "--g", "0.05")
    assert code == cli.EXIT_OK
    assert "numeric: 26 pass" in out


def test_paradox_command(capsys, tmp_path):
    code, out, _ = run(capsys, "paradox", "--g", "0.05,0.1", "--out", str(tmp_path))
    assert code == cli.EXIT_OK and "paradox survives" in out
    data = json.loads((tmp_path / "paradox.json").read_text())
    assert [r["g"] for r in data["reports"]] == [0.05, 0.1]
    code, out, _ = run(capsys, "paradox", "--g", "0.3")
    assert code == cli.EXIT_OK and "outside small-g regime" in out


def test_numeric_error_exit_code(capsys):
    code, _, err = run(capsys, "paradox", "--g", "0")
    assert code == cli.EXIT_NUMERIC
    assert "UndefinedConditionalError" in err


def test_argument_error_exit_code(capsys):
    assert run(capsys, "bell", "--phases", "xx")[0] == cli.EXIT_ARGS
    assert run(capsys, "frobnicate")[0] == cli.EXIT_ARGS
    assert run(capsys, "bell", "--g", "0.9")[0] == cli.EXIT_ARGS


def test_dump_state(capsys):
    code, out, _ = run(capsys, "dump-state", "--pumps", "off,off,on", "--order", "2")
    assert code == cli.EXIT_OK
    assert json.loads(out)["order_max"] == 2
    code, out, _ = run(capsys, "dump-state", "--backend", "numeric", "--g", "0.05")
    assert code == cli.EXIT_OK
    assert "leaked_weight" in json.loads(out)
    assert run(capsys, "dump-state", "--backend", "both")[0] == cli.EXIT_ARGS


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "interwoven_pdc.cli", "paradox"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert "g=0.1: gap 9.5e-07" in res.stdout
