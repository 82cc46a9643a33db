import json
import math
import subprocess
import sys

import pytest

from starshare import cli, io


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def usage_code(argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    return exc.value.code


def test_threshold(capsys):
    code, out, _ = run(["threshold", "--k", "3"], capsys)
    t = io.from_csv(out)
    assert code == 0 and t.column("C")[0] == pytest.approx(0.9682458, abs=1e-7)


def test_threshold_inverse(capsys):
    _, out, _ = run(["threshold", "--concurrence", "0.9", "1.0"], capsys)
    assert io.from_csv(out).column("max_supported_rounds") == [2, "unbounded"]


def test_json_format(capsys):
    _, out, _ = run(["max-rounds", "--concurrence", "0.87", "0.97", "0.99", "--format", "json"], capsys)
    doc = json.loads(out)
    assert doc["data"]["max_rounds"] == [2, 3, 3]
    assert doc["metadata"]["config"]["epsilon"] == 1e-10


def test_sequence_angles_in_pi_notation(capsys):
    _, out, _ = run(["sequence", "--theta", "pi/4", "--delta", "0.2", "--epsilon", "0",
                     "--alpha1", "0.15", "--k", "2"], capsys)
    t = io.from_csv(out)
    assert t.column("alpha")[1] == pytest.approx(0.94063, abs=5e-5)
    assert t.metadata["feasible_through"] == 2


def test_svalue_with_oracle(capsys):
    _, out, _ = run(["svalue", "--n", "3", "--m", "2", "--j", "2", "--theta", "0.6", "--oracle"], capsys)
    t = io.from_csv(out)
    s, so, st = t.rows[0][t.columns.index("S")], t.column("S_oracle")[0], t.column("S_full_tensor")[0]
    assert abs(s - so) < 1e-9 and abs(so - st) < 1e-11


def test_sweep_csv_layout(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(["sweep", "--axis1", "theta:0.3:0.785:4", "--axis2", "delta:0:pi/4:3",
                      "--cap", "3", "--out", str(out)], capsys)
    t = io.read_table(out)
    assert code == 0 and len(t.rows) == 12
    assert t.columns[:6] == ("theta", "delta", "max_rounds", "S_1", "S_2", "S_3")


def test_sweep_reproducible_from_metadata(tmp_path, capsys):
    a, b, cfg = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "cfg.json"
    run(["sweep", "--axis1", "p:0:0.1:5", "--axis2", "none", "--noise", "depolarizing",
         "--theta", "0.7", "--out", str(a)], capsys)
    cfg.write_text(json.dumps(io.read_table(a).metadata["config"]))
    run(["sweep", "--config", str(cfg), "--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"k": [2], "tolerance": 1e-9}))
    _, out, _ = run(["threshold", "--config", str(cfg), "--k", "3"], capsys)
    t = io.from_csv(out)
    assert t.column("k") == [3] and t.metadata["config"]["tolerance"] == 1e-9


def test_both_conventions(tmp_path, capsys):
    out = tmp_path / "noise_grid.svg"
    code, _, _ = run(["sweep", "--axis1", "theta:0.05:0.39:4", "--axis2", "p:0:0.1:3", "--noise", "depolarizing",
                      "--format", "svg", "--both-conventions", "--out", str(out)], capsys)
    assert code == 0
    assert (tmp_path / "noise_grid.pi2.svg").exists() and (tmp_path / "noise_grid.pi4.svg").exists()


@pytest.mark.parametrize("argv", [
    ["sweep", "--format", "svg"],
    ["threshold", "--format", "svg", "--out", "x.svg"],
    ["bogus"],
    ["threshold", "--nope"],
    ["svalue", "--theta", "half"],
])
def test_usage_errors(argv):
    assert usage_code(argv) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"bogus": 1}')
    assert usage_code(["threshold", "--config", str(cfg)]) == 2


def test_invalid_values_exit_two(capsys):
    code, _, err = run(["max-rounds", "--concurrence", "1.5"], capsys)
    assert code == 2 and "error" in err


def test_unwritable_output_exits_one(tmp_path, capsys):
    code, _, err = run(["threshold", "--out", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == 1 and err


def test_verify_command(capsys):
    code, out, _ = run(["verify", "--samples", "5", "--seed", "1"], capsys)
    assert code == 0 and io.from_csv(out).metadata["passed"] is True


def test_compare_command(capsys):
    _, out, _ = run(["compare"], capsys)
    t = io.from_csv(out)
    assert all(t.column("ppm_violates")) and len(t.rows) == 5
    assert t.metadata["config"]["omega"] == pytest.approx(math.pi / 4 * 1e-7, rel=1e-15)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "starshare", "threshold", "--k", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "0.8660254037844" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "starshare", "sweep", "--format", "svg"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
