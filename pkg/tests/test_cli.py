import json
import subprocess
import sys

import pytest

from cpgates import catalog, formats
from cpgates.cli import main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_catalog_list_and_show(capsys, tmp_path):
    code, out, _ = run(["catalog", "list"], capsys)
    assert code == 0 and "X5a" in out and "H15" in out
    code, out, _ = run(["catalog", "list", "--target", "rx90"], capsys)
    assert "X5a" not in out and "H3" in out
    export = tmp_path / "x5a.json"
    code, out, _ = run(["catalog", "show", "X5a", "--export", str(export)], capsys)
    assert code == 0
    assert "(0.666667, -0.166667, 0.333333, -0.166667, 0.666667)" in out
    assert "Eq. (15a)" in out
    seq, _ = formats.read_sequence(export)
    assert seq == catalog.get_sequence("X5a")


def test_verify_x5a(capsys, tmp_path):
    report = tmp_path / "v.json"
    code, out, _ = run(["verify", "X5a", "--max-order", "2", "--out", str(report)], capsys)
    assert code == 0
    lines = {ln.split()[0]: ln for ln in out.splitlines() if ln.strip().startswith("D")}
    for order in ("D1,0", "D0,1", "D1,1"):
        assert "vanishes" in lines[order]
    for order in ("D2,0", "D0,2"):
        assert "nonzero" in lines[order]
    assert "five-pulse brackets" in out
    data = json.loads(report.read_text())
    assert data["five_pulse_brackets"]["rabi_printed"] == pytest.approx(2)


def test_verify_strict_exit_code(capsys):
    code, _, _ = run(["verify", "PI", "--max-order", "1"], capsys)
    assert code == 0
    f = catalog.get("X13a")  # rounded phases: claims not met to 1e-9
    code, out, _ = run(["verify", f.name, "--max-order", "3", "--strict"], capsys)
    assert code == 1 and "NOT cancelled" in out


def test_landscape_outputs(capsys, tmp_path):
    grid, cont, svg = tmp_path / "grid.csv", tmp_path / "c.json", tmp_path / "f.svg"
    code, out, _ = run(["landscape", "--sequence", "X5a", "--target", "x", "--box", "0.5", "--resolution", "201",
                        "--levels", "1e-4,1e-3,1e-2,1e-1", "--out", str(grid), "--contours", str(cont),
                        "--svg", str(svg)], capsys)
    assert code == 0
    g = formats.read_grid(grid)
    assert g.values.shape == (201, 201)
    assert g.value_at(0, 0) < 1e-12
    c = formats.read_contours(cont)
    assert c.levels == [1e-4, 1e-3, 1e-2, 1e-1]
    assert svg.read_text().startswith("<svg")


def test_landscape_hadamard_target_uses_rx90(capsys, tmp_path):
    a, b = tmp_path / "h.csv", tmp_path / "r.csv"
    run(["landscape", "--sequence", "H4", "--target", "h", "--resolution", "11", "--out", str(a)], capsys)
    run(["landscape", "--sequence", "H4", "--target", "rx90", "--resolution", "11", "--out", str(b)], capsys)
    assert a.read_text() == b.read_text()


def test_landscape_threads_do_not_change_output(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["landscape", "--sequence", "BB1", "--resolution", "31", "--out", str(a)], capsys)
    run(["landscape", "--sequence", "BB1", "--resolution", "31", "--out", str(b), "--threads", "3"], capsys)
    assert a.read_text() == b.read_text()


def test_landscape_from_sequence_file(capsys, tmp_path):
    seq = tmp_path / "s.json"
    formats.write_sequence(seq, catalog.get_sequence("B5"))
    code, out, _ = run(["landscape", "--sequence-file", str(seq), "--resolution", "11"], capsys)
    assert code == 0 and "B5" in out


def test_design_writes_sequences(capsys, tmp_path):
    code, out, _ = run(["design", "--pulses", "5", "--conditions", "10,01,11", "--starts", "64", "--seed", "0",
                        "--out-dir", str(tmp_path)], capsys)
    assert code == 0 and "2 distinct solutions" in out
    files = sorted(tmp_path.glob("design_N5_*.json"))
    assert len(files) == 2
    seq, meta = formats.read_sequence(files[0])
    assert len(seq) == 5 and meta["claimed_orders"] == [(0, 1), (1, 0), (1, 1)]


def test_optimize_and_report(capsys, tmp_path):
    out_seq, report = tmp_path / "o.json", tmp_path / "r.json"
    args = ["optimize", "--pulses", "3", "--starts", "2", "--max-iters", "50", "--seed", "3",
            "--out", str(out_seq), "--report", str(report)]
    code, out1, _ = run(args, capsys)
    assert code == 0
    code, out2, _ = run(args, capsys)
    assert out1 == out2
    seq, _ = formats.read_sequence(out_seq)
    assert len(seq) == 3
    assert json.loads(report.read_text())["spec"]["seed"] == 3


def test_scan_duration(capsys, tmp_path):
    path = tmp_path / "p.csv"
    code, _, _ = run(["scan-duration", "--sequence", "X5a", "--eta-range", "-0.2,0.2", "--points", "5",
                      "--out", str(path)], capsys)
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "eta,epsilon,delta,infidelity" and len(lines) == 6
    mid = [float(v) for v in lines[3].split(",")]
    assert mid[0] == 0 and mid[3] < 1e-12


def test_average(capsys):
    code, out, _ = run(["average", "--sequence", "X5c"], capsys)
    assert code == 0 and "4.415250613869e-04" in out


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nstarts = 2\nmax-iters = 5\nseed = 7\n")
    report = tmp_path / "r.json"
    code, _, _ = run(["--config", str(cfg), "optimize", "--pulses", "3", "--seed", "1",
                      "--report", str(report)], capsys)
    assert code == 0
    spec = json.loads(report.read_text())["spec"]
    assert spec["starts"] == 2 and spec["max_iters"] == 5 and spec["seed"] == 1


@pytest.mark.parametrize("args,fragment", [
    (["verify", "X5z"], "unknown sequence"),
    (["landscape", "--sequence", "X5a", "--box", "0.1,0.2,0.3"], "--box"),
    (["landscape", "--sequence", "X5a", "--box", "0.1,-0.1,0,1"], "--box"),
    (["landscape", "--sequence", "X5a", "--resolution", "1"], "--resolution"),
    (["landscape", "--sequence", "X5a", "--levels", "0"], "--levels"),
    (["landscape", "--sequence", "X5a", "--target", "y"], "--target"),
    (["landscape"], "sequence"),
    (["design", "--pulses", "4"], "--pulses"),
    (["design", "--pulses", "5", "--conditions", "1x"], "--conditions"),
    (["optimize", "--pulses", "3", "--grid", "0"], "--grid"),
    (["verify", "X5a", "--max-order", "9"], "--max-order"),
])
def test_validation_errors_exit_2(capsys, args, fragment):
    code, _, err = run(args, capsys)
    assert code == 2
    assert len(err.strip().splitlines()) == 1 and fragment in err


def test_malformed_sequence_file_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    code, _, err = run(["landscape", "--sequence-file", str(bad)], capsys)
    assert code == 2 and "--sequence-file" in err
    code, _, err = run(["landscape", "--sequence-file", str(tmp_path / "missing.json")], capsys)
    assert code == 2


def test_bad_config_exits_2(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("starts\n")
    code, _, err = run(["--config", str(cfg), "catalog", "list"], capsys)
    assert code == 2 and "--config" in err


def test_runtime_failure_exits_1(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(["landscape", "--sequence", "X5a", "--resolution", "5", "--out",
                        str(blocker / "sub" / "g.csv")], capsys)
    assert code == 1 and err.startswith("cpgates: failed")


def test_argparse_usage_error_exits_2(capsys):
    assert main(["no-such-command"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cpgates", "catalog", "show", "B3d"], capture_output=True, text=True)
    assert proc.returncode == 0 and "B3d" in proc.stdout
