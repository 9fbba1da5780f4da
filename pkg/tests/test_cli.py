import subprocess
import sys

import pytest

from floorbound.cli import RunConfig, main
from floorbound.instance import load_instance

from conftest import SMALL_1D_TEXT


@pytest.fixture
def small_file(tmp_path):
    path = tmp_path / "a.flp"
    path.write_text(SMALL_1D_TEXT)
    return str(path)


def _machine(text):
    return dict(line.split("\t", 1) for line in text.strip().splitlines())


def test_bound_reports_each_level(small_file, capsys):
    assert main(["bound", "--instance", small_file, "--k", "3", "--workers", "4"]) == 0
    out = capsys.readouterr().out
    assert "12" in out and "14" in out


def test_bound_gap_at_optimum(small_file, capsys):
    rc = main(["bound", "--instance", small_file, "--k", "3", "--ub", "14",
               "--format", "machine", "--workers", "1"])
    assert rc == 0
    rep = _machine(capsys.readouterr().out)
    assert rep["level.3.omega"] == "14" and rep["level.2.omega"] == "12"
    assert float(rep["level.3.gap"]) == 0.0
    assert "time.master.3" not in rep


def test_bound_timings_only_on_request(small_file, capsys):
    main(["bound", "--instance", small_file, "--k", "2", "--format", "machine", "--timings"])
    assert "time.master.2" in _machine(capsys.readouterr().out)


def test_bound_k_over_cap(tmp_path):
    path = tmp_path / "s8.flp"
    assert main(["gen", "--dim", "1", "--n", "8", "--density", "0.5", "--seed", "1",
                 "--out", str(path)]) == 0
    assert main(["bound", "--instance", str(path), "--k", "9"]) == 4


def test_generated_instance_is_monotone(tmp_path, capsys):
    path = tmp_path / "s8.flp"
    main(["gen", "--dim", "1", "--n", "8", "--density", "0.5", "--seed", "1", "--out", str(path)])
    assert load_instance(path).n == 8
    assert main(["bound", "--instance", str(path), "--k", "5", "--format", "machine",
                 "--workers", "2"]) == 0
    rep = _machine(capsys.readouterr().out)
    from fractions import Fraction
    vals = [Fraction(rep[f"level.{k}.omega"]) for k in range(2, 6)]
    assert vals == sorted(vals)


def test_exact_size_cap(tmp_path):
    path = tmp_path / "big.flp"
    main(["gen", "--dim", "1", "--n", "20", "--seed", "3", "--out", str(path)])
    assert main(["exact", "--instance", str(path)]) == 4


def test_exact_emits_layout(small_file, tmp_path, capsys):
    lay = tmp_path / "opt.layout"
    assert main(["exact", "--instance", small_file, "--emit-layout", str(lay)]) == 0
    assert "optimum 14" in capsys.readouterr().out
    assert lay.read_text().splitlines()[-1] == "OBJ 14"


def test_audit_lifted_passes(small_file, capsys):
    assert main(["audit", "--which", "lifted-lp", "--instance", small_file]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "objective\t12" in lines and "expected\t12" in lines and "result\tPASS" in lines


def test_audit_failure_exit_code(tmp_path, capsys):
    path = tmp_path / "uneven.flp"
    path.write_text("FLP 1\nN 3\nL 48\nCOMP 1 1\nCOMP 2 1\nCOMP 3 10\n"
                    "P 1 2 1\nP 1 3 1\nP 2 3 1\n")
    assert main(["audit", "--which", "lifted-lp", "--instance", str(path)]) == 0
    assert main(["audit", "--which", "lifted-lp", "--variant", "swapped",
                 "--instance", str(path)]) == 1
    assert "A1a\t" in capsys.readouterr().out


def test_audit_wrong_dimension(small_file):
    assert main(["audit", "--which", "takouda", "--instance", small_file]) == 2


def test_audit_takouda_reports_fail(tmp_path, capsys):
    path = tmp_path / "sq.flp"
    path.write_text("FLP 2\nN 2\nL 4 4\nCOMP 1 0.5 0.5 0.5 0.5 1\nCOMP 2 0.5 0.5 0.5 0.5 1\n"
                    "P 1 2 2\n")
    assert main(["audit", "--which", "takouda", "--instance", str(path)]) == 1
    assert "result\tFAIL" in capsys.readouterr().out


def test_parse_error_exit(tmp_path):
    path = tmp_path / "bad.flp"
    path.write_text("FLP 1\nN two\n")
    assert main(["bound", "--instance", str(path)]) == 2


def test_missing_file_exit(tmp_path):
    assert main(["bound", "--instance", str(tmp_path / "nope.flp")]) == 2


def test_invariant_exit(tmp_path):
    path = tmp_path / "tight.flp"
    path.write_text(SMALL_1D_TEXT.replace("L 100", "L 10"))
    assert main(["bound", "--instance", str(path)]) == 3


def test_export_master(small_file, tmp_path):
    out = tmp_path / "m.lp"
    assert main(["export", "--what", "master", "--k", "3", "--instance", small_file,
                 "--out", str(out)]) == 0
    assert "C_1_2_3: 1 d1_2 + 1 d1_3 + 1 d2_3 >= 14" in out.read_text()


def test_export_lifted(small_file, tmp_path):
    out = tmp_path / "l.lp"
    assert main(["export", "--what", "lifted", "--instance", small_file, "--out", str(out)]) == 0
    assert "\\ MOMENT-MATRIX 7" in out.read_text()


def test_env_overrides_tolerance(monkeypatch):
    monkeypatch.setenv("FLOORBOUND_EPS_AREA", "0.001")
    from floorbound.cli import build_parser
    args = build_parser().parse_args(["bound", "--instance", "x"])
    assert args.eps_area == 0.001


def test_config_rejects_zero_workers():
    with pytest.raises(ValueError):
        RunConfig("bound", workers=0)


def test_module_entry_point(small_file):
    proc = subprocess.run([sys.executable, "-m", "floorbound", "bound", "--instance", small_file,
                           "--k", "2", "--format", "machine"], capture_output=True, text=True)
    assert proc.returncode == 0 and "level.2.omega\t12" in proc.stdout
