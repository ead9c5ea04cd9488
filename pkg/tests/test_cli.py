import subprocess
import sys

import pytest

from conftest import FIXTURES, FRAMES, GOLDEN, read_hex
from smoc.cli import main


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "argv, golden",
    [
        (["run", FIXTURES / "topo1.txt", FIXTURES / "smoc4.scn"], "run_smoc4.txt"),
        (["run", FIXTURES / "topo1.txt", FIXTURES / "stp4.scn"], "run_stp4.txt"),
        (["run", FIXTURES / "smoc4_topo2.scn"], "run_smoc4_topo2.txt"),
        (["run", FIXTURES / "smoc4_delay.scn", "--csv"], "run_smoc4_delay_csv.txt"),
        (["paths", FIXTURES / "diamond.txt", "a", "d"], "paths_diamond_a_d.txt"),
        (["paths", FIXTURES / "chain.txt", "a", "c"], "paths_chain_a_c.txt"),
        (["paths", FIXTURES / "topo2.txt", "a", "b"], "paths_topo2_a_b.txt"),
        (["decode", read_hex(FRAMES / "mp_capable_syn.hex").hex()], "decode_mp_capable_syn.txt"),
        (["decode", ""], "decode_empty.txt"),
    ],
)
def test_golden_output(capsys, argv, golden):
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0
    assert out == (GOLDEN / golden).read_text()


def test_run_summary_numbers(capsys):
    _, out, _ = run_cli(capsys, "run", FIXTURES / "topo1.txt", FIXTURES / "smoc4.scn")
    assert "aggregate=400.000000" in out
    _, out, _ = run_cli(capsys, "run", FIXTURES / "topo1.txt", FIXTURES / "stp4.scn")
    assert "aggregate=100.000000" in out


def test_run_out_file(capsys, tmp_path):
    target = tmp_path / "series.csv"
    code, out, _ = run_cli(capsys, "run", FIXTURES / "smoc4_delay.scn", "--out", target, "--quiet")
    assert code == 0 and out == ""
    golden = (GOLDEN / "run_smoc4_delay_csv.txt").read_text()
    assert golden.startswith(target.read_text())


def test_malformed_topology_line(capsys, tmp_path):
    topo = tmp_path / "bad.txt"
    topo.write_text("format=1\nswitch a\nswitch b\nlink a b fast\n")
    code, _, err = run_cli(capsys, "run", topo, FIXTURES / "smoc4.scn")
    assert code == 2
    assert "line 4" in err


def test_malformed_scenario_line(capsys, tmp_path):
    scn = tmp_path / "bad.scn"
    scn.write_text("format=1\ncontroller smoc\nsession 1 hA hB four 0\n")
    code, _, err = run_cli(capsys, "run", FIXTURES / "topo1.txt", scn)
    assert code == 2
    assert "line 3" in err


def test_unknown_host_in_scenario(capsys, tmp_path):
    scn = tmp_path / "bad.scn"
    scn.write_text("format=1\n\nsession 1 hA hQ 2 0\n")
    code, _, err = run_cli(capsys, "run", FIXTURES / "topo1.txt", scn)
    assert code == 2
    assert "line 3" in err and "hQ" in err


def test_simulation_error_exit_3(capsys, tmp_path):
    scn = tmp_path / "late.scn"
    scn.write_text("format=1\nduration 2\nsession 1 hA hB 2 5\n")
    code, _, err = run_cli(capsys, "run", FIXTURES / "topo1.txt", scn)
    assert code == 3


def test_missing_topology(capsys, tmp_path):
    scn = tmp_path / "s.scn"
    scn.write_text("format=1\nsession 1 hA hB 2 0\n")
    assert run_cli(capsys, "run", scn)[0] == 2


def test_paths_unknown_switch(capsys):
    code, _, err = run_cli(capsys, "paths", FIXTURES / "diamond.txt", "a", "z")
    assert code == 2 and "unknown switch z" in err


def test_decode_odd_hex(capsys):
    assert run_cli(capsys, "decode", "abc")[0] == 2
    assert run_cli(capsys, "decode", "zz")[0] == 2


@pytest.mark.parametrize(
    "name, error",
    [("unknown_subtype.hex", "UnknownSubtype"), ("bad_length_option.hex", "BadLength")],
)
def test_decode_reports_error_name(capsys, name, error):
    code, out, _ = run_cli(capsys, "decode", read_hex(FRAMES / "malformed" / name).hex())
    assert code == 0
    assert out.startswith(error + ":")


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "smoc", "paths", str(FIXTURES / "diamond.txt"), "a", "d"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout == (GOLDEN / "paths_diamond_a_d.txt").read_text()


def test_every_fixture_scenario_runs(capsys):
    for scn in sorted(FIXTURES.glob("*.scn")):
        assert run_cli(capsys, "run", scn, "--quiet")[0] == 0, scn.name
