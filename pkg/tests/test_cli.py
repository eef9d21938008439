"""Command-line interface tests.

Exit-code contract: 0 on success, 1 when an experiment or tolerance check
fails, 2 on usage/configuration errors.  CSV artifacts carry the versioned
header and are byte-identical for identical scenario + seed.
"""

import shutil
import subprocess

import pytest

from fractail.cli import main
from fractail.runner import CSV_HEADER

MLF_TABLE = """
[scenario]
kind = "mlf-table"
alpha = 0.5

[mlf]
beta = 1.0

[time_grid]
t_min = 0.01
t_max = 10.0
points_per_decade = 3

[output]
prefix = "demo"
"""

TAIL = """
[scenario]
kind = "tail"
alpha = 0.5

[operator]
n_modes = 2

[source]
f_modal = [1.0, 0.5]

[time_grid]
t_min = 100.0
t_max = 1e6
points_per_decade = 3
"""

EXTRACT = """
[scenario]
kind = "extract"
alpha = 0.5
rng_seed = 42

[operator]
n_modes = 2

[source]
f_modal = [1.0, 0.5]

[time_grid]
t_min = 100.0
t_max = 1e6
points_per_decade = 4

[inverse]
K = 4
M = 4
n_modes = 2
noise_level = 1e-12

[tolerances]
A1_rel = 1e-3
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def csv_files(out_dir):
    return sorted(p for p in out_dir.iterdir() if p.suffix == ".csv")


class TestRun:
    def test_mlf_table_passes(self, tmp_path, capsys):
        scn = write(tmp_path, "table.toml", MLF_TABLE)
        out = tmp_path / "out"
        rc = main(["run", scn, "--out", str(out)])
        captured = capsys.readouterr()
        assert rc == 0
        assert "scenario digest:" in captured.out
        assert "check max_rel_error: PASS" in captured.out
        csvs = csv_files(out)
        assert [p.name for p in csvs] == ["demo_mlf.csv"]
        first_line = csvs[0].read_text().splitlines()[0]
        assert first_line == CSV_HEADER
        assert (out / "demo_report.txt").exists()

    def test_default_out_dir_uses_scenario_stem(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        scn = write(tmp_path, "table.toml", MLF_TABLE)
        rc = main(["run", scn])
        assert rc == 0
        assert (tmp_path / "table_out" / "demo_mlf.csv").exists()

    def test_plots_only_when_requested(self, tmp_path, capsys):
        scn = write(tmp_path, "tail.toml", TAIL)
        plain = tmp_path / "plain"
        rc = main(["run", scn, "--out", str(plain)])
        assert rc == 0
        assert not list(plain.glob("*.svg"))
        with_plots = tmp_path / "plots"
        rc = main(["run", scn, "--plots", "--out", str(with_plots)])
        assert rc == 0
        svgs = list(with_plots.glob("*.svg"))
        assert len(svgs) == 1
        assert svgs[0].read_text().lstrip().startswith("<?xml")

    def test_csv_outputs_are_deterministic(self, tmp_path, capsys):
        scn = write(tmp_path, "extract.toml", EXTRACT)
        out1, out2 = tmp_path / "one", tmp_path / "two"
        assert main(["run", scn, "--out", str(out1)]) == 0
        assert main(["run", scn, "--out", str(out2)]) == 0
        names1 = [p.name for p in csv_files(out1)]
        names2 = [p.name for p in csv_files(out2)]
        assert names1 == names2 and len(names1) == 2
        for name in names1:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_failing_tolerance_exits_1(self, tmp_path, capsys):
        # noiseless recovery is excellent but still finite-precision, so an
        # impossibly tight threshold must fail and exit 1
        text = EXTRACT.replace("noise_level = 1e-12", "noise_level = 0.0").replace(
            "A1_rel = 1e-3", "a1_rel = 1e-18"
        )
        scn = write(tmp_path, "tight.toml", text)
        rc = main(["run", scn, "--out", str(tmp_path / "out")])
        captured = capsys.readouterr()
        assert rc == 1
        assert "check a1_rel: FAIL" in captured.out

    def test_unknown_tolerance_key_exits_2(self, tmp_path, capsys):
        scn = write(tmp_path, "bad.toml", TAIL + "\n[tolerances]\nnope = 1.0\n")
        rc = main(["run", scn, "--out", str(tmp_path / "out")])
        captured = capsys.readouterr()
        assert rc == 2
        assert "tolerances.nope" in captured.err

    def test_invalid_scenario_exits_2_naming_key(self, tmp_path, capsys):
        scn = write(tmp_path, "bad.toml", TAIL + "\n[time_grid]\nbogus = 1\n")
        # duplicate table is a TOML error; splice the key into the original
        scn = write(
            tmp_path,
            "bad.toml",
            TAIL.replace("points_per_decade = 3", "points_per_decade = 3\nbogus = 1"),
        )
        rc = main(["run", scn, "--out", str(tmp_path / "out")])
        captured = capsys.readouterr()
        assert rc == 2
        assert "unknown key 'time_grid.bogus'" in captured.err

    def test_missing_scenario_file_exits_2(self, tmp_path, capsys):
        rc = main(["run", str(tmp_path / "absent.toml")])
        captured = capsys.readouterr()
        assert rc == 2
        assert "error" in captured.err

    def test_thread_cap_env_is_validated(self, tmp_path, capsys, monkeypatch):
        scn = write(tmp_path, "table.toml", MLF_TABLE)
        monkeypatch.setenv("FRACTAIL_THREADS", "many")
        rc = main(["run", scn, "--out", str(tmp_path / "a")])
        captured = capsys.readouterr()
        assert rc == 2
        assert "FRACTAIL_THREADS" in captured.err
        monkeypatch.setenv("FRACTAIL_THREADS", "0")
        assert main(["run", scn, "--out", str(tmp_path / "b")]) == 2
        capsys.readouterr()
        monkeypatch.setenv("FRACTAIL_THREADS", "1")
        assert main(["run", scn, "--out", str(tmp_path / "c")]) == 0


class TestVerify:
    def test_unknown_suite_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["verify", "everything"])
        assert excinfo.value.code == 2

    def test_scalar_suite_passes(self, capsys):
        rc = main(["verify", "scalar"])
        captured = capsys.readouterr()
        assert rc == 0
        assert "criterion 6 [PASS]" in captured.out
        assert "all 1 criteria passed" in captured.out


class TestMlf:
    def test_value_printed(self, capsys):
        rc = main(["mlf", "--alpha", "1.0", "--beta", "1.0", "--x", "-1.0"])
        captured = capsys.readouterr()
        assert rc == 0
        value = float(captured.out.split("=")[1].strip())
        assert value == pytest.approx(0.36787944117144233, rel=1e-15)

    def test_check_mode(self, capsys):
        rc = main(
            ["mlf", "--alpha", "0.5", "--beta", "1.0", "--x", "-3.0", "--check"]
        )
        captured = capsys.readouterr()
        assert rc == 0
        assert "relative error" in captured.out

    def test_domain_error_exits_2(self, capsys):
        rc = main(["mlf", "--alpha", "0.0", "--beta", "1.0", "--x", "-1.0"])
        assert rc == 2
        assert "error" in capsys.readouterr().err


@pytest.mark.skipif(shutil.which("fractail") is None, reason="script not on PATH")
def test_console_script_smoke():
    proc = subprocess.run(
        ["fractail", "mlf", "--alpha", "0.5", "--beta", "0.5", "--x", "-2.0"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("E_(0.5,0.5)(-2)")
