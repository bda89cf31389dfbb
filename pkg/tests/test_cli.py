import csv

import pytest

from pfpenalty.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, format_table, main
from pfpenalty.config import RunConfig, parse_config
from pfpenalty.errors import ConfigurationError
from pfpenalty.model import ModelKind

TINY_SEN = """[run]
length_scale = 0.2
h_fine = 0.1
h_coarse = 0.2
first = 0.002
increment = 0.002
n_loading = 1
n_unloading = 1
unload_factor = 1.0
"""

TINY_SNEDDON = """[run]
model = AT2
length_scale = 0.08
h_fine = 0.04
h_coarse = 0.5
h_crack = 0.01
stations = 5
"""


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_tune_prints_reference_penalties(tmp_path, capsys):
    assert main(["tune", "--out", str(tmp_path), "--csv"]) == EXIT_OK
    out = capsys.readouterr().out
    rows = read_rows(tmp_path / "penalties.csv")
    phys = {(r[0], r[1], r[2], r[3]): float(r[5]) for r in rows[1:]}
    assert phys[("sen_SI", "gamma", "AT1", "0.01")] == pytest.approx(1.14e12, rel=0.01)
    assert phys[("sen_SI", "gamma", "AT2", "0.01")] == pytest.approx(2.7e12, rel=0.01)
    assert phys[("sneddon", "gamma", "AT1", "0.01")] == pytest.approx(2.1e5, rel=0.01)
    assert phys[("sneddon", "gamma", "AT2", "0.01")] == pytest.approx(5e5, rel=0.01)
    assert "1139062499999.9998" in out
    assert (tmp_path / "meta.txt").exists()


def test_every_header_names_units(tmp_path):
    assert main(["profiles", "--out", str(tmp_path)]) == EXIT_OK
    for name in ("profiles.csv", "F_gamma.csv", "F_rho.csv"):
        header = read_rows(tmp_path / name)[0]
        assert all(h.endswith("]") and " [" in h for h in header), name


def test_profiles_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["profiles", "--out", str(a)]) == EXIT_OK
    assert main(["profiles", "--out", str(b)]) == EXIT_OK
    for name in ("profiles.csv", "F_gamma.csv", "F_rho.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_sweep_writes_one_directory_per_section(tmp_path):
    cfg = write(tmp_path, "s.ini", "[run]\nratio = 20\n[sweep.short]\nratio = 4\n[sweep.long]\nratio = 200\n")
    assert main(["profiles", "--config", str(cfg), "--out", str(tmp_path / "o"), "--sweep", "2"]) == EXIT_OK
    short = read_rows(tmp_path / "o" / "short" / "profiles.csv")
    long_ = read_rows(tmp_path / "o" / "long" / "profiles.csv")
    assert float(short[-1][0]) == pytest.approx(4.0)
    assert float(long_[-1][0]) == pytest.approx(200.0)


def test_threaded_sweep_matches_serial(tmp_path):
    cfg = write(tmp_path, "s.ini", "[sweep.a]\npenalty = 100\n[sweep.b]\npenalty = 1e6\n")
    assert main(["profiles", "--config", str(cfg), "--out", str(tmp_path / "t"), "--sweep", "2"]) == 0
    assert main(["profiles", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 0
    for run in ("a", "b"):
        assert (tmp_path / "t" / run / "profiles.csv").read_bytes() == \
            (tmp_path / "s" / run / "profiles.csv").read_bytes()


def test_malformed_mesh_is_an_input_error(tmp_path, capsys):
    mesh = write(tmp_path, "bad.mesh", "nodes 2\n0 0\n")
    cfg = write(tmp_path, "c.ini", f"[run]\nmesh_file = {mesh}\n")
    assert main(["sneddon", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_INPUT
    assert "input" in capsys.readouterr().err


@pytest.mark.parametrize("text", ["[run]\nmodel = AT3\n", "[run]\nbogus = 1\n", "[other]\n",
                                  "[run]\ngamma_scale = -1\n", "no section\n"])
def test_bad_config_is_an_input_error(tmp_path, text):
    cfg = write(tmp_path, "c.ini", text)
    assert main(["tune", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_INPUT


def test_missing_config_is_an_input_error(tmp_path):
    assert main(["tune", "--config", str(tmp_path / "none.ini")]) == EXIT_INPUT


def test_non_convergence_is_a_numerical_error(tmp_path, capsys):
    cfg = write(tmp_path, "c.ini", TINY_SEN + "max_stag_iters = 1\ntol_stag = 1e-12\ntol_nr = 1e-13\n")
    assert main(["sen", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_NUMERIC
    assert "numerical" in capsys.readouterr().err


def test_sen_pipeline_outputs(tmp_path):
    cfg = write(tmp_path, "c.ini", TINY_SEN)
    assert main(["sen", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    rows = read_rows(tmp_path / "o" / "steps.csv")
    assert rows[0][:3] == ["step [-]", "load [load]", "reaction [force/thickness]"]
    assert len(rows) == 4
    meta = (tmp_path / "o" / "meta.txt").read_text()
    assert "resolved_irreversibility = " in meta and "assumption = notch" in meta


def test_sneddon_pipeline_outputs(tmp_path):
    cfg = write(tmp_path, "c.ini", TINY_SNEDDON)
    assert main(["sneddon", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    rows = read_rows(tmp_path / "o" / "cod.csv")
    assert rows[0] == ["x [length]", "COD_PF [length]", "COD_exact [length]"]
    mid = [r for r in rows[1:] if float(r[0]) == 0.0][0]
    assert float(mid[2]) == pytest.approx(0.0768)
    assert float(mid[1]) > 0.0
    meta = (tmp_path / "o" / "meta.txt").read_text()
    assert "recovery_overshoot_percent" in meta


def test_config_sections_and_types():
    runs = parse_config("[run]\nmodel = AT2\nh_fine = none\n[sweep.x]\npenalty = 5\n")
    assert len(runs) == 1 and runs[0].name == "x"
    assert runs[0].model is ModelKind.AT2 and runs[0].h_fine is None and runs[0].penalty == 5.0
    assert parse_config("") == [RunConfig()]
    with pytest.raises(ConfigurationError):
        parse_config("[run]\npoints = many\n")
    with pytest.raises(ConfigurationError):
        parse_config("[sweep.a/b]\n")


def test_format_table_aligns_columns():
    text = "a [-],b [m]\n1,0.123456789\n10,2.5\n"
    lines = format_table(text).splitlines()
    assert len({len(line) for line in lines}) == 1
    assert "0.123457" in lines[2]
