import numpy as np
import pytest

from sfagauge import cli
from sfagauge.spectra import Method, SpectrumGrid
from sfagauge.states import StateKind


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def strip_stamp(text):
    return "\n".join(l for l in text.splitlines() if not l.startswith("# created"))


def synthetic(values, e=None, kind=StateKind.S_EVEN, method=Method.TDSE):
    e = np.linspace(0.01, 1.2, 500) if e is None else e
    return SpectrumGrid(e, 0.0, values, method, None, kind, {"omega": 0.056})


def comb(e):
    return (1.2 + np.cos(2 * np.pi * e / 0.056)) * np.exp(-3 * e)


@pytest.fixture
def small_cfg(tmp_path):
    return write(tmp_path, "run.cfg", "grid.n_points = 120\nstate.kind = p\nmethod.gauge = length\n")


def test_config_defaults_match_pulse():
    cfg = cli.load_config(None)
    assert (cfg.pulse.e0, cfg.pulse.omega, cfg.pulse.n_cycles, cfg.pulse.cep) == (0.0834, 0.056, 4, 0.0)
    assert cfg.state.ip == 0.5 and cfg.tdse["r_c"] == 2.0 and cfg.tdse["z_eff"] is None


@pytest.mark.parametrize("text,key", [("method.gauge = sideways", "method.gauge"), ("field.e0 = -1", "field.e0"),
                                      ("grid.n_points = many", "grid.n_points"), ("bogus.key = 1", "bogus.key"),
                                      ("state.kind = d", "state.kind"), ("method.name = guess", "method.name")])
def test_invalid_config_exit_2(tmp_path, capsys, text, key):
    path = write(tmp_path, "bad.cfg", text + "\n")
    assert cli.main(["spectrum", "--config", str(path)]) == 2
    assert key in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert cli.main(["spectrum", "--config", str(tmp_path / "absent.cfg")]) == 2


def test_gauge_ignored_for_tdse():
    with pytest.warns(UserWarning, match="ignored"):
        cfg = cli.build_config(cli.parse_config_text("method.name = tdse\nmethod.gauge = velocity\n"))
    assert cfg.gauge is None


def test_spectrum_csv_layout_and_determinism(tmp_path, small_cfg):
    outs = []
    for name in ("a.csv", "b.csv"):
        assert cli.main(["spectrum", "--config", str(small_cfg), "--out", str(tmp_path / name)]) == 0
        outs.append((tmp_path / name).read_text())
    assert strip_stamp(outs[0]) == strip_stamp(outs[1])
    lines = outs[0].splitlines()
    assert lines[0].startswith("# created ")
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "energy_au,momentum_au,theta_rad,value,method,gauge,state"
    assert len(body) == 121
    row = body[1].split(",")
    assert row[4:] == ["sfa_direct", "length", "p"]
    assert float(row[1]) == pytest.approx(np.sqrt(2 * float(row[0])))


def test_window_flag(tmp_path, small_cfg):
    out = tmp_path / "w.csv"
    assert cli.main(["spectrum", "--config", str(small_cfg), "--window", "0.2:0.4", "--out", str(out)]) == 0
    e = cli.read_spectrum_csv(out).energies
    assert e.min() >= 0.2 and e.max() <= 0.4
    assert cli.main(["spectrum", "--config", str(small_cfg), "--window", "0.4"]) == 2


def test_spa_run(tmp_path):
    cfg = write(tmp_path, "spa.cfg", "method.name = sfa_spa\ngrid.n_points = 30\ngrid.e_min = 0.3\ngrid.e_max = 0.9\n")
    out = tmp_path / "spa.csv"
    assert cli.main(["spectrum", "--config", str(cfg), "--out", str(out)]) == 0
    assert cli.read_spectrum_csv(out).method is Method.SFA_SPA


def test_tdse_auto_zeff_recorded(tmp_path):
    text = ("method.name = tdse\nfield.e0 = 0.03\nfield.n_cycles = 2\ntdse.r_max = 60\ntdse.l_max = 4\n"
            "tdse.dt = 0.05\ngrid.n_points = 20\n")
    cfg = write(tmp_path, "tdse.cfg", text)
    out = tmp_path / "tdse.csv"
    assert cli.main(["spectrum", "--config", str(cfg), "--out", str(out)]) == 0
    spec = cli.read_spectrum_csv(out)
    assert float(spec.metadata["z_eff"]) > 1.0
    assert spec.gauge is None and "n/a" in out.read_text()


def test_compare_identity_and_scale():
    e = np.linspace(0.01, 1.2, 500)
    a = synthetic(comb(e))
    rep = cli.compare(a, a, (0.1, 1.0), 0.056)
    assert rep.scale_factor == 1.0 and rep.max_offset == 0.0
    assert all(d == 0 for *_, d in rep.peak_table)
    rep = cli.compare(synthetic(3.7 * comb(e)), a, (0.1, 1.0), 0.056)
    assert rep.scale_factor == pytest.approx(3.7, abs=1e-10)
    assert rep.max_offset == pytest.approx(0.0, abs=1e-12)


def test_compare_symmetry():
    e1 = np.linspace(0.01, 1.2, 500)
    e2 = np.linspace(0.02, 1.1, 333)
    a = synthetic(comb(e1) * (1 + 0.3 * np.sin(5 * e1)), e1)
    b = synthetic(0.2 * comb(e2 + 0.004), e2)
    ab = cli.compare(a, b, (0.1, 1.0), 0.056)
    ba = cli.compare(b, a, (0.1, 1.0), 0.056)
    assert ab.scale_factor * ba.scale_factor == pytest.approx(1.0, abs=1e-12)
    assert [d for *_, d in ab.peak_table] == pytest.approx([-d for *_, d in ba.peak_table], abs=1e-15)


def test_compare_no_peaks(tmp_path):
    e = np.linspace(0.01, 1.2, 500)
    flat = synthetic(np.exp(-e))
    with pytest.raises(cli.NoPeaksError):
        cli.compare(flat, synthetic(comb(e)), (0.1, 1.0), 0.056)
    for name, spec in (("flat.csv", flat), ("comb.csv", synthetic(comb(e)))):
        (tmp_path / name).write_text(cli.spectrum_csv(spec))
    assert cli.main(["compare", str(tmp_path / "flat.csv"), str(tmp_path / "comb.csv"), "--window", "0.1:1"]) == 2


def test_compare_command_output(tmp_path, capsys):
    e = np.linspace(0.01, 1.2, 500)
    (tmp_path / "a.csv").write_text(cli.spectrum_csv(synthetic(comb(e))))
    (tmp_path / "b.csv").write_text(cli.spectrum_csv(synthetic(2 * comb(e))))
    assert cli.main(["compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"), "--window", "0.1:1.0"]) == 0
    out = capsys.readouterr().out
    fields = dict(line.split("=") for line in out.splitlines() if "=" in line)
    assert float(fields["scale_factor"]) == pytest.approx(0.5, rel=1e-12)
    assert float(fields["max_offset_omega"]) == 0.0


def _bundle(tmp_path):
    paths = []
    for kind in ("s", "p"):
        for gauge in ("length", "velocity"):
            cfg = write(tmp_path, f"{kind}{gauge}.cfg", f"state.kind={kind}\nmethod.gauge={gauge}\ngrid.n_points=60\n")
            out = tmp_path / f"{kind}{gauge}.csv"
            assert cli.main(["spectrum", "--config", str(cfg), "--out", str(out)]) == 0
            paths.append(str(out))
    return paths


def test_plot_scripts(tmp_path):
    paths = _bundle(tmp_path)
    two = cli.plot_script(paths[:2])
    assert two.count("ax.plot(") == 2 and 'set_yscale("log")' in two
    four = cli.plot_script(paths)
    assert four.count("ax_l.plot(") == 2 and four.count("ax_v.plot(") == 2
    assert four.count('set_yscale("log")') == 2
    compile(four, "plot.py", "exec")


def test_plot_errors(tmp_path):
    assert cli.main(["plot"]) == 2
    assert cli.main(["plot", str(tmp_path / "missing.csv")]) == 2


def test_saddles_and_eigen(tmp_path, capsys):
    cfg = write(tmp_path, "s.cfg", "grid.n_points = 3\ngrid.e_min = 0.2\ngrid.e_max = 0.6\ntdse.r_max = 80\n")
    assert cli.main(["saddles", "--config", str(cfg)]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0].startswith("energy_au,index,t_re,t_im")
    assert all(float(r.split(",")[-1]) < 1e-9 for r in rows[1:])
    assert cli.main(["eigen", "--config", str(cfg)]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert len(rows) == 3
    for r in rows[1:]:
        assert float(r.split(",")[3]) == pytest.approx(-0.5, abs=1e-5)


def test_solver_failure_exit_3(tmp_path):
    cfg = write(tmp_path, "e.cfg", "state.ip = 60\ntdse.r_max = 40\n")
    assert cli.main(["eigen", "--config", str(cfg)]) == 3
