import json
import re
import warnings

import pytest

from grwsim import cli
from grwsim.config import ExperimentConfig, emit_config, parse_config
from grwsim.errors import CsvFormatError
from grwsim.io import (
    HISTOGRAM_HEADER,
    PATHS_HEADER,
    plot_command,
    read_csv,
    run_command,
)

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


def gamma2(**kw):
    base = dict(model="one_detector", p0=0.5, t_max=40e-9, n_paths=200, seed=3, preset="gamma_2", a=0.1, gamma=0.5e11)
    base.update(kw)
    return ExperimentConfig(**base)


def test_two_paths_three_samples(tmp_path):
    cfg = gamma2(n_paths=2, dt=1e-12, t_max=2e-12, record_stride=1)
    run_command(cfg, tmp_path)
    rows = read_csv(tmp_path / "paths.csv", PATHS_HEADER)
    assert len(rows) == 6
    assert [int(r[0]) for r in rows] == [0, 0, 0, 1, 1, 1]
    assert [r[1] for r in rows[:3]] == [0.0, 1e-12, 2e-12]
    assert rows[0][2] == rows[3][2] == 0.5


def test_outputs_reproducible_and_summary(tmp_path):
    cfg = gamma2(n_paths=1000, p0=2 / 3)
    m1 = run_command(cfg, tmp_path / "a")
    m2 = run_command(cfg, tmp_path / "b", threads=4)
    assert m1 == m2
    assert set(m1["files"]) == {"paths.csv", "summary.json", "histogram.csv", "persistence.csv"}
    s = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert abs(s["born_fraction_R"] - 2 / 3) < 0.047
    assert s["seed"] == 3 and s["n_paths"] == 1000
    assert parse_config(s["config_text"]) == cfg
    hist = read_csv(tmp_path / "a" / "histogram.csv", HISTOGRAM_HEADER)
    assert sum(r[2] for r in hist) == s["n_converged_R"]
    assert sum(r[3] for r in hist) == s["n_converged_L"]


def test_unresolved_summary_has_nulls(tmp_path):
    run_command(gamma2(n_paths=5, t_max=1e-11), tmp_path)
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["born_fraction_R"] is None and s["unresolved_count"] == 5


def test_empty_paths_file_gives_empty_chart(tmp_path):
    (tmp_path / "paths.csv").write_text("")
    svg = plot_command(tmp_path, "paths")
    assert svg.startswith("<svg") and "<polyline" not in svg


@pytest.mark.parametrize(
    "text,row",
    [
        ("path_index,t,p\n0,0.0,0.5\n0,1e-9,oops\n", 3),
        ("path_index,t,p\n0,0.0,0.5\n0,1e-9\n", 3),
        ("path_index,t,p\n0,0.0,nan\n", 2),
        ("index,t,p\n", 1),
    ],
)
def test_malformed_csv(tmp_path, text, row):
    (tmp_path / "paths.csv").write_text(text)
    with pytest.raises(CsvFormatError) as err:
        plot_command(tmp_path, "paths")
    assert err.value.row == row
    assert f"row {row}" in str(err.value)


def test_gamma1_paths_end_at_thresholds(tmp_path):
    cfg = ExperimentConfig(model="one_detector", p0=0.5, t_max=1e-12, n_paths=1000, seed=9,
                           preset="gamma_1", a=1.0, gamma=0.5e14)
    run_command(cfg, tmp_path)
    eps = json.loads((tmp_path / "summary.json").read_text())["epsilon"]
    svg = plot_command(tmp_path, "paths")
    lines = re.findall(r'<polyline [^>]*points="([^"]*)"', svg)
    assert len(lines) == 1000
    rows = read_csv(tmp_path / "paths.csv", PATHS_HEADER)
    finals = {}
    for i, _, p in rows:
        finals[int(i)] = p
    assert all(min(p, 1 - p) <= eps for p in finals.values())


def test_histogram_svg_counts_match_summary(tmp_path):
    run_command(gamma2(n_paths=300), tmp_path / "x")
    run_command(gamma2(n_paths=300, T=5e-9, seed=4), tmp_path / "y")
    svg = plot_command([tmp_path / "x", tmp_path / "y"], "histogram")
    for n, d in enumerate(("x", "y")):
        s = json.loads((tmp_path / d / "summary.json").read_text())
        for side in "RL":
            counts = re.findall(rf'data-series="{side}:{n}" data-count="(\d+)"', svg)
            assert sum(map(int, counts)) == s[f"n_converged_{side}"]


def test_svg_deterministic(tmp_path):
    run_command(gamma2(n_paths=50), tmp_path)
    for kind in ("paths", "histogram", "persistence"):
        assert plot_command(tmp_path, kind) == plot_command(tmp_path, kind)


def test_activation_styles(tmp_path):
    run_command(gamma2(n_paths=3), tmp_path / "off")
    run_command(gamma2(n_paths=3, T=5e-9), tmp_path / "on")
    svg = plot_command([tmp_path / "off", tmp_path / "on"], "paths")
    assert "no activation" in svg and "activation T=5 ns" in svg
    assert "t (ns)" in svg


def test_unknown_kind(tmp_path):
    with pytest.raises(ValueError):
        plot_command(tmp_path, "pie")


class TestCli:
    def write(self, tmp_path, cfg, name="c.cfg"):
        path = tmp_path / name
        path.write_text(emit_config(cfg))
        return str(path)

    def test_run_and_plot(self, tmp_path, capsys):
        conf = self.write(tmp_path, gamma2(n_paths=20))
        out = tmp_path / "out"
        assert cli.main(["run", conf, "-o", str(out)]) == 0
        assert "born_fraction_R" in capsys.readouterr().out
        for kind in ("paths", "histogram", "persistence"):
            assert cli.main(["plot", kind, str(out)]) == 0
            assert (out / f"{kind}.svg").read_text().startswith("<svg")
        assert cli.main(["plot", "paths", str(out), "-o", str(tmp_path / "p.svg")]) == 0
        assert (tmp_path / "p.svg").exists()

    def test_backends_agree(self, tmp_path):
        conf = self.write(tmp_path, gamma2(n_paths=20))
        outs = []
        for backend in sorted(cli.BACKENDS):
            out = tmp_path / backend
            assert cli.main(["run", conf, "-o", str(out), "--backend", backend, "--threads", "2"]) == 0
            outs.append(json.loads((out / "manifest.json").read_text()))
        assert all(m == outs[0] for m in outs)

    def test_bad_config(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("[run]\nmodel = one_detector\np0 = 1.5\nt_max = 1 ns\n")
        assert cli.main(["run", str(path), "-o", str(tmp_path / "o")]) == 1
        err = capsys.readouterr().err
        assert err.startswith("grwsim: error:") and "line 3" in err and "run.p0" in err

    def test_missing_file(self, tmp_path, capsys):
        assert cli.main(["run", str(tmp_path / "nope.cfg"), "-o", str(tmp_path)]) == 1
        assert "cannot read" in capsys.readouterr().err

    def test_presets(self, capsys):
        assert cli.main(["presets"]) == 0
        out = capsys.readouterr().out
        for name in ("gamma_micro", "gamma_1", "gamma_2"):
            assert name in out

    def test_equivalence(self, tmp_path, capsys):
        a = self.write(tmp_path, gamma2(n_paths=100, seed=1), "a.cfg")
        b = self.write(tmp_path, gamma2(n_paths=100, seed=2), "b.cfg")
        assert cli.main(["equivalence", a, b, "--t-star", "0.5 ns"]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["t_star"] == pytest.approx(5e-10)
        assert 0 <= result["ks_distance"] < 1
        assert cli.main(["equivalence", a, b, "--t-star", "1 s"]) == 1

    @pytest.mark.parametrize("text,value", [("0.5 ns", 5e-10), ("2ps", 2e-12), ("1e-9", 1e-9)])
    def test_time_argument(self, text, value):
        assert cli._time(text) == pytest.approx(value)
