import numpy as np
import pytest

from ptfigures import PanelSpec, SchemaError, load_sweep_table, load_trace_table, render
from ptfigures.cli import main

SWEEP_HEADER = (
    "j1,re_omega_plus_ground,im_omega_plus_ground,"
    "re_omega_minus_ground,im_omega_minus_ground,"
    "re_omega_plus_excited,im_omega_plus_excited,"
    "re_omega_minus_excited,im_omega_minus_excited,"
    "delta_omega_plus,delta_omega_minus"
)


def write_sweep_csv(path, rows=5):
    lines = [SWEEP_HEADER]
    for k in range(rows):
        j = k * 0.5
        lines.append(",".join(str(v) for v in
                              [j, 0.1 * j, -1.0, -0.1 * j, 1.0,
                               0.1 * j + 0.01, -1.0, -0.1 * j, 1.0,
                               0.01, -0.005]))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_trace_csv(path, branch, n=65):
    lines = ["omega,re_s21,im_s21,power,branch,near_singular"]
    for omega in np.linspace(-3, 3, n):
        s = 1.0 / (1.0 + 1j * omega)
        lines.append(f"{omega},{s.real},{s.imag},{abs(s) ** 2},{branch},0")
    path.write_text("\n".join(lines) + "\n")
    return path


class TestLoaders:
    def test_sweep_loads_named_columns(self, tmp_path):
        table = load_sweep_table(write_sweep_csv(tmp_path / "s.csv"))
        assert table["__axis__"] == "j1"
        assert len(table["delta_omega_plus"]) == 5

    def test_sweep_refuses_unknown_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("j1,delta_omega_plus,surprise\n0,0,0\n")
        with pytest.raises(SchemaError, match="surprise"):
            load_sweep_table(path)

    def test_sweep_requires_delta_columns(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("j1,re_omega_plus_ground,im_omega_plus_ground\n0,0,0\n")
        with pytest.raises(SchemaError, match="delta_omega"):
            load_sweep_table(path)

    def test_empty_file_is_schema_error(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(SchemaError, match="empty"):
            load_sweep_table(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_trace_table(tmp_path / "nope.csv")

    def test_trace_header_must_match_exactly(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("omega,re_s21,im_s21,power,branch\n0,1,0,1,ground\n")
        with pytest.raises(SchemaError, match="header"):
            load_trace_table(path)

    def test_trace_loads(self, tmp_path):
        table = load_trace_table(write_trace_csv(tmp_path / "g.csv", "ground"))
        assert table["branch"] == "ground"
        assert table["power"].max() == pytest.approx(1.0)


class TestRender:
    def test_sweep_panel_draws_one_curve_per_delta(self, tmp_path):
        csv = write_sweep_csv(tmp_path / "s.csv")
        out = tmp_path / "panel.png"
        result = render(PanelSpec(kind="delta-omega-sweep", inputs=(str(csv),),
                                  output=str(out)))
        assert out.exists() and out.stat().st_size > 0
        assert result.curves == 2
        assert result.labels == ("delta_omega_plus", "delta_omega_minus")

    def test_pair_panel_overlays_both_branches(self, tmp_path):
        g = write_trace_csv(tmp_path / "g.csv", "ground")
        e = write_trace_csv(tmp_path / "e.csv", "excited")
        out = tmp_path / "pair.png"
        result = render(PanelSpec(kind="transmission-pair",
                                  inputs=(str(g), str(e)), output=str(out)))
        assert out.exists()
        assert result.curves == 2
        assert set(result.labels) == {"ground", "excited"}

    def test_pair_requires_both_branches(self, tmp_path):
        g1 = write_trace_csv(tmp_path / "g1.csv", "ground")
        g2 = write_trace_csv(tmp_path / "g2.csv", "ground")
        with pytest.raises(SchemaError, match="ground and one excited"):
            render(PanelSpec(kind="transmission-pair",
                             inputs=(str(g1), str(g2)), output=str(tmp_path / "x.png")))

    def test_kind_validates_input_count(self, tmp_path):
        with pytest.raises(SchemaError, match="exactly"):
            PanelSpec(kind="transmission-pair", inputs=("only-one.csv",),
                      output="x.png")

    def test_unknown_kind(self):
        with pytest.raises(SchemaError):
            PanelSpec(kind="scatter", inputs=("a.csv",), output="x.png")

    def test_rendering_leaves_inputs_untouched(self, tmp_path):
        csv = write_sweep_csv(tmp_path / "s.csv")
        before = csv.read_bytes()
        render(PanelSpec(kind="delta-omega-sweep", inputs=(str(csv),),
                         output=str(tmp_path / "p.png")))
        assert csv.read_bytes() == before


class TestCli:
    def test_positional_mode(self, tmp_path, capsys):
        csv = write_sweep_csv(tmp_path / "s.csv")
        out = tmp_path / "p.png"
        code = main(["render", str(csv), "--kind", "delta-omega-sweep",
                     "--out", str(out)])
        assert code == 0
        assert "2 curve(s)" in capsys.readouterr().out
        assert out.exists()

    def test_spec_mode(self, tmp_path, capsys):
        g = write_trace_csv(tmp_path / "g.csv", "ground")
        e = write_trace_csv(tmp_path / "e.csv", "excited")
        spec = tmp_path / "panel.json"
        spec.write_text(
            '{"kind": "transmission-pair", "inputs": ["%s", "%s"], '
            '"output": "%s", "log_scale": false}' % (g, e, tmp_path / "p.png")
        )
        assert main(["render", "--spec", str(spec)]) == 0
        assert (tmp_path / "p.png").exists()

    def test_schema_error_exits_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("omega,who,knows\n0,0,0\n")
        code = main(["render", str(bad), "--kind", "delta-omega-sweep",
                     "--out", str(tmp_path / "p.png")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_args(self):
        assert main(["render"]) == 1
