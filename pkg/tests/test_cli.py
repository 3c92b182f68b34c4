import numpy as np
import pytest

from groupweights.cli import main, scenarios_from_config
from groupweights.formats import ANALYZE_COLUMNS, SWEEP_COLUMNS, read_analysis, read_config, read_table
from groupweights.numstats import make_rng, pvalue_normal_two_sided, sample_mixture
from groupweights.testing import weighted_reject


def write_input(path, rows, header="id\tstat\tgroup"):
    path.write_text("# test input\n" + header + "\n" + "".join(f"{a}\t{b}\t{c}\n" for a, b, c in rows))
    return path


@pytest.fixture
def null_file(tmp_path):
    values = np.linspace(-1.0, 1.0, 10)
    rows = [(f"t{g}{i}", repr(float(v)), f"G{g}") for g in (1, 2) for i, v in enumerate(values)]
    return write_input(tmp_path / "null.tsv", rows)


@pytest.fixture
def signal_file(tmp_path):
    rng = make_rng(21, 0)
    rows = []
    for g in range(6):
        x = sample_mixture(300, 0.5 if g == 0 else 0.0, 3.0, "normal", rng)
        rows += [(f"s{g}_{i}", repr(float(v)), f"grp{g}") for i, v in enumerate(x)]
    return write_input(tmp_path / "signal.tsv", rows)


def test_analyze_null_file_gives_bonferroni(null_file, tmp_path):
    out = tmp_path / "out.tsv"
    assert main(["analyze", str(null_file), "--output", str(out)]) == 0
    rows = read_analysis(out)
    assert len(rows) == 20
    assert all(r["weight"] == 1.0 for r in rows)
    p = np.array([r["p_value"] for r in rows])
    assert [r["rejected"] for r in rows] == list(p <= 0.05 / 20)
    assert read_table(out, ANALYZE_COLUMNS)  # header row is self-describing


def test_analyze_signal_file_budget_from_output(signal_file, tmp_path):
    out = tmp_path / "out.tsv"
    assert main(["analyze", str(signal_file), "-o", str(out), "--alpha", "0.05"]) == 0
    rows = read_analysis(out)
    weights = np.array([r["weight"] for r in rows])
    assert weights.sum() == pytest.approx(len(rows), rel=1e-9)
    by_group = {r["group"]: r["weight"] for r in rows}
    assert by_group["grp0"] > 1
    text = out.read_text()
    for key in ("# m = 1800", "# K = 6", "# c = ", "# b_m = ", "#grp0\t300\t"):
        assert key in text


def test_analyze_round_trip_matches_weighted_reject(signal_file, tmp_path):
    out = tmp_path / "out.tsv"
    main(["analyze", str(signal_file), "-o", str(out)])
    rows = read_analysis(out)
    p = pvalue_normal_two_sided(np.array([r["stat"] for r in rows]))
    w = np.array([r["weight"] for r in rows])
    assert np.array_equal(p, [r["p_value"] for r in rows])
    res = weighted_reject(p, w, 0.05)
    assert list(res.rejected) == [r["rejected"] for r in rows]
    assert list(res.thresholds) == [r["threshold"] for r in rows]


def test_analyze_malformed_group(tmp_path, capsys):
    path = write_input(tmp_path / "bad.tsv", [("a", "0.1", "G1"), ("b", "0.2", "G?")])
    assert main(["analyze", str(path)]) == 2
    assert "bad.tsv:4" in capsys.readouterr().err


@pytest.mark.parametrize("rows", [[("a", "x", "G1")], [("a", "nan", "G1")], [("a", "1", "G1"), ("a", "2", "G1")]])
def test_analyze_parse_errors(tmp_path, rows):
    assert main(["analyze", str(write_input(tmp_path / "bad.tsv", rows))]) == 2


def test_pvalue_only_input_rejected(tmp_path, capsys):
    path = write_input(tmp_path / "p.tsv", [("a", "0.01", "G1")], header="id\tp_value\tgroup")
    assert main(["analyze", str(path)]) == 2
    assert "stat" in capsys.readouterr().err


def test_analyze_undersized_group(null_file, capsys):
    assert main(["analyze", str(null_file), "--min-group-size", "11"]) == 3
    assert "'G1'" in capsys.readouterr().err


def test_weight_table(signal_file, capsys):
    assert main(["weight-table", str(signal_file)]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert lines[0].split("\t")[0] == "group"
    assert len(lines) == 7


def test_analyze_config_and_flag_override(signal_file, tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("alpha = 0.01\nlambda = 0.9  # smoothing\n")
    out = tmp_path / "o.tsv"
    assert main(["analyze", str(signal_file), "--config", str(cfg), "--alpha", "0.1", "-o", str(out)]) == 0
    assert "# alpha = 0.1\n" in out.read_text()
    assert "# lambda = 0.9\n" in out.read_text()
    cfg.write_text("bogus = 1\n")
    assert main(["analyze", str(signal_file), "--config", str(cfg)]) == 3


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["figure", "fig9"]) == 1
    assert main(["analyze", "/nonexistent/file.tsv"]) == 1


def test_simulate_smallest_run_and_determinism(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("p0 = 0.01, 0.5\nreplicates = 1\nseed = 42\n")
    out1, out2 = tmp_path / "1.tsv", tmp_path / "2.tsv"
    assert main(["simulate", "--config", str(cfg), "-o", str(out1)]) == 0
    assert main(["simulate", "--config", str(cfg), "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    rows = read_table(out1, SWEEP_COLUMNS)
    assert [r["p0"] for _, r in rows] == ["0.01", "0.5"]
    assert all(r["se"] == "0.5" and r["replicates"] == "1" and r["master_seed"] == "42" for _, r in rows)


@pytest.mark.parametrize("text, field", [("p0 = 1.2\n", "p0"), ("m1 = 33\n", "m1"), ("replicates = x\n", "replicates"),
                                         ("colour = red\n", "colour")])
def test_simulate_invalid_field(tmp_path, capsys, text, field):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(text)
    assert main(["simulate", "--config", str(cfg)]) == 3
    assert field in capsys.readouterr().err


def test_config_parse_error(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("p0 0.1\n")
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_scenarios_cartesian_order():
    sc = scenarios_from_config({"p0": "0.1, 0.2", "p1": "0, 0.5", "replicates": "3"}, {"master_seed": 7})
    assert [(s.p0, s.p1) for s in sc] == [(0.1, 0.0), (0.1, 0.5), (0.2, 0.0), (0.2, 0.5)]
    assert all(s.master_seed == 7 and s.replicates == 3 for s in sc)


def _figure(capsys, *args):
    assert main(["figure", *args]) == 0
    lines = capsys.readouterr().out.splitlines()
    body = [l.split("\t") for l in lines if not l.startswith("#")]
    return body[0], body[1:]


def test_fig1_range(capsys):
    header, rows = _figure(capsys, "fig1")
    assert header == ["xi", "weight"]
    w = np.array([float(r[1]) for r in rows])
    assert len(rows) == 5000
    assert np.all((w >= 0) & (w <= 100000 / 0.05))


def test_fig2_bonferroni_line(capsys):
    header, rows = _figure(capsys, "fig2")
    assert header == ["series", "xi", "threshold"]
    bonf = [float(r[2]) for r in rows if r[0] == "bonferroni"]
    assert len(bonf) == 2
    assert bonf[0] == pytest.approx(6.30103, abs=1e-5)


def test_fig3_columns(capsys):
    header, rows = _figure(capsys, "fig3")
    assert header == ["xi_hat", "variance", "relative_weight"]
    rel = np.array([float(r[2]) for r in rows])
    assert rel.max() == 1.0 and rel.min() >= 0


def test_fig4_symbols(capsys):
    header, rows = _figure(capsys, "fig4", "--replicates", "2")
    assert header[:3] == ["r_squared", "diff_pct_points", "symbol"]
    for r in rows:
        p0, p1, symbol = float(r[3]), float(r[4]), r[2]
        if p0 == 0.5:
            assert symbol == "+"
        elif p1 > 0.1:
            assert symbol == "*"
        else:
            assert symbol == "o"


def test_read_config_lists(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\n\np0 = 0.01, 0.1\nmodel=chisq\n")
    assert read_config(cfg) == {"p0": "0.01, 0.1", "model": "chisq"}
