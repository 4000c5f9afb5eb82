import json
import xml.etree.ElementTree as ET

import pytest

from censorbias.cli import main
from censorbias.dataset import DatasetMapping, read_csv, write_csv
from censorbias.experiment import ExperimentTable
from conftest import make_dataset

MAPPING = DatasetMapping(time_column="time", status_column="status",
                         event_value="1")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


class TestSimulate:
    def test_complete_dataset(self, capsys, tmp_path):
        out = tmp_path / "d.csv"
        info = run_json(capsys, "simulate", "--n-cases", "10", "--median",
                        "25", "--cure-rate", "0.4", "--mechanism", "none",
                        "--seed", "7", "--out", str(out))
        assert info["command"] == "simulate"
        assert info["n"] == 10
        assert info["n_events"] == 6
        assert info["label"] == "Uncensored"
        data = read_csv(out, MAPPING)
        assert data.n == 10
        assert int(data.statuses.sum()) == 6

    def test_mechanism_label_and_fraction(self, capsys, tmp_path):
        out = tmp_path / "d.csv"
        info = run_json(capsys, "simulate", "--n-cases", "200", "--median",
                        "25", "--mechanism", "time", "--p-censoring", "0.5",
                        "--seed", "7", "--out", str(out))
        assert info["label"] == "Time censoring 50 %"
        assert 0.3 < info["censored_fraction"] < 0.7

    def test_case_p_zero_matches_complete_content(self, capsys, tmp_path):
        plain = tmp_path / "plain.csv"
        cased = tmp_path / "cased.csv"
        run_json(capsys, "simulate", "--n-cases", "30", "--median", "25",
                 "--mechanism", "none", "--seed", "3", "--out", str(plain))
        run_json(capsys, "simulate", "--n-cases", "30", "--median", "25",
                 "--mechanism", "case", "--p-censoring", "0", "--seed", "3",
                 "--out", str(cased))
        a = read_csv(plain, MAPPING)
        b = read_csv(cased, MAPPING)
        assert a.times.tolist() == b.times.tolist()
        assert a.statuses.tolist() == b.statuses.tolist()

    def test_deterministic(self, capsys, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (p1, p2):
            run_json(capsys, "simulate", "--n-cases", "50", "--median", "25",
                     "--mechanism", "interim", "--p-censoring", "0.3",
                     "--seed", "11", "--out", str(p))
        assert p1.read_text() == p2.read_text()

    def test_bad_median_is_cli_error(self, capsys, tmp_path):
        code, _, err = run(capsys, "simulate", "--n-cases", "10", "--median",
                           "0", "--mechanism", "none", "--out",
                           str(tmp_path / "x.csv"))
        assert code == 1
        assert err.startswith("error:")


class TestExperiment:
    def test_preset_summary(self, capsys, tmp_path):
        out = tmp_path / "e.csv"
        info = run_json(capsys, "experiment", "--preset", "1", "--trials",
                        "4", "--seed", "5", "--out", str(out))
        assert info["trials"] == 4
        assert info["rows"] == 12
        assert set(info["indexes"]) == {"SQBI", "UMBI", "SABI"}
        table = ExperimentTable.read_csv(out)
        assert len(table.rows) == 12

    def test_same_seed_same_bytes(self, capsys, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            run_json(capsys, "experiment", "--preset", "2", "--trials", "3",
                     "--seed", "9", "--out", str(p))
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_explicit_samplers(self, capsys, tmp_path):
        out = tmp_path / "e.csv"
        info = run_json(capsys, "experiment", "--trials", "2", "--median",
                        "20:40", "--cure-rate", "0.1", "--n-cases", "80",
                        "--seed", "2", "--out", str(out))
        assert info["rows"] == 6

    def test_preset_excludes_explicit_flags(self, capsys, tmp_path):
        code, _, err = run(capsys, "experiment", "--preset", "1", "--median",
                           "5:50", "--trials", "2", "--out",
                           str(tmp_path / "x.csv"))
        assert code == 1
        assert err.startswith("error:")


class TestAudit:
    def test_builtin_veteran_rows(self, capsys):
        code, out, _ = run(capsys, "audit", "--builtin", "veteran")
        assert code == 0
        text, payload = out.rsplit("\n{", 1)
        info = json.loads("{" + payload)
        lines = text.strip().splitlines()
        assert lines[0] == "trial,n,pCens,SQBI,SABI,flag,reference"
        assert lines[1].startswith(
            "Veterans' Administration Lung Cancer Study,137,0.07,1.5,1.4,"
            "SQBI+SABI,")
        assert any(l.startswith("standard,69,0.07,1.8,0.8,SQBI,")
                   for l in lines)
        assert any(l.startswith("test,68,0.06,1.8,2,SQBI+SABI,")
                   for l in lines)
        assert info["rows"] == 3
        assert info["flagged"] == 3

    def test_builtin_all_row_count(self, capsys):
        code, out, _ = run(capsys, "audit", "--builtin", "all")
        assert code == 0
        text, _ = out.rsplit("\n{", 1)
        assert len(text.strip().splitlines()) == 1 + 19

    def test_out_file_matches_stdout_table(self, capsys, tmp_path):
        path = tmp_path / "audit.csv"
        code, out, _ = run(capsys, "audit", "--builtin", "aml", "--out",
                           str(path))
        assert code == 0
        text, _ = out.rsplit("\n{", 1)
        assert path.read_text() == text + "\n"

    def test_custom_csv_input(self, capsys, tmp_path):
        src = tmp_path / "src.csv"
        data = make_dataset([10, 20, 30, 40, 5, 15], [1, 1, 1, 1, 0, 0],
                            group="g", name="mystudy")
        write_csv(data, src)
        code, out, _ = run(capsys, "audit", "--input", str(src))
        assert code == 0
        text, _ = out.rsplit("\n{", 1)
        assert text.strip().splitlines()[1].startswith("src,6,")

    def test_group_column_adds_arm_rows(self, capsys, tmp_path):
        src = tmp_path / "src.csv"
        times = [10, 20, 30, 40, 5, 15, 12, 22, 32, 42, 7, 17]
        statuses = [1, 1, 1, 1, 0, 0, 1, 1, 1, 1, 0, 0]
        groups = ["a"] * 6 + ["b"] * 6
        rows = ["time,status,arm"]
        rows += [f"{t},{s},{g}" for t, s, g in zip(times, statuses, groups)]
        src.write_text("\n".join(rows) + "\n")
        code, out, _ = run(capsys, "audit", "--input", str(src),
                           "--group-col", "arm")
        assert code == 0
        text, _ = out.rsplit("\n{", 1)
        lines = text.strip().splitlines()
        assert len(lines) == 1 + 3  # whole study + two arms
        assert lines[2].startswith("src a,6,")
        assert lines[3].startswith("src b,6,")

    def test_requires_exactly_one_source(self, capsys, tmp_path):
        code, _, err = run(capsys, "audit")
        assert code == 1 and err.startswith("error:")
        code, _, err = run(capsys, "audit", "--builtin", "aml", "--input",
                           str(tmp_path / "x.csv"))
        assert code == 1 and err.startswith("error:")

    def test_missing_column_is_cli_error(self, capsys, tmp_path):
        src = tmp_path / "src.csv"
        src.write_text("a,b\n1,2\n")
        code, _, err = run(capsys, "audit", "--input", str(src))
        assert code == 1 and err.startswith("error:")


class TestRoc:
    def test_generic_perfect_split(self, capsys, tmp_path):
        src = tmp_path / "scores.csv"
        src.write_text("score,truth\n0.1,n\n0.2,n\n0.8,y\n0.9,y\n")
        info = run_json(capsys, "roc", "--input", str(src), "--score-col",
                        "score", "--label-col", "truth", "--positive-value",
                        "y")
        assert info["auc"] == 1.0
        assert info["cutoff"] == 0.8
        assert info["sensitivity"] == 1.0
        assert info["specificity"] == 1.0

    def test_table_mode_raw_rescales_cutoff(self, capsys, tmp_path):
        table = tmp_path / "t.csv"
        run_json(capsys, "experiment", "--preset", "1", "--trials", "12",
                 "--seed", "5", "--out", str(table))
        scaled = run_json(capsys, "roc", "--table", str(table), "--index",
                          "SQBI")
        raw = run_json(capsys, "roc", "--table", str(table), "--index",
                       "SQBI", "--raw")
        assert raw["auc"] == pytest.approx(scaled["auc"], rel=1e-12)
        assert raw["cutoff"] == pytest.approx(1.2 * scaled["cutoff"],
                                              rel=1e-12)

    def test_modes_are_exclusive(self, capsys, tmp_path):
        code, _, err = run(capsys, "roc", "--index", "SQBI")
        assert code == 1 and err.startswith("error:")


class TestPlotCommand:
    def test_km_from_csv(self, capsys, tmp_path):
        src = tmp_path / "d.csv"
        write_csv(make_dataset([1, 2, 3, 4], [1, 1, 0, 1]), src)
        out = tmp_path / "p.svg"
        info = run_json(capsys, "plot", "--kind", "km", "--input", str(src),
                        "--out", str(out))
        assert info["out"] == str(out)
        svg = out.read_text()
        ET.fromstring(svg)
        assert svg.count('class="km-step"') == 1

    def test_km_splits_groups(self, capsys, tmp_path):
        src = tmp_path / "d.csv"
        src.write_text("time,status,x\n1,1,a\n2,1,a\n3,1,b\n4,0,b\n")
        out = tmp_path / "p.svg"
        run_json(capsys, "plot", "--kind", "km", "--input", str(src),
                 "--out", str(out))
        assert out.read_text().count('class="km-step"') == 2

    def test_trial_needs_two_groups(self, capsys, tmp_path):
        src = tmp_path / "d.csv"
        write_csv(make_dataset([1, 2, 3], [1, 1, 1]), src)
        code, _, err = run(capsys, "plot", "--kind", "trial", "--input",
                           str(src), "--out", str(tmp_path / "p.svg"))
        assert code == 1 and err.startswith("error:")

    def test_bias_scatter_requires_index(self, capsys, tmp_path):
        table = tmp_path / "t.csv"
        run_json(capsys, "experiment", "--preset", "1", "--trials", "8",
                 "--seed", "5", "--out", str(table))
        code, _, err = run(capsys, "plot", "--kind", "bias_scatter",
                           "--table", str(table), "--out",
                           str(tmp_path / "p.svg"))
        assert code == 1 and err.startswith("error:")
        out = tmp_path / "p2.svg"
        run_json(capsys, "plot", "--kind", "bias_scatter", "--table",
                 str(table), "--index", "SQBI", "--out", str(out))
        assert "cutoff-line" in out.read_text()

    def test_censor_scatter(self, capsys, tmp_path):
        table = tmp_path / "t.csv"
        run_json(capsys, "experiment", "--preset", "1", "--trials", "8",
                 "--seed", "5", "--out", str(table))
        out = tmp_path / "p.svg"
        run_json(capsys, "plot", "--kind", "censor_scatter", "--table",
                 str(table), "--out", str(out))
        assert "r = " in out.read_text()


class TestFigures:
    def test_produces_all_outputs(self, capsys, tmp_path):
        outdir = tmp_path / "figs"
        info = run_json(capsys, "figures", "--out-dir", str(outdir),
                        "--trials", "8", "--seed", "5", "--workers", "2")
        expected = {f"fig{i}.svg" for i in range(1, 6)}
        expected |= {f"experiment{i}.csv" for i in range(1, 6)}
        expected.add("table1.csv")
        names = {p.name for p in outdir.iterdir()}
        assert expected <= names
        assert len(info["files"]) == len(expected)
        for i in range(1, 6):
            ET.fromstring((outdir / f"fig{i}.svg").read_text())
        fig1 = (outdir / "fig1.svg").read_text()
        assert fig1.count("<g transform=") == 12
        assert "r = " in (outdir / "fig2.svg").read_text()

    def test_table1_matches_audit_output(self, capsys, tmp_path):
        outdir = tmp_path / "figs"
        run_json(capsys, "figures", "--out-dir", str(outdir), "--trials",
                 "4", "--seed", "5", "--workers", "2")
        code, out, _ = run(capsys, "audit", "--builtin", "all")
        assert code == 0
        text, _ = out.rsplit("\n{", 1)
        assert (outdir / "table1.csv").read_text() == text + "\n"


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_unknown_command_is_argparse_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_missing_file_reports_error(capsys, tmp_path):
    code, _, err = run(capsys, "plot", "--kind", "km", "--input",
                       str(tmp_path / "nope.csv"), "--out",
                       str(tmp_path / "p.svg"))
    assert code == 1 and err.startswith("error:")
