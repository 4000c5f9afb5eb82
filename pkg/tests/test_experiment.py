import numpy as np
import pytest

from censorbias.errors import DomainError
from censorbias.experiment import (ExperimentSpec, ExperimentTable, Fixed,
                                   TrialResult, Uniform,
                                   case_censoring_correlation, parse_sampler,
                                   preset_experiment, run_experiment,
                                   trial_results)
from censorbias.simulate import CureModelSpec, RngHandle, complete_follow_up
from conftest import make_dataset


class TestSamplers:
    def test_fixed_draws_nothing(self):
        gen = RngHandle(1, 0).generator()
        before = gen.bit_generator.state["state"]["counter"].copy()
        assert Fixed(25.0).sample(gen) == 25.0
        assert np.array_equal(gen.bit_generator.state["state"]["counter"],
                              before)

    def test_uniform(self):
        gen = RngHandle(1, 0).generator()
        vals = [Uniform(5.0, 50.0).sample(gen) for _ in range(200)]
        assert all(5.0 < v < 50.0 for v in vals)

    def test_uniform_validates(self):
        with pytest.raises(DomainError):
            Uniform(5.0, 5.0)
        with pytest.raises(DomainError):
            Uniform(9.0, 5.0)

    @pytest.mark.parametrize("text,expect", [
        ("25", Fixed(25.0)),
        ("0.5", Fixed(0.5)),
        ("5:50", Uniform(5.0, 50.0)),
        ("0.05:0.95", Uniform(0.05, 0.95)),
    ])
    def test_parse(self, text, expect):
        assert parse_sampler(text) == expect

    @pytest.mark.parametrize("text", ["", "abc", "5:", ":5", "9:5", "1:2:3"])
    def test_parse_rejects(self, text):
        with pytest.raises(DomainError):
            parse_sampler(text)


class TestPresets:
    def test_preset_definitions(self):
        spec1 = preset_experiment(1, n_trials=10)
        assert spec1.median == Uniform(5.0, 50.0)
        assert spec1.cure_rate == Fixed(0.0)
        assert spec1.n_cases == Fixed(1000)
        assert spec1.p_censoring == Uniform(0.05, 0.95)
        spec4 = preset_experiment(4, n_trials=10)
        assert spec4.median == Uniform(50.0, 95.0)
        assert spec4.cure_rate == Fixed(0.5)
        spec5 = preset_experiment(5, n_trials=10)
        assert spec5.median == Uniform(5.0, 95.0)
        assert spec5.cure_rate == Uniform(0.0, 0.8)

    @pytest.mark.parametrize("bad", [0, 6, -1])
    def test_unknown_preset(self, bad):
        with pytest.raises(DomainError):
            preset_experiment(bad, n_trials=10)

    def test_trials_validated(self):
        with pytest.raises(DomainError):
            ExperimentSpec(n_trials=0)


class TestRun:
    def test_row_layout(self):
        table = run_experiment(ExperimentSpec(n_trials=2, master_seed=5))
        assert len(table.rows) == 6
        assert [r.mechanism for r in table.rows] == ["time", "interim",
                                                     "case"] * 2

    def test_deterministic(self):
        spec = ExperimentSpec(n_trials=5, master_seed=42)
        assert run_experiment(spec).rows == run_experiment(spec).rows

    def test_parallel_equals_serial(self):
        spec = preset_experiment(5, n_trials=12, master_seed=3)
        serial = run_experiment(spec)
        parallel = run_experiment(spec, n_workers=3)
        assert serial.rows == parallel.rows

    def test_seed_changes_rows(self):
        rows_a = run_experiment(ExperimentSpec(n_trials=3, master_seed=1)).rows
        rows_b = run_experiment(ExperimentSpec(n_trials=3, master_seed=2)).rows
        assert rows_a != rows_b

    def test_row_content(self):
        table = run_experiment(ExperimentSpec(n_trials=2, master_seed=5))
        for r in table.rows:
            assert r.n_cases == 1000
            assert r.p_censored is not None and 0 <= r.p_censored <= 1
            assert r.hr is None or r.hr > 0
            assert r.p_value is None or 0 <= r.p_value <= 1


class TestTrialResults:
    def test_matches_direct_computation(self):
        from censorbias.bias import sabi, sqbi, umbi
        from censorbias.estimate import cox_two_group
        from censorbias.simulate import time_censoring

        spec = CureModelSpec(400, 25.0, 100.0)
        g0 = complete_follow_up(spec, RngHandle(31, 1))
        g1 = time_censoring(g0, 25.0, 100.0, 0.4, RngHandle(31, 2))
        row = trial_results(g0, g1, "time")
        assert row.mechanism == "time"
        assert row.n_cases == 400
        last_event = float(g1.event_times.max())
        inside = g1.times < last_event
        assert row.p_censored == pytest.approx(
            float(np.mean(g1.statuses[inside] == 0)))
        assert row.p_long_term == pytest.approx(
            1.0 - float(inside.sum()) / len(g1))
        fit = cox_two_group(g0, g1)
        assert row.hr == pytest.approx(fit.hr)
        assert row.p_value == pytest.approx(fit.p_value)
        assert row.sqbi == pytest.approx(sqbi(g1))
        assert row.umbi == pytest.approx(umbi(g1))
        assert row.sabi == pytest.approx(sabi(g1))

    def test_requires_events(self):
        from censorbias.errors import NoEventsError
        g0 = make_dataset([1, 2, 3], [1, 1, 1], group="a")
        g1 = make_dataset([1, 2, 3], [0, 0, 0], group="b")
        with pytest.raises(NoEventsError):
            trial_results(g0, g1, "time")


class TestCsv:
    HEADER = "type,nCases,pCensored,pCured,hr,pValue,SQBI,UMBI,SABI"

    def test_header_and_roundtrip(self, tmp_path):
        table = run_experiment(ExperimentSpec(n_trials=3, master_seed=9))
        path = tmp_path / "t.csv"
        table.write_csv(path)
        text = path.read_text()
        assert text.splitlines()[0] == self.HEADER
        back = ExperimentTable.read_csv(path)
        assert back.rows == table.rows

    def test_byte_identical_reruns(self, tmp_path):
        spec = preset_experiment(2, n_trials=4, master_seed=6)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        run_experiment(spec).write_csv(p1)
        run_experiment(spec).write_csv(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_none_becomes_empty_cell(self, tmp_path):
        row = TrialResult("time", 10, None, None, None, None, None, None,
                          None)
        table = ExperimentTable(rows=(row,))
        path = tmp_path / "n.csv"
        table.write_csv(path)
        assert path.read_text().splitlines()[1] == "time,10,,,,,,,"
        assert ExperimentTable.read_csv(path).rows == (row,)

    def test_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(DomainError):
            ExperimentTable.read_csv(path)

    def test_rejects_unknown_mechanism(self, tmp_path):
        path = tmp_path / "bad2.csv"
        path.write_text(self.HEADER + "\nweird,10,,,,,,,\n")
        with pytest.raises(DomainError):
            ExperimentTable.read_csv(path)


def _case_table(pairs):
    rows = tuple(TrialResult("case", 100, p, 0.0, hr, 0.5, None, None, None)
                 for p, hr in pairs)
    return ExperimentTable(rows=rows)


class TestCorrelation:
    def test_perfect_negative_line(self):
        table = _case_table([(0.1, 1.0), (0.5, 0.6), (0.9, 0.2)])
        line = case_censoring_correlation(table)
        assert line.r == pytest.approx(-1.0)
        assert line.slope == pytest.approx(-1.0)
        assert line.intercept == pytest.approx(1.1)

    def test_ignores_other_mechanisms(self):
        rows = _case_table([(0.1, 1.0), (0.5, 0.6), (0.9, 0.2)]).rows
        noise = (TrialResult("time", 100, 0.5, 0.0, 5.0, 0.5, None, None,
                             None),)
        line = case_censoring_correlation(ExperimentTable(rows=rows + noise))
        assert line.r == pytest.approx(-1.0)

    def test_needs_three_case_rows(self):
        with pytest.raises(DomainError):
            case_censoring_correlation(_case_table([(0.1, 1.0), (0.5, 0.6)]))

    def test_zero_variance(self):
        with pytest.raises(DomainError):
            case_censoring_correlation(
                _case_table([(0.5, 1.0), (0.5, 0.6), (0.5, 0.2)]))

    def test_counts(self):
        rows = (TrialResult("time", 10, 0.5, 0.0, None, None, 1.0, 1.0, 1.0),
                TrialResult("case", 10, None, None, None, None, None, None,
                            None))
        table = ExperimentTable(rows=rows)
        assert table.n_nonconvergent == 1
        assert table.n_no_events == 1
