import json

import pytest
from hypothesis import given, strategies as st

from pathga.report import (
    ComparisonReport, FitnessReport, MethodSummary, ReportError, RunRecord, median_evaluations,
    stats_csv,
)


def sample_record(**over):
    data = dict(
        target=2, signature="T,F", mode="paper", method="ga", seed=0, covered=True,
        path_traversed=True, best_inputs={"wd_amt": 24000}, best_fitness=400.0, generations=2,
        evaluations=20, evaluations_to_coverage=13, thresholds=[0.3, 0.7, 1.0],
        final_fitness=[400.0, 0.9070294784580498, 0.1],
        histograms=[[9, 0, 1, 0], [8, 0, 1, 1]], best_mean=[[0.9, 0.1], [400.0, 40.2]],
    )
    data.update(over)
    return RunRecord(**data)


def test_reference_histogram_rows():
    values = [0.9070] * 38 + [0.5] + [0.2380] * 61
    report = FitnessReport.from_values(values)
    assert report.counts[:3] == [61, 1, 38]
    assert report.percentages[:3] == [61.0, 1.0, 38.0]
    text = report.render()
    assert "0 <= f < 0.3" in text and "61" in text


def test_empty_population_is_an_error():
    with pytest.raises(ReportError):
        FitnessReport.from_values([])


def test_all_exact_hits_land_in_overflow():
    report = FitnessReport.from_values([400.0] * 7)
    assert report.counts == [0, 0, 0, 7] and report.percentages[-1] == 100.0


@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=200))
def test_percentages_sum_to_100(values):
    report = FitnessReport.from_values(values)
    assert sum(report.counts) == len(values)
    assert sum(report.percentages) == pytest.approx(100.0)


def test_report_from_record_sources():
    rec = sample_record()
    assert FitnessReport.from_record(rec).counts == [1, 0, 1, 1]
    assert FitnessReport.from_record(rec, "all_generations").counts == [17, 0, 2, 1]
    with pytest.raises(ReportError):
        FitnessReport.from_record(rec, "best")


def test_record_json_round_trip():
    rec = sample_record()
    text = rec.to_json()
    assert RunRecord.from_json(text) == rec
    assert json.loads(text) == rec.to_dict()
    assert text == RunRecord.from_json(text).to_json()
    assert list(json.loads(text)) == sorted(json.loads(text))


@pytest.mark.parametrize("text", ["not json", "[1, 2]", '{"target": 1}'])
def test_malformed_record(text):
    with pytest.raises(ReportError):
        RunRecord.from_json(text)


def test_stats_csv():
    lines = stats_csv(sample_record()).splitlines()
    assert lines[0].startswith("generation,best_fitness,mean_fitness,")
    assert lines[2] == "1,400.0,40.2,8,0,1,1"


def test_median_evaluations():
    assert median_evaluations([10, 30, 20]) == 20.0
    assert median_evaluations([None, None, 5]) is None
    assert median_evaluations([None, 5, 7]) == 7.0


def test_comparison_round_trip():
    ga = MethodSummary("ga", 2, 2, 1.0, 150.0, [100, 200], [400.0, 400.0])
    rnd = MethodSummary("random", 2, 1, 0.5, None, [300, None], [400.0, 0.1])
    cmp_ = ComparisonReport(2, 1000, [0, 1], ga, rnd, 0.03)
    assert ComparisonReport.from_dict(json.loads(json.dumps(cmp_.to_dict()))) == cmp_
    assert cmp_.random_median == float("inf") and cmp_.ga_median == 150.0
    assert "inf" in cmp_.render()
