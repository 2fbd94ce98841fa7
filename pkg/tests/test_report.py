import json
import math

import pytest

from gradedkms.report import (
    CheckRecord,
    Report,
    ReportIOError,
    dumps_report,
    emit_report,
    load_report,
    loads_report,
    render_summary,
)


@pytest.fixture
def report():
    return Report(
        tolerance=1e-9,
        records=[
            CheckRecord.measured("flow.invariance", 0.1, 1e-9, samples=4),
            CheckRecord.measured("algebra.parity", 1e-17, 1e-9),
            CheckRecord.skip("net"),
        ],
        observations={"gns": {"N": 4, "rank": 2.5}},
    )


class TestCheckRecord:
    def test_measured(self):
        record = CheckRecord.measured("a.b", 2e-10, 1e-9)

        assert record.passed
        assert not record.failed

    def test_tolerance_is_strict(self):
        assert not CheckRecord.measured("a.b", 1e-9, 1e-9).passed

    @pytest.mark.parametrize("residual", [math.inf, math.nan])
    def test_non_finite_fails(self, residual):
        assert CheckRecord.measured("a.b", residual, 1e-9).failed

    def test_skip_is_not_failure(self):
        record = CheckRecord.skip("net")

        assert record.skipped
        assert not record.passed
        assert not record.failed


class TestReport:
    def test_sorted(self, report):
        assert [r.name for r in report.records] == [
            "algebra.parity",
            "flow.invariance",
            "net",
        ]

    def test_add_keeps_order(self, report):
        report.add(CheckRecord.measured("aaa", 0.0, 1e-9))

        assert report.records[0].name == "aaa"

    def test_failed(self, report):
        assert not report.all_passed
        assert report.exit_code == 1

    def test_passed_with_skips(self):
        report = Report(
            records=[
                CheckRecord.measured("a", 0.0, 1e-9),
                CheckRecord.skip("b"),
            ]
        )

        assert report.all_passed
        assert report.exit_code == 0

    def test_record_lookup(self, report):
        assert report.record("net").skipped
        with pytest.raises(KeyError):
            report.record("missing")


class TestJson:
    def test_seventeen_digits(self, report):
        text = dumps_report(report)

        assert '"max_residual": 1.0000000000000001e-01' in text
        assert '"tolerance": 1.0000000000000001e-09' in text

    def test_pass_alias(self, report):
        data = json.loads(dumps_report(report))

        assert "pass" in data["records"][0]
        assert "passed" not in data["records"][0]

    def test_exact_floats(self, report):
        loaded = loads_report(dumps_report(report))

        assert loaded.record("algebra.parity").max_residual == 1e-17
        assert loaded.record("flow.invariance").passed is False
        assert loaded.record("net").max_residual is None
        assert loaded.observations == {"gns": {"N": 4, "rank": 2.5}}

    def test_infinity(self):
        report = Report(records=[CheckRecord.measured("a", math.inf, 1.0)])
        text = dumps_report(report)

        assert '"max_residual": Infinity' in text
        assert math.isinf(loads_report(text).records[0].max_residual)

    def test_emit_and_load(self, report, tmp_path):
        path = tmp_path / "report.json"
        emit_report(report, path)

        assert load_report(path).record("algebra.parity").passed

    def test_emit_to_missing_directory(self, report, tmp_path):
        with pytest.raises(ReportIOError):
            emit_report(report, tmp_path / "missing" / "report.json")

    def test_load_missing(self, tmp_path):
        with pytest.raises(ReportIOError):
            load_report(tmp_path / "report.json")


def test_render_summary(report):
    lines = render_summary(report).splitlines()

    assert lines[0].startswith("PASS algebra.parity")
    assert lines[1].startswith("FAIL flow.invariance")
    assert "1.000e-01" in lines[1]
    assert lines[2].startswith("SKIP net")
