import pytest

from gradedkms.runner import SuiteRunner, SuiteRunnerConfig
from gradedkms.scenarios import (
    generate_scenario,
    load_config,
    load_scenario,
    parse_config,
)
from gradedkms.suites.algebra import AlgebraSuite
from gradedkms.suites.jordan import JordanSuite


def run(scenario, checks, tolerance=1e-9):
    config = SuiteRunnerConfig(checks=checks, tolerance=tolerance)
    return SuiteRunner(config).run(scenario)


def suite_of(record) -> str:
    return record.name.split(".")[0]


class TestWorkedScenario:
    def test_prop2_passes(self, worked_scenario):
        report = run(worked_scenario, ["prop2"])

        assert report.all_passed
        assert {suite_of(r) for r in report.records} == {
            "algebra",
            "jordan",
            "flow",
            "gns",
            "prop1",
            "prop2",
        }
        assert not any(r.skipped for r in report.records)

    def test_observations(self, worked_scenario):
        report = run(worked_scenario, ["gns"])

        assert report.observations["gns"]["N"] == 4
        assert report.observations["gns"]["rank"] == 2
        assert report.observations["jordan"]["faithful"]

    def test_all_checks(self, worked_scenario):
        report = run(worked_scenario, ["all"])

        assert report.all_passed
        assert {suite_of(r) for r in report.records} >= {
            "prop1",
            "prop2",
            "prop3",
            "prop4",
        }

    def test_no_checks(self, worked_scenario):
        report = run(worked_scenario, [])

        assert report.records == []
        assert report.all_passed

    def test_suites_run_once(self, worked_scenario, mocker):
        algebra = mocker.spy(AlgebraSuite, "run")
        jordan = mocker.spy(JordanSuite, "run")
        run(worked_scenario, ["algebra", "jordan", "algebra"])

        assert algebra.call_count == 1
        assert jordan.call_count == 1

    def test_net_without_chain(self, worked_scenario):
        report = run(worked_scenario, ["net"])

        assert report.record("net").skipped
        assert report.all_passed

    def test_tolerance_recorded(self, worked_scenario):
        report = run(worked_scenario, ["algebra"], tolerance=1e-6)

        assert report.tolerance == 1e-6
        assert report.scenario["seed"] == 1


class TestMismatchedFlow:
    @pytest.fixture
    def scenario(self, fixture_path):
        return load_scenario(fixture_path("mismatched_flow.json"))

    def test_flow_fails(self, scenario):
        report = run(scenario, ["flow"])

        record = report.record("flow.graded_kms")
        assert record.failed
        assert record.max_residual > 1e-3
        assert report.exit_code == 1

    def test_dependents_skipped(self, scenario):
        report = run(scenario, ["prop3", "prop4"])

        for name in ("gns", "prop1", "prop2", "prop3", "prop4"):
            assert report.record(name).skipped
        assert report.record("jordan.decomposition").passed


def test_product_chain(fixture_path):
    config = load_config(fixture_path("product_chain.yml"))
    scenario = generate_scenario(config)
    report = run(scenario, ["net"])

    assert not report.record("net.restriction").failed
    assert not report.record("net.local_modulus").failed
    assert "discrepancy" in str(report.observations["net"])


@pytest.mark.parametrize("seed", range(25))
def test_seeded_supertrace_scenarios(seed):
    scenario = generate_scenario(parse_config({"seed": seed}))
    report = run(scenario, ["flow"])
    record = report.record("flow.graded_kms")

    assert len(scenario.random_samples) == 200
    assert record.passed
    assert record.max_residual < 1e-9
    assert report.all_passed
