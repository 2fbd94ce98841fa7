import math

import pytest

from gradedkms import settings
from gradedkms.linalg import GradedKmsError
from gradedkms.resolver import CHECK_ORDER
from gradedkms.scenarios import generate_scenario, parse_config
from gradedkms.suites import SUITES, CheckSuite, SuiteContext


class SampleSuite(CheckSuite):
    name = "sample"

    def checks(self):
        return [
            ("small", lambda: 1e-12, 3),
            ("large", lambda: 0.5, 3),
            ("parts", lambda: {"left": 0.0, "right": None}, 2),
            ("skipped", lambda: None, 0),
            ("raises", self.raises, 1),
        ]

    def raises(self):
        raise GradedKmsError("not applicable here")


class BrokenSetupSuite(SampleSuite):
    name = "broken"

    def setup(self):
        raise GradedKmsError("cannot build")


@pytest.fixture
def context(worked_scenario):
    return SuiteContext(scenario=worked_scenario, tolerance=1e-9)


class TestCheckSuite:
    def test_records(self, context):
        records = {r.name: r for r in SampleSuite(context).run()}

        assert sorted(records) == [
            "sample.large",
            "sample.parts_left",
            "sample.parts_right",
            "sample.raises",
            "sample.skipped",
            "sample.small",
        ]
        assert records["sample.small"].passed
        assert records["sample.small"].samples == 3
        assert records["sample.large"].failed
        assert records["sample.parts_left"].passed
        assert records["sample.parts_right"].skipped
        assert records["sample.skipped"].skipped

    def test_error_fails_one_check(self, context):
        records = {r.name: r for r in SampleSuite(context).run()}

        assert math.isinf(records["sample.raises"].max_residual)
        assert records["sample.raises"].failed
        assert "not applicable" in context.observations["sample"][
            "raises.error"
        ]

    def test_setup_error(self, context):
        records = BrokenSetupSuite(context).run()

        assert [r.name for r in records] == ["broken.setup"]
        assert records[0].failed
        assert context.observations["broken"]["error"] == "cannot build"

    def test_observe(self, context):
        suite = SampleSuite(context)
        suite.observe("key", 1)
        suite.observe("other", 2)

        assert context.observations == {"sample": {"key": 1, "other": 2}}


class TestSuiteContext:
    def test_worked_samples(self, context):
        assert len(context.units) == 4
        assert len(context.elements) == 4 + 40
        # 16 unit pairs and 39 consecutive random pairs
        assert len(context.pairs) == 16 + 39
        assert len(context.gns_samples) == settings.GNS_SAMPLE_BUDGET

    def test_large_algebra_budget(self):
        config = parse_config(
            {"seed": 0, "n_plus": 5, "n_minus": 4, "samples": 3}
        )
        context = SuiteContext(scenario=generate_scenario(config))

        unit_pairs = len(context.pairs) - 2
        assert unit_pairs <= settings.PAIR_BUDGET
        assert len(context.gns_samples) <= settings.GNS_SAMPLE_BUDGET


def test_every_check_has_a_suite():
    assert sorted(SUITES) == sorted(CHECK_ORDER)
