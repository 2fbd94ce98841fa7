import logging
from dataclasses import dataclass, field
from typing import List

from gradedkms import settings
from gradedkms.report import CheckRecord, Report
from gradedkms.resolver import (
    CHAIN_ONLY,
    PREREQUISITES,
    CheckResolver,
    CheckResolverConfig,
)
from gradedkms.scenarios import Scenario
from gradedkms.suites import SUITES, SuiteContext

logger = logging.getLogger(__name__)


@dataclass
class SuiteRunnerConfig:
    checks: List[str] = field(default_factory=lambda: ["all"])
    """
    Check names, or "all". An empty list runs nothing.
    """
    tolerance: float = settings.DEFAULT_TOLERANCE
    """
    A record passes when its relative residual is below this value.
    """


class SuiteRunner:
    """
    A runner to run certification suites on a scenario.
    """

    def __init__(self, config: SuiteRunnerConfig):
        """
        The constructor.
        """
        self.config = config

    def run(self, scenario: Scenario) -> Report:
        """
        Runs the requested suites and their prerequisites in dependency
        order and returns the report.

        A suite whose prerequisite failed or was skipped is skipped
        itself, and so is a chain-only suite on a scenario without chain.

        An example:

        ```python
        from gradedkms.runner import SuiteRunner, SuiteRunnerConfig
        from gradedkms.scenarios import load_scenario

        scenario = load_scenario("tests/fixtures/worked_2x2.json")
        config = SuiteRunnerConfig(checks=["prop2"], tolerance=1e-9)
        report = SuiteRunner(config).run(scenario)
        print(report.all_passed)
        ```

        """
        resolver = CheckResolver(
            CheckResolverConfig(
                requested=list(self.config.checks),
                has_chain=scenario.net is not None,
            )
        )
        names = resolver.resolve()
        context = SuiteContext(
            scenario=scenario, tolerance=self.config.tolerance
        )
        report = Report(
            tolerance=self.config.tolerance,
            scenario=scenario.config.model_dump(mode="json"),
        )
        healthy = set()
        for name in names:
            blocked = [d for d in PREREQUISITES[name] if d not in healthy]
            if blocked or (name in CHAIN_ONLY and scenario.net is None):
                logger.info(f"{name}: skipped, blocked by {blocked}")
                report.add(CheckRecord.skip(name))
                continue
            logger.info(f"{name}: start")
            records = SUITES[name](context).run()
            for record in records:
                report.add(record)
            failed = [r.name for r in records if r.failed]
            if failed:
                logger.info(f"{name}: finished, failed {failed}")
            else:
                healthy.add(name)
                logger.info(f"{name}: finished, {len(records)} passed")
        report.observations = context.observations
        return report
