import logging
import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from gradedkms import settings
from gradedkms.flow import ModularFlow
from gradedkms.gns import (
    AntilinearMap,
    CommutantProjections,
    ConjugateRepresentation,
    GnsSpace,
    SubspaceSplit,
)
from gradedkms.jordan import JordanData
from gradedkms.linalg import GradedKmsError, matrix_units
from gradedkms.report import CheckRecord
from gradedkms.scenarios import Scenario

Residual = Union[float, Dict[str, Optional[float]], None]
Check = Tuple[str, Callable[[], Residual], int]


@dataclass(eq=False)
class SuiteContext:
    """
    State shared by the suites of one run. Suites fill in the objects
    they build so that later suites can use them.
    """

    scenario: Scenario
    tolerance: float = settings.DEFAULT_TOLERANCE
    observations: dict = field(default_factory=dict)
    """
    Recorded, not asserted, measurements keyed by suite name.
    """
    jd: Optional[JordanData] = None
    flow: Optional[ModularFlow] = None
    gns: Optional[GnsSpace] = None
    proj: Optional[CommutantProjections] = None
    split: Optional[SubspaceSplit] = None
    J: Optional[AntilinearMap] = None
    conj: Optional[ConjugateRepresentation] = None

    @cached_property
    def units(self) -> List[np.ndarray]:
        return list(matrix_units(self.scenario.n))

    @property
    def elements(self) -> List[np.ndarray]:
        """ Matrix units followed by the seeded Gaussian elements. """
        return self.scenario.samples

    @cached_property
    def pairs(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """
        Pairs of matrix units, every one of them while there are at most
        ``PAIR_BUDGET``, followed by consecutive Gaussian elements.
        """
        units = self.units
        all_pairs = len(units) ** 2
        step = max(1, math.ceil(all_pairs / settings.PAIR_BUDGET))
        out = [
            (units[i // len(units)], units[i % len(units)])
            for i in range(0, all_pairs, step)
        ]
        randoms = self.scenario.random_samples
        out.extend(zip(randoms, randoms[1:]))
        return out

    @cached_property
    def gns_samples(self) -> List[np.ndarray]:
        """
        At most ``GNS_SAMPLE_BUDGET`` elements for checks that build an
        operator on the GNS space per element.
        """
        budget = settings.GNS_SAMPLE_BUDGET
        units = self.units
        randoms = self.scenario.random_samples
        if len(units) <= budget // 2:
            picked = units
        else:
            step = math.ceil(len(units) / (budget // 2))
            picked = units[::step]
        return picked + randoms[: budget - len(picked)]


class CheckSuite:
    """
    A base class for a group of checks.

    Subclasses set ``name``, build shared objects in ``setup()`` and list
    their checks in ``checks()``. A check returns a relative residual, a
    dict of named residuals, or None when it does not apply.
    """

    name = ""

    def __init__(self, context: SuiteContext):
        """
        The constructor.
        """
        self.context = context
        self.logger = logging.getLogger(f"gradedkms.suites.{self.name}")

    @property
    def scenario(self) -> Scenario:
        return self.context.scenario

    def setup(self):
        pass

    def checks(self) -> Iterable[Check]:
        raise NotImplementedError

    def observe(self, key: str, value):
        self.context.observations.setdefault(self.name, {})[key] = value

    def run(self) -> List[CheckRecord]:
        """
        Runs setup and every check. A GradedKmsError in setup yields a
        single failed ``<name>.setup`` record; in a check it fails that
        check only.
        """
        tolerance = self.context.tolerance
        start = time.perf_counter()
        try:
            self.setup()
        except GradedKmsError as e:
            self.logger.error(f"setup failed: {e}")
            self.observe("error", str(e))
            return [
                CheckRecord.measured(
                    f"{self.name}.setup",
                    math.inf,
                    tolerance,
                    seconds=time.perf_counter() - start,
                )
            ]

        records = []
        for check, fn, samples in self.checks():
            start = time.perf_counter()
            try:
                residual = fn()
            except GradedKmsError as e:
                self.logger.error(f"{check}: {e}")
                self.observe(f"{check}.error", str(e))
                residual = math.inf
            seconds = time.perf_counter() - start
            if isinstance(residual, dict):
                items = [
                    (f"{check}_{key}", value)
                    for key, value in residual.items()
                ]
            else:
                items = [(check, residual)]
            for record_name, value in items:
                full_name = f"{self.name}.{record_name}"
                if value is None:
                    records.append(CheckRecord.skip(full_name))
                    continue
                record = CheckRecord.measured(
                    full_name, value, tolerance, samples, seconds=seconds
                )
                self.logger.debug(
                    f"{full_name}: residual={record.max_residual:.3e}, "
                    f"pass={record.passed}"
                )
                records.append(record)
        return records
