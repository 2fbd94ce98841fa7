from typing import Dict, Type

from gradedkms.suites.algebra import AlgebraSuite
from gradedkms.suites.base import CheckSuite, SuiteContext
from gradedkms.suites.flow import FlowSuite
from gradedkms.suites.gns import GnsSuite
from gradedkms.suites.jordan import JordanSuite
from gradedkms.suites.net import NetSuite
from gradedkms.suites.propositions import (
    ConjugateRepresentationSuite,
    ConjugationSuite,
    UnboundedKmsSuite,
    UniquenessSuite,
)

SUITES: Dict[str, Type[CheckSuite]] = {
    cls.name: cls
    for cls in (
        AlgebraSuite,
        JordanSuite,
        FlowSuite,
        GnsSuite,
        ConjugationSuite,
        ConjugateRepresentationSuite,
        UniquenessSuite,
        UnboundedKmsSuite,
        NetSuite,
    )
}
"""
Suite classes by check name.
"""

__all__ = ["SUITES", "CheckSuite", "SuiteContext"]
