from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from gradedkms.linalg import GradedKmsError

CHECK_ORDER: Tuple[str, ...] = (
    "algebra",
    "jordan",
    "flow",
    "gns",
    "prop1",
    "prop2",
    "prop3",
    "prop4",
    "net",
)
"""
Every check name in dependency order.
"""

PREREQUISITES: Dict[str, Tuple[str, ...]] = {
    "algebra": (),
    "jordan": ("algebra",),
    "flow": ("jordan",),
    "gns": ("flow",),
    "prop1": ("gns",),
    "prop2": ("prop1",),
    "prop3": ("prop2",),
    "prop4": ("flow",),
    "net": ("flow",),
}

CHAIN_ONLY = ("net",)
"""
Checks that need a chain of sites in the scenario.
"""


@dataclass
class CheckResolverConfig:
    requested: List[str] = field(default_factory=list)
    """
    Check names as given by the user. "all" expands to every check that
    applies to the scenario.
    """
    has_chain: bool = False
    """
    Whether the scenario carries a chain of sites.
    """


class CheckResolver:
    def __init__(self, config: CheckResolverConfig):
        """
        The constructor.
        """
        self.config = config

    def resolve(self) -> List[str]:
        """
        Returns the requested checks and their prerequisites in dependency
        order. Chain-only checks are dropped from "all" when the scenario
        has no chain, but kept when asked for by name.
        """
        wanted = set()
        for name in self.config.requested:
            if name == "all":
                wanted.update(
                    c
                    for c in CHECK_ORDER
                    if self.config.has_chain or c not in CHAIN_ONLY
                )
            elif name in PREREQUISITES:
                wanted.add(name)
            else:
                raise UnknownCheckError(name)

        pending = list(wanted)
        while pending:
            for dep in PREREQUISITES[pending.pop()]:
                if dep not in wanted:
                    wanted.add(dep)
                    pending.append(dep)
        return [name for name in CHECK_ORDER if name in wanted]


class CheckResolverError(GradedKmsError):
    """The base Exception class for CheckResolver class."""

    pass


class UnknownCheckError(CheckResolverError):
    """
    Raised when a check name is not known.
    """

    def __init__(self, name: str):
        self.name = name
        super().__init__(
            f"Unknown check: {name}\n"
            f"known checks: {', '.join(CHECK_ORDER)}, all\n"
        )
