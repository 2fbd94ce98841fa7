"""
Scenario configuration, generation and scenario files.

A scenario is a graded algebra, an even positive definite density ``rho``
(the supertrace functional is ``omega = tr( . g rho)``), an optional density
for the dynamics, an optional chain of sites, and seeded sample elements.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import (
    BaseModel,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from gradedkms import __version__, settings
from gradedkms.algebra import (
    Functional,
    GradedAlgebra,
    require_even_density,
    supertrace_functional,
)
from gradedkms.flow import ModularFlow, check_condition
from gradedkms.linalg import (
    GradedKmsError,
    hermitian_eigendecompose,
    matrix_units,
)
from gradedkms.net import LocalNet, build_chain
from gradedkms.resolver import CHECK_ORDER
from gradedkms.utils import (
    complex_gaussian,
    decode_matrix,
    encode_matrix,
    make_rng,
    random_hermitian,
    random_unitary,
)

logger = logging.getLogger(__name__)

DENSITY_STREAM = 0
SAMPLE_STREAM = 1
PHASE_STREAM = 2


class ConfigError(GradedKmsError):
    """
    Raised for an invalid scenario configuration or scenario file.
    """

    def __init__(self, message: str, errors: Optional[list] = None):
        self.errors = errors or []
        super().__init__(message)

    @classmethod
    def from_validation(cls, e: ValidationError) -> "ConfigError":
        lines = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
            for err in e.errors()
        ]
        return cls(
            "invalid scenario configuration\n" + "\n".join(lines) + "\n",
            errors=e.errors(),
        )


class ExplicitRho(BaseModel):
    kind: Literal["explicit"] = "explicit"
    eigenvalues: List[float]
    """
    Eigenvalues of rho in basis order, even sector first.
    """
    rotate: bool = False
    """
    Conjugate the diagonal density by a seeded unitary that preserves the
    grading.
    """

    @field_validator("eigenvalues")
    @classmethod
    def positive(cls, v):
        if not v or any(x <= 0 for x in v):
            raise ValueError("eigenvalues must be strictly positive")
        return v


class GibbsRho(BaseModel):
    kind: Literal["gibbs"] = "gibbs"
    beta: float = 1.0
    spectral_bound: float = Field(
        default=settings.DEFAULT_SPECTRAL_BOUND, ge=0
    )
    """
    Caps ``|ln lambda| <= spectral_bound``, so ``cond(rho) <=
    exp(2 spectral_bound)``.
    """


RhoSpec = Annotated[Union[ExplicitRho, GibbsRho], Field(discriminator="kind")]


class NetSpec(BaseModel):
    site_dims: List[int]
    """
    Per-site dimensions, at least two sites of dimension 2 or more. A
    comma-separated string is accepted.
    """
    site_gradings: Optional[List[List[int]]] = None
    """
    Per-site grading signs. Defaults to alternating +1, -1, +1, ...
    """
    product: bool = True
    coupling: float = 0.5
    """
    Strength of the random even interaction of an entangled density.
    """
    beta: float = 1.0
    spectral_bound: float = Field(
        default=settings.DEFAULT_SPECTRAL_BOUND, ge=0
    )

    @field_validator("site_dims", mode="before")
    @classmethod
    def split_dims(cls, v):
        """
        Convert comma-separated dimensions to a list of integers.
        """
        if isinstance(v, str):
            return [int(d.strip()) for d in v.split(",") if d.strip()]
        return v

    @field_validator("site_dims")
    @classmethod
    def check_dims(cls, v):
        if len(v) < 2:
            raise ValueError("a chain needs at least two sites")
        if any(d < 2 for d in v):
            raise ValueError("every site needs dimension 2 or more")
        return v

    @model_validator(mode="after")
    def fill_gradings(self):
        if self.site_gradings is None:
            self.site_gradings = [
                [1 if i % 2 == 0 else -1 for i in range(d)]
                for d in self.site_dims
            ]
        if [len(s) for s in self.site_gradings] != self.site_dims:
            raise ValueError("site_gradings must match site_dims")
        if any(x not in (1, -1) for s in self.site_gradings for x in s):
            raise ValueError("grading signs must be +1 or -1")
        return self

    @property
    def signs(self) -> np.ndarray:
        signs = np.array([1])
        for s in self.site_gradings:
            signs = np.kron(signs, s)
        return signs


class ScenarioConfig(BaseModel):
    seed: int = 0
    n_plus: Optional[int] = Field(default=None, ge=0)
    n_minus: Optional[int] = Field(default=None, ge=0)
    rho: RhoSpec = Field(default_factory=GibbsRho)
    normalize: bool = False
    """
    Rescale rho to unit trace.
    """
    net: Optional[NetSpec] = None
    """
    Build the algebra and density from a chain of sites. ``n_plus`` and
    ``n_minus`` are then derived.
    """
    tolerance: float = Field(default=settings.DEFAULT_TOLERANCE, gt=0)
    checks: List[str] = Field(default_factory=lambda: ["all"])
    """
    A string of comma-separated check names or a list of names.
    """
    samples: int = Field(default=settings.RANDOM_SAMPLES, ge=0)
    mismatch_flow: bool = False
    """
    Drive the dynamics with an independent density, as a negative control.
    """
    allow_ill_conditioned: bool = False

    @field_validator("seed")
    @classmethod
    def check_seed(cls, v):
        if not 0 <= v < 2**64:
            raise ValueError("seed must lie in [0, 2**64)")
        return v

    @field_validator("checks", mode="before")
    @classmethod
    def split_checks(cls, v):
        """
        Convert comma-separated check names to a list of string
        """
        if isinstance(v, str):
            return [c.strip() for c in v.split(",") if c.strip()]
        return v

    @field_validator("checks")
    @classmethod
    def known_checks(cls, v):
        unknown = [c for c in v if c != "all" and c not in CHECK_ORDER]
        if unknown:
            raise ValueError(f"unknown checks: {', '.join(unknown)}")
        return v

    @model_validator(mode="after")
    def check_dimensions(self):
        if self.net is not None:
            signs = self.net.signs
            n_plus = int(np.sum(signs == 1))
            n_minus = int(np.sum(signs == -1))
            for given, derived, name in (
                (self.n_plus, n_plus, "n_plus"),
                (self.n_minus, n_minus, "n_minus"),
            ):
                if given is not None and given != derived:
                    raise ValueError(
                        f"{name}={given} disagrees with the chain ({derived})"
                    )
            self.n_plus, self.n_minus = n_plus, n_minus
        if self.n_plus is None:
            self.n_plus = 1
        if self.n_minus is None:
            self.n_minus = 1
        if self.n_plus + self.n_minus < 1:
            raise ValueError("n_plus + n_minus must be at least 1")
        if isinstance(self.rho, ExplicitRho) and self.net is None:
            if len(self.rho.eigenvalues) != self.n:
                raise ValueError(
                    f"expected {self.n} eigenvalues, "
                    f"got {len(self.rho.eigenvalues)}"
                )
        if not self.allow_ill_conditioned:
            bound = self.condition_bound
            if bound > settings.MAX_CONDITION:
                raise ValueError(
                    f"condition number bound {bound:.3e} exceeds "
                    f"{settings.MAX_CONDITION:.0e}; set "
                    "allow_ill_conditioned to override"
                )
        return self

    @property
    def n(self) -> int:
        return self.n_plus + self.n_minus

    @property
    def condition_bound(self) -> float:
        if self.net is not None:
            return math.exp(2 * self.net.spectral_bound)
        if isinstance(self.rho, ExplicitRho):
            return max(self.rho.eigenvalues) / min(self.rho.eigenvalues)
        return math.exp(2 * self.rho.spectral_bound)


def parse_config(data: dict) -> ScenarioConfig:
    """
    Raises:
        ConfigError: the mapping is not a valid configuration.
    """
    try:
        return ScenarioConfig(**data)
    except ValidationError as e:
        raise ConfigError.from_validation(e) from e


def merge_overrides(data: dict, overrides: dict) -> dict:
    """
    Overlays the values of ``overrides`` that are not None on ``data``. A
    nested mapping is merged key by key unless it names another ``kind``.
    """
    out = dict(data)
    for key, value in overrides.items():
        if value is None:
            continue
        current = out.get(key)
        if isinstance(value, dict):
            value = {k: v for k, v in value.items() if v is not None}
            if isinstance(current, dict) and value.get(
                "kind", current.get("kind")
            ) == current.get("kind"):
                value = {**current, **value}
        out[key] = value
    return out


def load_config(
    path: Optional[Union[str, Path]] = None, **overrides
) -> ScenarioConfig:
    """
    Reads a YAML mapping and validates it, with ``overrides`` (typically
    command-line values) taking precedence over the file. Without a path
    the configuration is built from ``overrides`` alone.

    Raises:
        ConfigError: the file cannot be read or the result is invalid.
    """
    data = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(
                f"cannot read configuration {path}: {e}"
            ) from e
        if not isinstance(data, dict):
            raise ConfigError(f"configuration {path} is not a mapping")
    return parse_config(merge_overrides(data, overrides))


@dataclass(eq=False)
class Scenario:
    config: ScenarioConfig
    A: GradedAlgebra
    rho: np.ndarray
    flow_rho: Optional[np.ndarray] = None
    """ Density of the dynamics when it differs from rho. """
    net: Optional[LocalNet] = None
    samples: List[np.ndarray] = field(default_factory=list)
    """ Every matrix unit followed by the seeded Gaussian elements. """

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def omega(self) -> Functional:
        return supertrace_functional(self.A, self.rho)

    def flow(self) -> ModularFlow:
        rho = self.rho if self.flow_rho is None else self.flow_rho
        return ModularFlow.from_density(rho, sectors=self.A.signs)

    @property
    def random_samples(self) -> List[np.ndarray]:
        return self.samples[self.n**2:]

    @property
    def even_samples(self) -> List[np.ndarray]:
        return [self.A.parity_split(a)[0] for a in self.random_samples]

    @property
    def odd_samples(self) -> List[np.ndarray]:
        return [self.A.parity_split(a)[1] for a in self.random_samples]


def _even_hermitian(rng, signs: np.ndarray) -> np.ndarray:
    h = random_hermitian(rng, signs.size)
    return np.where(np.equal.outer(signs, signs), h, 0)


def _grading_unitary(rng, signs: np.ndarray) -> np.ndarray:
    u = np.zeros((signs.size, signs.size), dtype=complex)
    for label in (1, -1):
        idx = np.flatnonzero(signs == label)
        if idx.size:
            u[np.ix_(idx, idx)] = random_unitary(rng, idx.size)
    return u


def gibbs_density(
    h, beta: float, spectral_bound: float, signs: np.ndarray
) -> np.ndarray:
    """
    ``exp(-beta H)`` with ``beta E`` clipped to ``[-L, L]``; an even H gives
    an even density.
    """
    eig = hermitian_eigendecompose(h, sectors=signs)
    energies = np.clip(
        beta * eig.eigenvalues, -spectral_bound, spectral_bound
    )
    return eig.apply(lambda _: np.exp(-energies).astype(complex))


def _net_density(rng, spec: NetSpec) -> np.ndarray:
    site_hams = [
        _even_hermitian(rng, np.asarray(s)) for s in spec.site_gradings
    ]
    if spec.product:
        rho = np.array([[1.0 + 0j]])
        for h, s in zip(site_hams, spec.site_gradings):
            site = gibbs_density(
                h, spec.beta, spec.spectral_bound, np.asarray(s)
            )
            rho = np.kron(rho, site / np.trace(site))
        return rho
    dims = spec.site_dims
    total = np.zeros((np.prod(dims),) * 2, dtype=complex)
    for k, h in enumerate(site_hams):
        left = np.eye(int(np.prod(dims[:k])))
        right = np.eye(int(np.prod(dims[k + 1:])))
        total = total + np.kron(np.kron(left, h), right)
    signs = spec.signs
    total = total + spec.coupling * _even_hermitian(rng, signs)
    rho = gibbs_density(total, spec.beta, spec.spectral_bound, signs)
    return rho / np.trace(rho)


def draw_samples(config: ScenarioConfig, n: int) -> List[np.ndarray]:
    rng = make_rng(config.seed, SAMPLE_STREAM)
    randoms = [complex_gaussian(rng, (n, n)) for _ in range(config.samples)]
    return list(matrix_units(n)) + randoms


def generate_scenario(config: ScenarioConfig) -> Scenario:
    """
    Builds the scenario of a configuration. Identical configurations give
    bit-identical scenarios.

    Raises:
        OddDensity, SingularDensity: the resulting density violates the
            scenario preconditions.
    """
    rng = make_rng(config.seed, DENSITY_STREAM)
    net = None
    if config.net is not None:
        rho = _net_density(rng, config.net)
        net = build_chain(
            config.net.site_dims, config.net.site_gradings, rho
        )
        A = net.A
    else:
        A = GradedAlgebra.from_sectors(config.n_plus, config.n_minus)
        if isinstance(config.rho, ExplicitRho):
            rho = np.diag(config.rho.eigenvalues).astype(complex)
            if config.rho.rotate:
                u = _grading_unitary(rng, A.signs)
                rho = u @ rho @ u.conj().T
        else:
            h = _even_hermitian(rng, A.signs)
            rho = gibbs_density(
                h, config.rho.beta, config.rho.spectral_bound, A.signs
            )
    if config.normalize:
        rho = rho / np.trace(rho)

    flow_rho = None
    if config.mismatch_flow:
        h = _even_hermitian(rng, A.signs)
        flow_rho = gibbs_density(
            h, 1.0, settings.DEFAULT_SPECTRAL_BOUND, A.signs
        )
    scenario = Scenario(
        config=config,
        A=A,
        rho=rho,
        flow_rho=flow_rho,
        net=net,
        samples=draw_samples(config, A.n),
    )
    validate_scenario(scenario)
    logger.info(
        f"generated scenario: seed={config.seed}, n={A.n}, "
        f"chain={config.net is not None}"
    )
    return scenario


def validate_scenario(scenario: Scenario):
    """
    Checks the preconditions every suite relies on.

    Raises:
        OddDensity: rho is not even.
        SingularDensity: rho is not positive definite.
        IllConditioned: cond(rho) is too large and not allowed.
    """
    _, eig = require_even_density(scenario.A, scenario.rho, "scenario")
    check_condition(
        eig.condition, scenario.config.allow_ill_conditioned, "scenario"
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "version": __version__,
        "config": scenario.config.model_dump(mode="json"),
        "g": encode_matrix(scenario.A.g),
        "rho": encode_matrix(scenario.rho),
        "flow_rho": (
            None
            if scenario.flow_rho is None
            else encode_matrix(scenario.flow_rho)
        ),
    }


def save_scenario(scenario: Scenario, path: Union[str, Path]):
    with open(path, "w", encoding=settings.REPORT_ENCODING) as f:
        json.dump(scenario_to_dict(scenario), f, indent=2)
        f.write("\n")


def scenario_from_dict(data: dict) -> Scenario:
    """
    Rebuilds a scenario from its file contents. Densities come from the
    file; samples are regenerated from the seed.

    Raises:
        ConfigError: malformed contents.
        OddDensity, SingularDensity, IllConditioned: the stored density
            violates the scenario preconditions.
    """
    for key in ("config", "g", "rho"):
        if key not in data:
            raise ConfigError(f"scenario file lacks '{key}'")
    config = parse_config(data["config"])
    try:
        g = decode_matrix(data["g"])
        rho = decode_matrix(data["rho"])
        flow_rho = (
            None
            if data.get("flow_rho") is None
            else decode_matrix(data["flow_rho"])
        )
    except ValueError as e:
        raise ConfigError(f"malformed matrix in scenario file: {e}") from e
    signs = np.real(np.diag(g)).round().astype(int)
    A = GradedAlgebra(signs=signs)
    net = None
    if config.net is not None:
        net = build_chain(
            config.net.site_dims, config.net.site_gradings, rho
        )
        if not np.array_equal(net.A.signs, signs):
            raise ConfigError("stored grading does not match the chain")
    scenario = Scenario(
        config=config,
        A=A,
        rho=rho,
        flow_rho=flow_rho,
        net=net,
        samples=draw_samples(config, A.n),
    )
    validate_scenario(scenario)
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        with open(path, encoding=settings.REPORT_ENCODING) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read scenario {path}: {e}") from e
    return scenario_from_dict(data)
