import argparse
import logging
import sys
from typing import Any

from gradedkms.linalg import GradedKmsError
from gradedkms.report import ReportIOError, emit_report, render_summary
from gradedkms.runner import SuiteRunner, SuiteRunnerConfig
from gradedkms.scenarios import (
    ConfigError,
    generate_scenario,
    load_config,
    load_scenario,
    save_scenario,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_IO = 3

logger = logging.getLogger("kmslab")


def parse_sites(spec: str) -> dict[str, Any]:
    """
    Parses a chain description into ``NetSpec`` fields.

    "2,3" gives two sites with the default alternating grading;
    "2:+-,2:++" gives the grading signs of every site explicitly.
    """
    dims = []
    gradings = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        dim, _, signs = item.partition(":")
        try:
            dims.append(int(dim))
        except ValueError as e:
            raise ConfigError(f"invalid site dimension: {dim!r}") from e
        if signs:
            if any(c not in "+-" for c in signs):
                raise ConfigError(f"invalid site grading: {signs!r}")
            gradings.append([1 if c == "+" else -1 for c in signs])
    out: dict[str, Any] = {"site_dims": dims}
    if gradings:
        if len(gradings) != len(dims):
            raise ConfigError("give a grading for every site or for none")
        out["site_gradings"] = gradings
    return out


def generate_overrides(args) -> dict:
    rho = None
    if args.eigenvalues is not None:
        try:
            values = [
                float(x) for x in args.eigenvalues.split(",") if x.strip()
            ]
        except ValueError as e:
            raise ConfigError(f"invalid eigenvalues: {e}") from e
        rho = {"kind": "explicit", "eigenvalues": values}
    elif args.beta is not None or args.spectral_bound is not None:
        rho = {
            "kind": "gibbs",
            "beta": args.beta,
            "spectral_bound": args.spectral_bound,
        }
    return dict(
        seed=args.seed,
        n_plus=args.n_plus,
        n_minus=args.n_minus,
        samples=args.samples,
        mismatch_flow=args.mismatch_flow or None,
        allow_ill_conditioned=args.allow_ill_conditioned or None,
        normalize=args.normalize or None,
        rho=rho,
    )


def net_overrides(args) -> dict:
    net = {} if args.sites is None else parse_sites(args.sites)
    if args.entangled:
        net["product"] = False
    net["coupling"] = args.coupling
    net["beta"] = args.beta
    return dict(seed=args.seed, samples=args.samples, net=net)


def run_checks(scenario, checks: str, tolerance: float, report_path) -> int:
    config = SuiteRunnerConfig(
        checks=[c.strip() for c in checks.split(",") if c.strip()],
        tolerance=tolerance,
    )
    report = SuiteRunner(config).run(scenario)
    print(render_summary(report))
    if report_path is not None:
        emit_report(report, report_path)
        logger.info(f"report written to {report_path}")
    return EXIT_PASS if report.all_passed else EXIT_FAIL


def command_generate(args) -> int:
    config = load_config(args.config, **generate_overrides(args))
    scenario = generate_scenario(config)
    try:
        save_scenario(scenario, args.out)
    except OSError as e:
        raise ReportIOError(args.out, str(e)) from e
    logger.info(f"scenario written to {args.out}")
    return EXIT_PASS


def command_verify(args) -> int:
    scenario = load_scenario(args.scenario)
    tolerance = (
        scenario.config.tolerance if args.tol is None else args.tol
    )
    return run_checks(scenario, args.checks, tolerance, args.report)


def command_net(args) -> int:
    config = load_config(args.config, **net_overrides(args))
    scenario = generate_scenario(config)
    tolerance = config.tolerance if args.tol is None else args.tol
    return run_checks(scenario, args.checks, tolerance, args.report)


def parse_args(argv=None):
    parser = argparse.ArgumentParser(
        description="Certification lab for graded KMS functionals"
    )
    parser.add_argument(
        "-l",
        "--loglevel",
        default="INFO",
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Log level, one of choices in upper case or lower case",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="Generate a scenario")
    generate.add_argument("-c", "--config", help="YAML configuration file")
    generate.add_argument("--seed", type=int)
    generate.add_argument("--n-plus", type=int)
    generate.add_argument("--n-minus", type=int)
    generate.add_argument("--beta", type=float)
    generate.add_argument("--spectral-bound", type=float)
    generate.add_argument(
        "--eigenvalues", help="Comma-separated explicit eigenvalues of rho"
    )
    generate.add_argument("--samples", type=int)
    generate.add_argument("--normalize", action="store_true")
    generate.add_argument(
        "--mismatch-flow",
        action="store_true",
        help="Drive the dynamics with an independent density",
    )
    generate.add_argument("--allow-ill-conditioned", action="store_true")
    generate.add_argument("-o", "--out", required=True)
    generate.set_defaults(func=command_generate)

    verify = commands.add_parser("verify", help="Verify a scenario file")
    verify.add_argument("scenario")
    verify.add_argument(
        "--checks", default="all", help="Comma-separated check names"
    )
    verify.add_argument("--tol", type=float)
    verify.add_argument("--report", help="Path of the JSON report")
    verify.set_defaults(func=command_verify)

    net = commands.add_parser("net", help="Verify a chain of sites")
    net.add_argument("-c", "--config", help="YAML configuration file")
    net.add_argument(
        "--sites", help='Site dimensions, e.g. "2,2" or "2:+-,2:++"'
    )
    net.add_argument("--seed", type=int)
    net.add_argument("--samples", type=int)
    net.add_argument("--entangled", action="store_true")
    net.add_argument("--coupling", type=float)
    net.add_argument("--beta", type=float)
    net.add_argument("--checks", default="all")
    net.add_argument("--tol", type=float)
    net.add_argument("--report", help="Path of the JSON report")
    net.set_defaults(func=command_net)
    return parser.parse_args(argv)


def create_logger(log_level: str):
    level = getattr(logging, log_level.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    return logging.getLogger("kmslab")


def main(argv=None) -> int:
    args = parse_args(argv)
    log = create_logger(args.loglevel)
    try:
        return args.func(args)
    except ReportIOError as e:
        log.error(e)
        return EXIT_IO
    except GradedKmsError as e:
        log.error(e)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
