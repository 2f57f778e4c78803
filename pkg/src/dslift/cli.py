"""
Command-line interface for dslift.

Every subcommand runs one reproducible experiment and writes
``<outdir>/<name>.csv`` plus ``<outdir>/<name>.json``.

Usage:
    dslift basis --alpha1 1.5 --beta1 1.5       # orthonormality of the Jacobi system
    dslift localize --kind ball --q 2           # kernel localization profile
    dslift transplant --max-degree 128          # connection band and transplantation
    dslift rates --gamma 0.5                    # lifted approximation rates
    dslift selftest                             # full acceptance suite

Exit codes: 0 success, 1 selftest threshold failure, 2 invalid input,
3 numerical failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Callable

import click
import numpy as np

from . import __version__
from .config import Config, setup_logging
from .exceptions import DsliftError, NumericalError, ParameterDomainError
from .experiments import ExperimentConfig, ExperimentResult, run_experiment
from .utils import to_builtin

__all__ = [
    "cli",
    "main",
    "run",
]

EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

_FORBIDDEN_PREFIXES = ("/etc", "/bin", "/sbin", "/usr", "/boot", "/proc", "/sys")


def validate_output_path(path_str: str) -> bool:
    """
    Validate an output directory before any artifact is written.

    Rejects ``..`` components and system directories.

    Example:
        >>> validate_output_path("results/run1")
        True
        >>> validate_output_path("../outside")
        False
    """
    path = Path(path_str)
    if ".." in path.parts:
        return False
    try:
        resolved = str(path.resolve())
    except (OSError, ValueError):
        return False
    return not any(resolved == p or resolved.startswith(p + "/") for p in _FORBIDDEN_PREFIXES)


def _echo_summary(result: ExperimentResult, paths: tuple[Path, Path] | None) -> None:
    status = "PASS" if result.passed else "FAIL"
    click.echo(f"\n{result.name}: {status}")
    click.echo("=" * 40)
    skip = set(ExperimentConfig.__dataclass_fields__) | {"passed"}
    for key, value in result.summary.items():
        if key in skip:
            continue
        if isinstance(value, float):
            click.echo(f"  {key}: {value:.6g}")
        else:
            click.echo(f"  {key}: {value}")
    if result.name == "selftest":
        failed = result.table.loc[~result.table["passed"]]
        for _, row in failed.iterrows():
            click.echo(f"  FAILED {row['check']}: {row['value']:.6g} ({row['comparison']} {row['threshold']:g})",
                       err=True)
    if paths is not None:
        click.echo(f"\nTable written to {paths[0]}")
        click.echo(f"Summary written to {paths[1]}")


def _execute(subcommand: str, output_json: bool, **options) -> None:
    """Build the config, run the experiment, report, and exit with the right code."""
    t_values = options.pop("t_list", ())
    if t_values:
        options["t_list"] = tuple(t_values)
    outdir = options.get("outdir")
    try:
        if outdir is not None and not validate_output_path(str(outdir)):
            raise ParameterDomainError(f"Invalid output directory: {outdir}", parameter="outdir", value=str(outdir))
        cfg = ExperimentConfig(subcommand, **{k: v for k, v in options.items() if v is not None})
        result = run_experiment(cfg, write=False)
        paths = result.write(cfg.outdir)
    except DsliftError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(e.exit_code)
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        click.echo(f"Numerical failure: {type(e).__name__}: {e}", err=True)
        sys.exit(NumericalError.exit_code)
    except PermissionError as e:
        click.echo(f"Permission denied: {e}", err=True)
        sys.exit(EXIT_VALIDATION)

    if output_json:
        click.echo(json.dumps(to_builtin(result.summary), indent=2, allow_nan=False))
    else:
        _echo_summary(result, paths)

    if subcommand == "selftest" and not result.passed:
        sys.exit(EXIT_SELFTEST_FAILED)


def _common_options(func: Callable) -> Callable:
    options = [
        click.option("--alpha1", type=float, default=None, help="alpha of the target (or single) space"),
        click.option("--beta1", type=float, default=None, help="beta of the target (or single) space"),
        click.option("--alpha2", type=float, default=None, help="alpha of the base space"),
        click.option("--beta2", type=float, default=None, help="beta of the base space"),
        click.option("--max-degree", type=int, default=None, help="Largest polynomial degree"),
        click.option("--grid-size", type=int, default=None, help="Points of the evaluation grid on [0, pi]"),
        click.option("--n-levels", type=int, default=None, help="Number of dyadic levels"),
        click.option("--delta", type=float, default=None, help="Separation of the off-diagonal pairs"),
        click.option("--r", "r", type=float, default=None, help="Inner margin of the image set"),
        click.option("--s", "s", type=float, default=None, help="Outer margin of the image set"),
        click.option("--t", "t_list", type=float, multiple=True, help="Heat time (repeatable)"),
        click.option("--seed", type=int, default=None, help="Seed of random test polynomials"),
        click.option("--outdir", type=click.Path(file_okay=False), envvar="DSLIFT_OUTDIR", default=None,
                     help="Directory for the CSV and JSON artifacts"),
        click.option("--json", "output_json", is_flag=True, help="Print the summary as JSON"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _power_options(func: Callable) -> Callable:
    func = click.option("--theta0", type=float, default=None, help="Center of the singularity / ball")(func)
    return click.option("--gamma", type=float, default=None, help="Exponent of |theta - theta0|^gamma")(func)


@click.group()
@click.version_option(version=__version__, prog_name="dslift")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="Logging verbosity (default: DSLIFT_LOG_LEVEL or WARNING)")
def cli(log_level: str | None):
    """
    Localized kernels and lifted approximation on data spaces.

    Examples:

        dslift basis --alpha1 2 --beta1 1

        dslift localize --kind joint --n-levels 4

        dslift imageset --theta0 1.5708 --r0 0.8 --r 0.1 --s 0.1

        dslift selftest --outdir results
    """
    setup_logging(log_level or Config.LOG_LEVEL)


@cli.command()
@_common_options
def basis(**options):
    """Orthonormality and value at one of the Jacobi system (alpha1, beta1)."""
    _execute("basis", **options)


@cli.command()
@_common_options
@click.option("--kind", type=click.Choice(["trig", "ball", "joint"]), default=None, help="Space whose kernel is profiled")
@click.option("--q", "q", type=int, default=None, help="Dimension of the ball space")
def localize(**options):
    """
    Off-diagonal decay of the localized kernel for N = 64, 128, ...

    Examples:

        dslift localize --alpha1 -0.5 --beta1 -0.5

        dslift localize --kind ball --q 3
    """
    _execute("localize", **options)


@cli.command()
@_common_options
def heat(**options):
    """Positivity, Gaussian envelope and large-time limit of the heat kernel."""
    _execute("heat", **options)


@cli.command()
@_common_options
def transplant(**options):
    """Connection band, transplantation residual and the constant c*."""
    _execute("transplant", **options)


@cli.command()
@_common_options
@_power_options
def rates(**options):
    """Rate of sigma_{2^m}(joint; f) towards Omega f on the image set."""
    _execute("rates", **options)


@cli.command()
@_common_options
@_power_options
def smoothness(**options):
    """Local smoothness estimates near and away from the singularity of f."""
    _execute("smoothness", **options)


@cli.command()
@_common_options
@click.option("--theta0", type=float, default=None, help="Center of the ball A")
@click.option("--r0", type=float, default=None, help="Radius of the ball A")
def imageset(**options):
    """Image set of A = B(theta0, r0) against the closed-form intervals."""
    _execute("imageset", **options)


@cli.command()
@_common_options
@click.option("--x", "x", type=float, default=None, help="Point of the target space")
@click.option("--y", "y", type=float, default=None, help="Point of the base space")
def diffusion(**options):
    """Diffusion distances between points of the two trigonometric spaces."""
    _execute("diffusion", **options)


@cli.command()
@_common_options
def selftest(**options):
    """
    Run every acceptance check; exits with 1 when any threshold fails.

    Examples:

        dslift selftest

        DSLIFT_OUTDIR=/tmp/dslift dslift selftest --json
    """
    _execute("selftest", **options)


def run(argv: list[str] | None = None) -> int:
    """
    Run the CLI on ``argv`` and return the process exit code instead of exiting.

    Example:
        >>> run(["imageset", "--max-degree", "8", "--outdir", "out"])
        0
    """
    try:
        cli.main(args=argv, prog_name="dslift", standalone_mode=True)
    except SystemExit as e:
        if e.code is None:
            return EXIT_OK
        return e.code if isinstance(e.code, int) else EXIT_SELFTEST_FAILED
    return EXIT_OK


def main():
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
