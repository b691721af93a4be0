"""
Command line entry point.

    vortexqubit run fig5_stirap --output-dir results
    vortexqubit validate my_config.yaml
    vortexqubit list-configs

Exit codes: 0 on success, 2 for configuration errors, 3 when a numerical
tolerance cannot be met.
"""

# Built-Ins
from pathlib import Path
from typing import Optional
import logging

# Dependencies
import click
import click_log

# Local Imports
from pyvortexqubit import __version__
from pyvortexqubit.custom_types import OutputFormat, output_formats
from pyvortexqubit.exceptions import (
    AccuracyError,
    AnalysisError,
    ConfigurationError,
    StiffnessError,
)
from pyvortexqubit.services.read_config import bundled_configs, open_config
from pyvortexqubit.services.run_config import run_experiment
from pyvortexqubit.validators.config_validators import check_config

logger = logging.getLogger("pyvortexqubit")
click_log.basic_config(logger)

EXIT_CONFIG_ERROR = 2
EXIT_ACCURACY_ERROR = 3


@click.group()
@click.version_option(__version__, prog_name="vortexqubit")
@click_log.simple_verbosity_option(logger)
def cli() -> None:
    """Optical vortex preparation and BEC vortex-qubit transfer."""


@cli.command()
@click.argument("config")
@click.option(
    "--output-dir",
    type=click.Path(file_okay=False, path_type=Path),
    help="Directory for artifacts; overrides output.directory.",
)
@click.option(
    "--tolerance",
    type=click.FloatRange(min=0, min_open=True),
    help="Integrator relative tolerance.",
)
@click.option(
    "--samples", type=click.IntRange(min=2), help="Output samples per run."
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(output_formats),
    help="Table format for artifacts.",
)
def run(
    config: str,
    output_dir: Optional[Path],
    tolerance: Optional[float],
    samples: Optional[int],
    fmt: Optional[OutputFormat],
) -> None:
    """Run the experiment described by CONFIG (a path or bundled name)."""
    try:
        loaded = open_config(config).with_overrides(
            output_dir, tolerance, samples, fmt
        )
        result = run_experiment(loaded)
    except ConfigurationError as err:
        click.echo(f"Configuration error: {err}", err=True)
        raise SystemExit(EXIT_CONFIG_ERROR) from err
    except (AccuracyError, StiffnessError) as err:
        click.echo(f"Accuracy failure: {err}", err=True)
        raise SystemExit(EXIT_ACCURACY_ERROR) from err
    except AnalysisError as err:
        click.echo(f"Analysis failure: {err}", err=True)
        raise SystemExit(EXIT_ACCURACY_ERROR) from err
    for path in result.artifacts:
        logger.info("Wrote %s", path)
    click.echo(result.summary_line())


@cli.command()
@click.argument("config")
def validate(config: str) -> None:
    """Check CONFIG against the schema and physics sanity rules."""
    try:
        loaded = open_config(config)
    except ConfigurationError as err:
        click.echo(f"error: {err}", err=True)
        raise SystemExit(EXIT_CONFIG_ERROR) from err
    findings = check_config(loaded)
    for finding in findings:
        click.echo(str(finding), err=finding.level == "error")
    if any(f.level == "error" for f in findings):
        raise SystemExit(EXIT_CONFIG_ERROR)
    warnings = sum(f.level == "warning" for f in findings)
    click.echo(
        f"{loaded.name} [{loaded.experiment}]: ok, {warnings} warning(s), "
        f"config {loaded.config_hash()[:12]}"
    )


@cli.command("list-configs")
def list_configs() -> None:
    """List the bundled experiment configurations."""
    for name, path in bundled_configs().items():
        try:
            experiment = open_config(path).experiment
        except ConfigurationError as err:
            logger.warning("Bundled config %s is invalid: %s", name, err)
            continue
        click.echo(f"{name}\t{experiment}")


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
