#!/usr/bin/env python3
"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""
import logging
import sys
from typing import List, Optional

import click
import structlog
import typer
from pydantic import ValidationError

from .cli.depth import depth
from .cli.evaluate import eval_cloud, eval_depth
from .cli.fuse import fuse
from .cli.losses import losses
from .cli.refine import refine
from .cli.synth import synth
from .config import get_settings
from .exceptions import ReconstructionError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

logger = structlog.get_logger()

app = typer.Typer(add_completion=False, no_args_is_help=True, help="Multi-view stereo with discontinuity refinement.")
app.command("synth")(synth)
app.command("depth")(depth)
app.command("refine")(refine)
app.command("fuse")(fuse)
app.command("eval-cloud")(eval_cloud)
app.command("eval-depth")(eval_depth)
app.command("losses")(losses)


def configure_logging(level: str = "WARNING", fmt: str = "json") -> None:
    """Routes structlog through the stdlib logger to stderr."""
    renderer = structlog.dev.ConsoleRenderer() if fmt == "console" else structlog.processors.JSONRenderer()
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level.upper(), force=True)
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )


@app.callback()
def main(
    ctx: typer.Context,
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR."),
    log_format: Optional[str] = typer.Option(None, "--log-format", help="json or console."),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Views processed concurrently."),
) -> None:
    settings = get_settings()
    level = (log_level or settings.log_level).upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise typer.BadParameter(f"unknown log level '{log_level}'", param_hint="--log-level")
    fmt = log_format or settings.log_format
    if fmt not in ("json", "console"):
        raise typer.BadParameter(f"unknown log format '{log_format}'", param_hint="--log-format")
    configure_logging(level, fmt)
    ctx.obj = {"workers": workers or settings.workers}


def cli(argv: Optional[List[str]] = None) -> int:
    """Runs one command and returns its exit code instead of exiting."""
    command = typer.main.get_command(app)
    try:
        result = command.main(args=argv, prog_name="mvsrefine", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("error: aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except ValidationError as e:
        click.echo(f"error: invalid configuration: {e.errors()[0]['msg']}", err=True)
        return EXIT_USAGE
    except ReconstructionError as e:
        logger.error("Command failed.", error=str(e), kind=type(e).__name__)
        click.echo(f"error: {type(e).__name__}: {e}", err=True)
        return EXIT_DATA
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_DATA
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(cli())
