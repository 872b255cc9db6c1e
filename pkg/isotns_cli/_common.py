"""
Shared helpers for isotns commands: logging setup, option parsing and exit codes.

Exit codes:
  0: Success
  1: Invalid configuration, arguments or files
  2: Numerical failure (non-convergence, failed identity, impossible fit)
"""
import contextlib
import logging
from typing import Iterator, List, Optional

import typer
from pydantic import ValidationError

from isotns.exceptions import (
    ConfigurationError,
    FitDomainError,
    IntegrityError,
    IsoTNSError,
    NumericalError,
    UnsupportedConfigurationError,
)

logger = logging.getLogger("isotns_cli")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2


def setup_logging(debug: bool) -> None:
    """Configure logging only if no handlers are set anywhere."""
    root_logger = logging.getLogger()
    if not root_logger.handlers and not logger.handlers:
        logging.basicConfig(
            level=logging.DEBUG if debug else logging.INFO,
            format="%(levelname)s: %(message)s",
        )


def parse_int_list(value: Optional[str], option: str) -> Optional[List[int]]:
    """Parse "2,3,4" into [2, 3, 4]."""
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        typer.echo(f"Error: {option} expects comma-separated integers, got '{value}'", err=True)
        raise typer.Exit(EXIT_INVALID)


@contextlib.contextmanager
def exit_codes(debug: bool) -> Iterator[None]:
    """Translate library errors into documented exit codes."""
    try:
        yield
    except typer.Exit:
        raise
    except (ConfigurationError, UnsupportedConfigurationError, ValidationError, OSError) as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_INVALID)
    except (NumericalError, IntegrityError, FitDomainError) as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_NUMERICAL)
    except IsoTNSError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_INVALID)
    except Exception as e:
        if debug:
            logger.exception("Unexpected error")
        else:
            typer.echo(f"Error: Unexpected error: {e}", err=True)
            typer.echo("Run with --debug for more information", err=True)
        raise typer.Exit(EXIT_NUMERICAL)
