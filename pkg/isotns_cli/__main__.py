#!/usr/bin/env python3
"""
Main entry point for the isotns CLI.
"""
import typer

from isotns.version import __version__

from . import fit, predict, sample, selftest, spectrum

app = typer.Typer(
    help="isotns - gradient variances of Haar-random isometric tensor networks",
    no_args_is_help=True,
)

# Register commands
app.add_typer(sample.app, name="sample", help="Run Monte Carlo variance scans")
app.add_typer(spectrum.app, name="spectrum", help="Eigenvalues of exact doubled channels")
app.add_typer(fit.app, name="fit", help="Fit layer decay factors to scan results")
app.add_typer(predict.app, name="predict", help="Tabulate closed-form decay factors and variances")
app.add_typer(selftest.app, name="selftest", help="Run the per-sample identity suite")


def _version_callback(value: bool) -> None:
    if value:
        typer.echo(f"isotns version: {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        False, "--version", "-v",
        help="Show the application version and exit",
        callback=_version_callback,
        is_eager=True,
    ),
):
    """isotns - gradient variances of Haar-random isometric tensor networks."""


if __name__ == "__main__":
    app()
