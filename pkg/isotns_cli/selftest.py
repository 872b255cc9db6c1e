#!/usr/bin/env python3
"""
Selftest command for the isotns CLI.

Runs the per-sample identity suite and reports each check; any failure exits 2.
"""
import logging

import typer

from isotns.experiments import selftest

from ._common import EXIT_NUMERICAL, exit_codes, setup_logging

app = typer.Typer(
    help="Run the per-sample identity suite",
    epilog="""
    Exit codes:
      0: Every check passed
      2: At least one check failed
    """
)

logger = logging.getLogger("isotns_cli.selftest")


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    seed: int = typer.Option(0, "--seed", help="Seed of the sampled test networks"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug output"),
):
    """Check isometry, oracle, gradient and channel identities on small networks."""
    if ctx.invoked_subcommand is not None:
        return
    setup_logging(debug)
    with exit_codes(debug):
        checks = selftest(seed)
    width = max(len(c.name) for c in checks)
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        typer.echo(f"{check.name:<{width}}  {check.value:.3e}  (tol {check.tolerance:.0e})  {status}")
    failed = [c.name for c in checks if not c.passed]
    if failed:
        typer.echo(f"{len(failed)} of {len(checks)} checks failed", err=True)
        raise typer.Exit(EXIT_NUMERICAL)
    typer.echo(f"all {len(checks)} checks passed")
