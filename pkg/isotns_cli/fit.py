#!/usr/bin/env python3
"""
Fit command for the isotns CLI.

Reads records written by `isotns sample` and fits the per-layer decay factor.
"""
import logging
import pathlib
from typing import Optional

import typer

from isotns.channels import predicted_layer_scaling
from isotns.experiments import fit_decay
from isotns.reporting import load_records, write_json

from ._common import exit_codes, setup_logging

app = typer.Typer(
    help="Fit layer decay factors to scan results",
    epilog="""
    Exit codes:
      0: Success
      1: Unreadable or invalid results file
      2: Fit impossible (fewer than 3 points or non-positive means in the window)
    """
)

logger = logging.getLogger("isotns_cli.fit")


# Options may follow the results path
@app.callback(invoke_without_command=True, context_settings={"allow_interspersed_args": True})
def main(
    ctx: typer.Context,
    results: pathlib.Path = typer.Argument(None, help="CSV or JSON file written by `isotns sample`"),
    fit_min: Optional[int] = typer.Option(None, "--fit-min", help="First layer of the fit window (default 2)"),
    fit_max: Optional[int] = typer.Option(None, "--fit-max", help="Last layer of the fit window (default T-2)"),
    output: Optional[pathlib.Path] = typer.Option(None, "--output", help="Write the fit as JSON"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug output"),
):
    """Weighted log-linear fit of the layer variances."""
    if ctx.invoked_subcommand is not None:
        return
    if results is None:
        typer.echo(ctx.get_help())
        raise typer.Exit(0)
    setup_logging(debug)
    with exit_codes(debug):
        records = load_records(results)
        if not records:
            typer.echo(f"Error: {results} holds no records", err=True)
            raise typer.Exit(1)
        size = max(r.size for r in records)
        window = (fit_min if fit_min is not None else 2, fit_max if fit_max is not None else size - 2)
        fit = fit_decay(records, window)
        typer.echo(
            f"decay factor {fit.decay_factor:.6f} "
            f"(95% CI [{fit.ci_low:.6f}, {fit.ci_high:.6f}]) on [{window[0]}, {window[1]}], "
            f"{fit.n_points} points, R^2 = {fit.r_squared:.4f}"
        )
        payload = {"fit": fit}
        families = {(r.family, r.chi) for r in records}
        if len(families) == 1:
            family, chi = families.pop()
            if family != "mps":
                predicted = predicted_layer_scaling(family, chi)
                payload["predicted"] = predicted
                typer.echo(f"predicted b * eta = {predicted:.6f} ({family}, chi={chi})")
        if output:
            write_json(payload, output)
