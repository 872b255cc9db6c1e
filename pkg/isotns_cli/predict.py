#!/usr/bin/env python3
"""
Predict command for the isotns CLI.

Tabulates closed-form decay factors per family and the MPS bulk variance.
"""
import dataclasses
import logging
import pathlib
from typing import Optional

import typer

from isotns.channels import AnalyticEtaTable, predicted_mps_variance
from isotns.reporting import write_json

from ._common import exit_codes, parse_int_list, setup_logging

app = typer.Typer(
    help="Tabulate closed-form decay factors and variances",
    epilog="""
    Exit codes:
      0: Success
      1: Invalid arguments
    """
)

logger = logging.getLogger("isotns_cli.predict")


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    chis: str = typer.Option("2,3,4", "--chis", help="Comma-separated bond dimensions"),
    d: Optional[int] = typer.Option(None, "--d", help="MPS physical dimension (default: chi)"),
    family: Optional[str] = typer.Option(None, "--family", help="Only this family key, e.g. mera-binary"),
    trh2: float = typer.Option(1.0, "--trh2", help="Tr(h^2) of the interaction term"),
    output: Optional[pathlib.Path] = typer.Option(None, "--output", help="Write the table as JSON"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug output"),
):
    """Print eta, b * eta and lambda_3 per family and chi."""
    if ctx.invoked_subcommand is not None:
        return
    setup_logging(debug)
    with exit_codes(debug):
        table = AnalyticEtaTable(chis=tuple(parse_int_list(chis, "--chis")), d=d)
        rows = []
        typer.echo(f"{'family':<14} {'chi':>4} {'d':>4} {'eta':>12} {'b*eta':>12} {'lambda_3':>12}  note")
        for name, chi, dim, entry in table.rows():
            if family and name != family:
                continue
            note = "" if entry.exact else "leading order"
            if not entry.sampled:
                note = (note + ", formula only").lstrip(", ")
            lam3 = f"{entry.lambda3:>12.8f}" if entry.lambda3 is not None else f"{'':>12}"
            typer.echo(
                f"{name:<14} {chi:>4} {dim:>4} {entry.eta:>12.8f} {entry.layer_scaling:>12.8f} {lam3}  {note}"
            )
            row = {"family": name, "chi": chi, "d": dim, **dataclasses.asdict(entry), "b_eta": entry.layer_scaling}
            if name == "mps" and dim > 1:
                row["bulk_variance"] = predicted_mps_variance(chi, dim, trh2)
            rows.append(row)
        for row in rows:
            if "bulk_variance" in row:
                typer.echo(f"mps bulk variance chi={row['chi']} d={row['d']}: {row['bulk_variance']:.8f}")
        if output:
            write_json({"trh2": trh2, "rows": rows}, output)
