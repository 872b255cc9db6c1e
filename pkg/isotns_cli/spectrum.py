#!/usr/bin/env python3
"""
Spectrum command for the isotns CLI.

Builds the exact Haar-averaged doubled transition channel of a family and prints its
leading eigenvalues next to the closed-form decay factor.
"""
import logging
import pathlib
from typing import Optional

import numpy as np
import typer

from isotns.ansatz import AnsatzSpec
from isotns.channels import build_doubled_channel, spectrum, spectrum_record
from isotns.reporting import write_json

from ._common import exit_codes, setup_logging

app = typer.Typer(
    help="Eigenvalues of exact doubled channels",
    epilog="""
    Exit codes:
      0: Success
      1: Unknown family or construction, channel too large
      2: Eigensolver failure
    """
)

logger = logging.getLogger("isotns_cli.spectrum")


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    family: str = typer.Option("mps", "--family", help="mps, ttns or mera"),
    branching: Optional[int] = typer.Option(None, "--branching", help="Branching ratio b (2 or 3)"),
    chi: int = typer.Option(2, "--chi", help="Bond dimension"),
    d: Optional[int] = typer.Option(None, "--d", help="Physical dimension (MPS only; defaults to chi)"),
    construction: Optional[str] = typer.Option(
        None, "--construction",
        help="Channel tag, e.g. mera-binary-left; defaults to the family's (averaged) channel",
    ),
    top_k: int = typer.Option(4, "--top-k", help="Number of leading eigenvalues"),
    method: str = typer.Option("auto", "--method", help="auto, dense, reduced or arnoldi"),
    output: Optional[pathlib.Path] = typer.Option(None, "--output", help="Write the spectrum as JSON"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug output"),
):
    """Print the leading eigenvalues of a doubled transition channel."""
    if ctx.invoked_subcommand is not None:
        return
    setup_logging(debug)
    with exit_codes(debug):
        b = branching if branching is not None else (1 if family == "mps" else 2)
        spec = AnsatzSpec(family=family, branching=b, chi=chi, d=d or chi, size=1)
        channel = build_doubled_channel(spec, construction)
        result = spectrum(channel, top_k=top_k, method=method)
        record = spectrum_record(spec, result)

        typer.echo(f"{channel.tag}: chi={chi} d={spec.d} D={channel.operand_dim} ({result.method})")
        for n, value in enumerate(result.eigenvalues, start=1):
            imag = f" {value.imag:+.3e}i" if abs(np.imag(value)) > 1e-12 else ""
            typer.echo(f"  lambda_{n} = {value.real:.10f}{imag}")
        typer.echo(f"  analytic eta = {record['analytic_eta']:.10f}")
        if record["b_eta"] is not None:
            typer.echo(f"  b * eta = {record['b_eta']:.10f}")
        if result.degeneracies:
            typer.echo(f"  degenerate groups: {record['degeneracies']}")
        if output:
            write_json(record, output)
