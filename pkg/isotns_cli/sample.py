#!/usr/bin/env python3
"""
Sample command for the isotns CLI.

Runs Monte Carlo gradient-variance scans over sites (MPS) or layers (TTNS/MERA), and
the chi, size and variant studies built on them.
"""
import logging
import pathlib
import time
from typing import Dict, List, Optional

import typer

from isotns.experiments import (
    fit_decay,
    pairwise_consistent,
    run_chi_scan,
    run_comparison,
    run_scan,
    run_size_scan,
)
from isotns.models import ExperimentConfig, VarianceRecord
from isotns.reporting import build_manifest, emit, load_config, write_json

from ._common import exit_codes, parse_int_list, setup_logging

app = typer.Typer(
    help="Run Monte Carlo variance scans",
    epilog="""
    Exit codes:
      0: Success
      1: Invalid configuration or output path
      2: Numerical failure
    """
)

logger = logging.getLogger("isotns_cli.sample")

SCANS = ("positions", "chi", "size", "comparison")


def _split_path(output: str, suffix: str) -> pathlib.Path:
    path = pathlib.Path(output)
    return path.with_name(f"{path.stem}-{suffix}{path.suffix}")


def _emit_groups(groups: Dict[str, List[VarianceRecord]], config: ExperimentConfig, wall: float) -> None:
    """One CSV per group, or a single JSON holding every group."""
    manifest = build_manifest(config, wall)
    if config.format == "json":
        write_json({"manifest": manifest, "groups": groups}, config.output)
        return
    for label, records in groups.items():
        emit(records, _split_path(config.output, label), "csv")


def _echo_records(records: List[VarianceRecord]) -> None:
    typer.echo(f"{'pos':>4} {'width':>5} {'n':>7} {'mean_var':>14} {'stderr':>12}")
    for r in records:
        typer.echo(
            f"{r.tau_or_site:>4} {r.interaction_width or '':>5} {r.n_samples:>7} "
            f"{r.mean_var:>14.6e} {r.stderr:>12.3e}"
        )


def run_sample(config: ExperimentConfig, scan: str) -> None:
    start = time.perf_counter()
    if scan == "positions":
        records = run_scan(config)
        wall = time.perf_counter() - start
        _echo_records(records)
        if config.family != "mps":
            lo, hi = config.fit_window()
            if sum(lo <= r.tau_or_site <= hi for r in records) >= 3:
                fit = fit_decay(records, (lo, hi))
                typer.echo(
                    f"decay factor {fit.decay_factor:.4f} "
                    f"[{fit.ci_low:.4f}, {fit.ci_high:.4f}] on [{lo}, {hi}], R^2 = {fit.r_squared:.4f}"
                )
        if config.output:
            widths = sorted({r.interaction_width for r in records})
            if len(widths) > 1:
                groups = {f"w{w}": [r for r in records if r.interaction_width == w] for w in widths}
                _emit_groups(groups, config, wall)
            else:
                emit(records, config.output, config.format, build_manifest(config, wall))
    elif scan == "comparison":
        groups = run_comparison(config)
        wall = time.perf_counter() - start
        for label, records in groups.items():
            typer.echo(f"# {label}")
            _echo_records(records)
        if config.output:
            _emit_groups(groups, config, wall)
    elif scan == "chi":
        rows = run_chi_scan(config)
        wall = time.perf_counter() - start
        typer.echo(f"{'chi':>4} {'fitted':>9} {'ci_low':>9} {'ci_high':>9} {'b*eta':>9} {'var(tau=1)':>12}")
        for row in rows:
            typer.echo(
                f"{row.chi:>4} {row.decay_factor:>9.4f} {row.ci_low:>9.4f} {row.ci_high:>9.4f} "
                f"{row.predicted:>9.4f} {row.tau1_variance:>12.4e}"
            )
        if config.output:
            write_json({"manifest": build_manifest(config, wall), "rows": rows}, config.output)
    else:
        rows = run_size_scan(config)
        wall = time.perf_counter() - start
        typer.echo(f"{'T':>4} {'mean_var':>14} {'stderr':>12}")
        for row in rows:
            typer.echo(f"{row.size:>4} {row.mean_var:>14.6e} {row.stderr:>12.3e}")
        pairs = pairwise_consistent(rows)
        failed = [(a, b) for a, b, ok in pairs if not ok]
        typer.echo(f"pairwise consistent within 95% joint bounds: {len(pairs) - len(failed)}/{len(pairs)}")
        if config.output:
            write_json({
                "manifest": build_manifest(config, wall),
                "rows": rows,
                "inconsistent_pairs": failed,
            }, config.output)


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    config_path: Optional[pathlib.Path] = typer.Option(None, "--config", help="Flat TOML experiment configuration"),
    scan: str = typer.Option("positions", "--scan", help="positions, chi, size or comparison"),
    family: Optional[str] = typer.Option(None, "--family", help="mps, ttns or mera"),
    branching: Optional[int] = typer.Option(None, "--branching", help="Branching ratio b (2 or 3)"),
    chi: Optional[int] = typer.Option(None, "--chi", help="Bond dimension"),
    d: Optional[int] = typer.Option(None, "--d", help="Physical dimension (MPS only; defaults to chi)"),
    size: Optional[int] = typer.Option(None, "--size", help="Sites L (MPS) or layers T (TTNS/MERA)"),
    homogeneous: Optional[bool] = typer.Option(None, "--homogeneous/--heterogeneous", help="Share tensors within a layer"),
    trotter_steps: Optional[int] = typer.Option(None, "--trotter-steps", help="Brickwall steps per tensor (0 = full)"),
    interaction_width: Optional[int] = typer.Option(None, "--interaction-width", help="Sites per Hamiltonian term"),
    tensor_kind: Optional[str] = typer.Option(None, "--tensor-kind", help="site, isometry or disentangler"),
    n_samples: Optional[int] = typer.Option(None, "--n-samples", help="Number of Haar samples"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed"),
    positions: Optional[str] = typer.Option(None, "--positions", help="Comma-separated sites or layers"),
    fit_min: Optional[int] = typer.Option(None, "--fit-min", help="First layer of the fit window"),
    fit_max: Optional[int] = typer.Option(None, "--fit-max", help="Last layer of the fit window"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker processes (default: ISOTNS_WORKERS or CPU count)"),
    chunk_size: Optional[int] = typer.Option(None, "--chunk-size", help="Samples per chunk"),
    output: Optional[str] = typer.Option(None, "--output", help="Result file"),
    fmt: Optional[str] = typer.Option(None, "--format", help="csv or json"),
    chis: Optional[str] = typer.Option(None, "--chis", help="Comma-separated bond dimensions for --scan chi"),
    sizes: Optional[str] = typer.Option(None, "--sizes", help="Comma-separated layer counts for --scan size"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug output"),
):
    """
    Run a Monte Carlo gradient-variance study.

    Every configuration key can be given in the --config file or as the flag of the
    same name; flags win.
    """
    if ctx.invoked_subcommand is not None:
        return
    setup_logging(debug)
    if scan not in SCANS:
        typer.echo(f"Error: --scan must be one of {', '.join(SCANS)}", err=True)
        raise typer.Exit(1)
    overrides = {
        "family": family,
        "branching": branching,
        "chi": chi,
        "d": d,
        "size": size,
        "homogeneous": homogeneous,
        "trotter_steps": trotter_steps,
        "interaction_width": interaction_width,
        "tensor_kind": tensor_kind,
        "n_samples": n_samples,
        "seed": seed,
        "positions": parse_int_list(positions, "--positions"),
        "fit_min": fit_min,
        "fit_max": fit_max,
        "workers": workers,
        "chunk_size": chunk_size,
        "output": output,
        "format": fmt,
        "chis": parse_int_list(chis, "--chis"),
        "sizes": parse_int_list(sizes, "--sizes"),
    }
    with exit_codes(debug):
        config = load_config(config_path, overrides)
        logger.debug("Running %s scan for %s", scan, config.spec.label())
        run_sample(config, scan)
