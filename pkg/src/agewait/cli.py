"""Command-line interface.

Every subcommand reads a JSON experiment config.  `sweep` reproduces the
policy-comparison studies and writes a CSV (optionally with a rendered
figure next to it); `solve` emits the optimal policy as JSON;
`zero-wait-check` prints the optimality verdict; `simulate` exports one
sample path as CSV.

The AGEWAIT_OUTPUT_DIR environment variable sets the default directory
for relative output paths.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .errors import AgeWaitError, ConfigError, InfeasibleError
from .experiment import (
    ExperimentConfig,
    check_zero_wait,
    run_experiment,
    write_rows_csv,
)
from .policies import ZeroWait
from .simulator import simulate
from .solver import reference_policy, solve_optimal


def _load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        raw = json.load(fh)
    return ExperimentConfig.from_dict(raw)


def _resolve_out(path: str | None, config: ExperimentConfig) -> Path:
    target = path or config.output
    if target is None:
        raise ConfigError("output", "no output path given")
    p = Path(target)
    base = os.environ.get("AGEWAIT_OUTPUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


@click.group()
def main():
    """Optimal information-update waiting policies."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
def solve(config_path, out_path):
    """Solve for the optimal policy and emit it as JSON."""
    try:
        config = _load_config(config_path)
        result = solve_optimal(config.solver, config.model, config.penalty)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except InfeasibleError as exc:
        click.echo(f"infeasible: {exc}", err=True)
        sys.exit(2)
    payload = json.dumps(
        result.to_dict(config.model, config.solver.y_grid), indent=2)
    if out_path or config.output:
        _resolve_out(out_path, config).write_text(payload + "\n")
    else:
        click.echo(payload)


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
@click.option("--seed", default=None, type=int,
              help="Override the simulation seed from the config.")
@click.option("--plot/--no-plot", default=False,
              help="Render a PNG figure next to the CSV.")
def sweep(config_path, out_path, seed, plot):
    """Run a parameter sweep and write one CSV row per (value, policy)."""
    try:
        config = _load_config(config_path)
        rows = run_experiment(config, seed_override=seed)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    target = _resolve_out(out_path, config)
    write_rows_csv(rows, target)
    click.echo(f"wrote {len(rows)} rows to {target}")
    if plot:
        from .plotting import plot_sweep

        fig_path = target.with_suffix(".png")
        plot_sweep(rows, config.sweep_variable, fig_path)
        click.echo(f"wrote figure to {fig_path}")
    if rows and all(r.error is not None for r in rows):
        sys.exit(2)


@main.command("zero-wait-check")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
def zero_wait_check(config_path):
    """Report whether the zero-wait policy is optimal."""
    try:
        config = _load_config(config_path)
        report = check_zero_wait(config)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except InfeasibleError as exc:
        click.echo(f"infeasible: {exc}", err=True)
        sys.exit(2)
    click.echo(f"verdict: {report['verdict']}")
    click.echo(f"reason: {report['reason']}")
    details = report["details"]
    if "second_moment" in details:
        click.echo(f"E[Y^2] = {details['second_moment']!r}")
        click.echo(f"2 y_inf E[Y] = {details['threshold']!r}")
    for key in ("rho", "y_inf", "mean"):
        if key in details and details[key] is not None:
            click.echo(f"{key} = {details[key]!r}")


@main.command("simulate")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
@click.option("--seed", default=None, type=int)
def simulate_cmd(config_path, out_path, seed):
    """Simulate one sample path and export its stages as CSV."""
    try:
        config = _load_config(config_path)
        if config.simulation is None:
            raise ConfigError("simulation", "missing")
        kind = config.policies[0] if config.policies else "zero_wait"
        if kind == "optimal":
            policy = solve_optimal(config.solver, config.model,
                                   config.penalty).policy
        elif kind == "zero_wait":
            policy = ZeroWait()
        else:
            policy = reference_policy(kind, config.solver, config.model)
        path_seed = config.simulation.seed if seed is None else seed
        path = simulate(policy, config.model, config.penalty,
                        config.simulation.n_stages, path_seed)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except InfeasibleError as exc:
        click.echo(f"infeasible: {exc}", err=True)
        sys.exit(2)
    target = _resolve_out(out_path, config)
    path.write_csv(target)
    click.echo(f"simulated {path.n_stages} stages, "
               f"average penalty {path.ratio!r}; wrote {target}")


if __name__ == "__main__":
    main()
