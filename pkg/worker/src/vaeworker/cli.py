"""Command-line entry point for the protocol worker."""

from __future__ import annotations

import click

from .detect import Evaluator
from .protocol import serve


@click.command()
@click.option("--dataset-seed", type=int, default=0, show_default=True,
              help="Seed for the synthetic dataset.")
@click.option("--train-seed", type=int, default=0, show_default=True,
              help="Seed for weight init and batch shuffling.")
@click.option("--epochs", type=int, default=20, show_default=True,
              help="Training epochs per evaluation.")
def main(dataset_seed: int, train_seed: int, epochs: int) -> None:
    """Serve VAE anomaly-detection evaluations over stdin/stdout.

    Each stdin line {"id": N, "x": {...}} trains a VAE on the synthetic
    dataset (memoized across threshold-only changes) and replies with
    {"id": N, "objective": 1 - mean F1} or a failure line.
    """
    if epochs < 1:
        raise click.BadParameter("epochs must be >= 1")
    serve(Evaluator(dataset_seed, train_seed, epochs))


if __name__ == "__main__":
    main()
