from pathlib import Path
from typing import Optional

import click
import pandas as pd

from src.commands.options import dataset_options, open_fraction
from src.core.logger import logger
from src.middlewares import run_command
from src.schemas.importance import ImportanceScope
from src.services import dataset_service, stats_service
from src.services.utils import manifest_path_for, output_set, write_manifest


@click.command("importance", help="Compute target correlations for every feature/output pair")
@dataset_options
@click.option(
    "--scope",
    type=click.Choice([scope.value for scope in ImportanceScope]),
    default=ImportanceScope.FULL.value,
    show_default=True,
    help="Correlate over the whole dataset or over the train portion of a seeded split",
)
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Split seed (scope train)")
@click.option("--train-fraction", type=open_fraction, default=None, help="Split size (scope train)")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@run_command
def importance(
    data_path: Path,
    schema_path: Path,
    scope: str,
    seed: Optional[int],
    train_fraction: Optional[float],
    out_path: Path,
):
    scope = ImportanceScope(scope)
    if scope == ImportanceScope.TRAIN and (seed is None or train_fraction is None):
        raise click.UsageError("--scope train requires --seed and --train-fraction")
    if scope == ImportanceScope.FULL and (seed is not None or train_fraction is not None):
        logger.warning("--seed and --train-fraction are ignored with --scope full")
        seed, train_fraction = None, None

    ds = dataset_service.load_dataset(data_path, schema_path)
    indices = None
    if scope == ImportanceScope.TRAIN:
        indices = dataset_service.split(ds, train_fraction, seed).train_indices
    report = stats_service.compute_importance(ds, indices)

    with output_set() as outputs:
        stats_service.save_importance(
            report, ds, outputs.claim(out_path), scope, seed=seed, train_fraction=train_fraction
        )
        write_manifest(
            outputs,
            manifest_path_for(out_path),
            "importance",
            click.get_current_context().params,
            ds.fingerprint(),
        )

    summary = pd.DataFrame(
        report.correlation, index=report.feature_names, columns=report.output_labels
    )
    click.echo(summary.to_string(float_format=lambda v: f"{v:+.4f}"))
