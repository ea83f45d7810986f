from pathlib import Path
from typing import Optional

import click
import numpy as np
import pandas as pd

from src.commands.options import (
    blend_option,
    dataset_options,
    open_fraction,
    train_config,
    training_options,
)
from src.core.logger import logger, training_logger
from src.middlewares import run_command
from src.models.network import Network
from src.schemas.training import EpochLog, Method
from src.services import cann_service, dataset_service, network_service, stats_service
from src.services.utils import manifest_path_for, output_set, write_manifest


@click.command("train", help="Train one network on a seeded split and save it with its epoch log")
@dataset_options
@click.option(
    "--importance",
    "importance_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Importance file; required by --method cann unless --p 1",
)
@click.option(
    "--method",
    type=click.Choice([method.value for method in Method]),
    default=Method.CANN.value,
    show_default=True,
)
@blend_option
@training_options
@click.option("--train-fraction", type=open_fraction, default=0.5, show_default=True)
@click.option(
    "--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path)
)
@click.option(
    "--log",
    "log_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Per-epoch CSV log (default: next to --out with a .log.csv suffix)",
)
@run_command
def train(
    data_path: Path,
    schema_path: Path,
    importance_path: Optional[Path],
    method: str,
    p: float,
    learning_rate: float,
    epochs: int,
    hidden: Optional[list[int]],
    seed: int,
    init_range: float,
    train_fraction: float,
    out_path: Path,
    log_path: Optional[Path],
):
    method = Method(method)
    if method == Method.PLAIN and importance_path is not None:
        logger.warning("--importance is ignored by --method plain")
        importance_path = None
    if method == Method.CANN and p < 1.0 and importance_path is None:
        raise click.UsageError("--method cann with --p below 1 requires --importance")

    cfg = train_config(learning_rate, epochs, hidden, seed, init_range)
    ds = dataset_service.load_dataset(data_path, schema_path)
    trial_split = dataset_service.split(ds, train_fraction, cfg.seed)
    rows = np.asarray(trial_split.train_indices, dtype=np.intp)
    features, targets = ds.features[rows], ds.targets[rows]

    spec = None
    if importance_path is not None:
        matrix = stats_service.load_importance(importance_path, ds)
        spec = cann_service.build_importance(ds, matrix, trial_split.train_indices)

    history: list[EpochLog] = []

    def on_epoch_end(epoch: int, net: Network, state) -> None:
        if spec is None:
            data_error = network_service.squared_error(net, features, targets)
            correlation_error, blended = None, data_error
        else:
            value = cann_service.composite_objective(net, features, targets, spec, p)
            data_error, correlation_error, blended = (
                value.data_error,
                value.correlation_error,
                value.blended,
            )
        entry = EpochLog(
            epoch=epoch,
            data_error=data_error,
            correlation_error=correlation_error,
            blended_error=blended,
            train_accuracy=network_service.accuracy(net, features, targets),
        )
        history.append(entry)
        training_logger.info(
            f"epoch {epoch}: E_D={entry.data_error:.6f} E_c={entry.correlation_error} "
            f"train accuracy {entry.train_accuracy:.2f}%"
        )

    net = network_service.init(
        cfg.layer_sizes(ds.n_features, ds.n_outputs), cfg.seed, cfg.init_range
    )
    if spec is None:
        trained = network_service.train_plain(net, ds, trial_split, cfg, on_epoch_end)
    else:
        trained = cann_service.train_cann(net, ds, trial_split, spec, cfg, p, on_epoch_end)

    test = np.asarray(trial_split.test_indices, dtype=np.intp)
    test_accuracy = network_service.accuracy(trained, ds.features[test], ds.targets[test])

    log_path = log_path or out_path.with_suffix(".log.csv")
    with output_set() as outputs:
        network_service.save_network(
            trained,
            outputs.claim(out_path),
            cfg,
            method,
            ds.fingerprint(),
            p=p if method == Method.CANN else None,
        )
        pd.DataFrame([entry.model_dump() for entry in history]).to_csv(
            outputs.claim(log_path), index=False, lineterminator="\n"
        )
        write_manifest(
            outputs,
            manifest_path_for(out_path),
            "train",
            click.get_current_context().params,
            ds.fingerprint(),
        )

    click.echo(f"test accuracy: {test_accuracy:.2f}% over {len(test)} instances")
