"""Option groups shared by the commands."""

from pathlib import Path
from typing import Optional

import click

from src.models.dataset import Dataset
from src.schemas.importance import ImportanceScope
from src.schemas.training import TrainConfig
from src.services import stats_service
from src.services.eval_service import FixedImportance, ImportanceProvider, ScopedImportance

_input_file = click.Path(exists=True, dir_okay=False, path_type=Path)
open_fraction = click.FloatRange(0.0, 1.0, min_open=True, max_open=True)


def _parse_list(value: Optional[str], cast, param_hint: str):
    if value is None or value.strip() == "":
        return None
    try:
        return [cast(part) for part in value.split(",")]
    except ValueError as e:
        raise click.BadParameter(
            f"expected a comma-separated list, got {value!r}", param_hint=param_hint
        ) from e


def parse_hidden(ctx, param, value: Optional[str]) -> Optional[list[int]]:
    return _parse_list(value, int, "--hidden")


def parse_fractions(ctx, param, value: Optional[str]) -> Optional[list[float]]:
    return _parse_list(value, float, "--fractions")


def dataset_options(func):
    func = click.option(
        "--schema",
        "schema_path",
        required=True,
        type=_input_file,
        help="JSON schema declaring column kinds and the class column",
    )(func)
    func = click.option("--data", "data_path", required=True, type=_input_file, help="CSV file")(
        func
    )
    return func


def importance_options(func):
    func = click.option(
        "--importance-scope",
        type=click.Choice([scope.value for scope in ImportanceScope]),
        default=ImportanceScope.TRAIN.value,
        show_default=True,
        help="Where target correlations come from when no --importance file is given",
    )(func)
    func = click.option(
        "--importance",
        "importance_path",
        type=_input_file,
        default=None,
        help="Importance file written by the importance command",
    )(func)
    return func


def blend_option(func):
    return click.option(
        "--p",
        "p",
        type=click.FloatRange(0.0, 1.0),
        default=0.5,
        show_default=True,
        help="Weight of the data error; 1 - p weights the correlation error",
    )(func)


def jobs_option(func):
    return click.option(
        "--jobs",
        type=click.IntRange(min=1),
        default=1,
        show_default=True,
        help="Trials run in parallel",
    )(func)


def training_options(func):
    func = click.option("--init-range", type=float, default=0.5, show_default=True)(func)
    func = click.option(
        "--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Base seed"
    )(func)
    func = click.option(
        "--hidden",
        callback=parse_hidden,
        default=None,
        help="Hidden layer sizes, e.g. 8,4 (default: one layer of max(4, ceil((K+C)/2)))",
    )(func)
    func = click.option("--epochs", type=int, default=50, show_default=True)(func)
    func = click.option(
        "--learning-rate", type=float, default=0.1, show_default=True, help="Step size alpha"
    )(func)
    return func


def train_config(
    learning_rate: float,
    epochs: int,
    hidden: Optional[list[int]],
    seed: int,
    init_range: float,
) -> TrainConfig:
    return TrainConfig(
        learning_rate=learning_rate,
        epochs=epochs,
        hidden_sizes=hidden,
        seed=seed,
        init_range=init_range,
    )


def importance_provider(
    ds: Dataset, importance_path: Optional[Path], importance_scope: str
) -> ImportanceProvider:
    if importance_path is not None:
        return FixedImportance(stats_service.load_importance(importance_path, ds))
    return ScopedImportance(ImportanceScope(importance_scope))


def match_data_step_option(func):
    return click.option(
        "--match-data-step",
        is_flag=True,
        help="Train cann at learning-rate / p so its data step equals the plain step",
    )(func)


def check_matched_blend(match_data_step: bool, p: float) -> None:
    if match_data_step and p == 0:
        raise click.UsageError("--match-data-step needs --p above 0")
