from pathlib import Path
from typing import Optional

import click

from src.commands.options import (
    blend_option,
    dataset_options,
    importance_options,
    importance_provider,
    check_matched_blend,
    jobs_option,
    match_data_step_option,
    parse_fractions,
    train_config,
    training_options,
)
from src.middlewares import run_command
from src.schemas.training import Method
from src.services import dataset_service, eval_service
from src.services.utils import manifest_path_for, output_set, write_manifest


@click.command("curve", help="Mean test accuracy of both methods over increasing train fractions")
@dataset_options
@importance_options
@click.option(
    "--fractions",
    callback=parse_fractions,
    default="0.1,0.2,0.4,0.8",
    show_default=True,
    help="Comma-separated, strictly increasing train fractions",
)
@click.option("--trials", type=click.IntRange(min=1), default=20, show_default=True)
@blend_option
@match_data_step_option
@training_options
@jobs_option
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@run_command
def curve(
    data_path: Path,
    schema_path: Path,
    importance_path: Optional[Path],
    importance_scope: str,
    fractions: Optional[list[float]],
    trials: int,
    p: float,
    match_data_step: bool,
    learning_rate: float,
    epochs: int,
    hidden: Optional[list[int]],
    seed: int,
    init_range: float,
    jobs: int,
    out_path: Path,
):
    if not fractions:
        raise click.UsageError("--fractions needs at least one value")
    check_matched_blend(match_data_step, p)
    cfg = train_config(learning_rate, epochs, hidden, seed, init_range)
    ds = dataset_service.load_dataset(data_path, schema_path)
    provider = importance_provider(ds, importance_path, importance_scope)
    result = eval_service.learning_curve(
        ds,
        [Method.PLAIN, Method.CANN],
        fractions,
        cfg,
        trials,
        provider,
        p=p,
        jobs=jobs,
        match_data_step=match_data_step,
    )

    flags = {k: v for k, v in click.get_current_context().params.items() if k != "jobs"}
    with output_set() as outputs:
        eval_service.write_curve_csv(result, outputs.claim(out_path))
        write_manifest(outputs, manifest_path_for(out_path), "curve", flags, ds.fingerprint())

    for point in result.points:
        click.echo(
            f"{point.method.value:<6} {point.train_fraction:4.2f}  "
            f"mean {point.mean:6.2f}%  std {point.std:5.2f}"
        )
