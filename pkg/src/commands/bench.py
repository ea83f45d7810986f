from pathlib import Path
from typing import Any, Optional

import click

from src.commands.options import (
    blend_option,
    check_matched_blend,
    dataset_options,
    importance_options,
    importance_provider,
    jobs_option,
    match_data_step_option,
    open_fraction,
    train_config,
    training_options,
)
from src.core.logger import logger
from src.middlewares import run_command
from src.schemas.reports import RunManifest, TrialReport
from src.schemas.training import Method
from src.services import dataset_service, eval_service, stats_service
from src.services.utils import build_manifest, output_set, write_manifest

MANIFEST_NAME = "manifest.json"
# flags that do not change any result file
_NEUTRAL_FLAGS = ("force", "jobs")


def result_flags(params: dict[str, Any]) -> dict[str, Any]:
    return {name: value for name, value in params.items() if name not in _NEUTRAL_FLAGS}


def check_existing_manifest(
    path: Path, flags: dict[str, Any], fingerprint: str, force: bool
) -> list[Path]:
    """
    Refuse to mix results of different runs in one directory.

    Returns:
            result files of a forced-over run, to be removed before writing
    """
    if not path.exists():
        return []
    try:
        existing = RunManifest.model_validate_json(path.read_text(encoding="utf-8"))
    except ValueError as e:
        if force:
            return []
        raise click.ClickException(f"{path} is not a readable manifest; use --force") from e

    current = build_manifest("bench", flags, fingerprint)
    same_run = (
        existing.command == current.command
        and existing.dataset_fingerprint == current.dataset_fingerprint
        and result_flags(existing.model_dump(mode="json")["flags"])
        == current.model_dump(mode="json")["flags"]
    )
    if same_run:
        return []
    if not force:
        raise click.ClickException(
            f"{path.parent} holds results of a different run; use --force to overwrite"
        )
    logger.warning(f"Overwriting results of a different run in {path.parent}")
    return [path.parent / Path(name).name for name in existing.outputs if name != path.name]


@click.command("bench", help="Paired plain vs cann trials with optional chi-squared selection")
@dataset_options
@importance_options
@click.option("--trials", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--fraction", type=open_fraction, default=0.5, show_default=True)
@click.option(
    "--keep-fraction",
    type=click.FloatRange(0.0, 1.0, min_open=True),
    default=None,
    help="Also run the plain baseline on the best chi-squared features, e.g. 0.85",
)
@click.option(
    "--bins",
    type=click.IntRange(min=2),
    default=stats_service.DEFAULT_CHI2_BINS,
    show_default=True,
    help="Equal-frequency bins for continuous features in the chi-squared ranking",
)
@blend_option
@match_data_step_option
@training_options
@jobs_option
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@click.option("--force", is_flag=True, help="Overwrite results of a different run")
@run_command
def bench(
    data_path: Path,
    schema_path: Path,
    importance_path: Optional[Path],
    importance_scope: str,
    trials: int,
    fraction: float,
    keep_fraction: Optional[float],
    bins: int,
    p: float,
    match_data_step: bool,
    learning_rate: float,
    epochs: int,
    hidden: Optional[list[int]],
    seed: int,
    init_range: float,
    jobs: int,
    out_dir: Path,
    force: bool,
):
    check_matched_blend(match_data_step, p)
    cfg = train_config(learning_rate, epochs, hidden, seed, init_range)
    ds = dataset_service.load_dataset(data_path, schema_path)
    flags = result_flags(click.get_current_context().params)
    manifest_path = out_dir / MANIFEST_NAME
    stale = check_existing_manifest(manifest_path, flags, ds.fingerprint(), force)
    provider = importance_provider(ds, importance_path, importance_scope)

    reports: dict[str, TrialReport] = {
        "plain": eval_service.run_trials(ds, Method.PLAIN, cfg, trials, fraction, jobs=jobs),
        "cann": eval_service.run_trials(
            ds,
            Method.CANN,
            cfg,
            trials,
            fraction,
            importance=provider,
            p=p,
            jobs=jobs,
            match_data_step=match_data_step,
        ),
    }
    if keep_fraction is not None:
        reports["plain_selected"] = eval_service.run_feature_selected_trials(
            ds, keep_fraction, Method.PLAIN, cfg, trials, fraction, jobs=jobs, bins=bins
        )

    for path in stale:
        path.unlink(missing_ok=True)
    with output_set() as outputs:
        for name, report in reports.items():
            eval_service.write_trials_csv(report, outputs.claim(out_dir / f"{name}_trials.csv"))
            eval_service.write_report_json(report, outputs.claim(out_dir / f"{name}_report.json"))
        write_manifest(outputs, manifest_path, "bench", flags, ds.fingerprint())

    for name, report in reports.items():
        click.echo(
            f"{name:<15} mean {report.mean:6.2f}%  std {report.std:5.2f}  n={report.n_trials}"
        )
