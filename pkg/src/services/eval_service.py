"""Repeated seeded trials, the chi-squared baseline and learning curves."""

from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.core.ctx_vars import run_id_ctx_var
from src.core.exceptions import EvaluationError
from src.core.logger import detach_file_handlers, logger
from src.models.dataset import Dataset, Split
from src.schemas.importance import ImportanceScope
from src.schemas.reports import CurvePoint, LearningCurve, TrialFingerprint, TrialReport
from src.schemas.training import Method, TrainConfig
from src.services import cann_service, dataset_service, network_service, stats_service

DEFAULT_P = 0.5


class FixedImportance:
    """Target correlations supplied up front, e.g. from an importance file."""

    source = "file"

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=np.float64)

    def __call__(self, ds: Dataset, split: Split) -> np.ndarray:
        if self.matrix.shape != (ds.n_features, ds.n_outputs):
            raise EvaluationError(
                f"importance is {self.matrix.shape}, dataset needs "
                f"{(ds.n_features, ds.n_outputs)}"
            )
        return self.matrix

    def select(self, feature_indices: Sequence[int]) -> "FixedImportance":
        return FixedImportance(self.matrix[np.asarray(feature_indices, dtype=np.intp)])


class ScopedImportance:
    """Target correlations measured on the full dataset or on each trial's train portion."""

    def __init__(self, scope: ImportanceScope = ImportanceScope.TRAIN):
        self.scope = ImportanceScope(scope)

    @property
    def source(self) -> str:
        return self.scope.value

    def __call__(self, ds: Dataset, split: Split) -> np.ndarray:
        indices = split.train_indices if self.scope == ImportanceScope.TRAIN else None
        return stats_service.compute_importance(ds, indices).correlation

    def select(self, feature_indices: Sequence[int]) -> "ScopedImportance":
        return self


ImportanceProvider = FixedImportance | ScopedImportance


def run_trial(
    ds: Dataset,
    method: Method,
    cfg: TrainConfig,
    seed: int,
    train_fraction: float,
    importance: Optional[ImportanceProvider] = None,
    p: float = DEFAULT_P,
    match_data_step: bool = False,
) -> float:
    """One split + init + train under `seed`; returns test accuracy in percent."""
    token = run_id_ctx_var.set(f"{method.value}-{seed}")
    try:
        trial_split = dataset_service.split(ds, train_fraction, seed)
        trial_cfg = cfg.model_copy(update={"seed": seed})
        net = network_service.init(
            trial_cfg.layer_sizes(ds.n_features, ds.n_outputs), seed, trial_cfg.init_range
        )
        if method == Method.CANN:
            if importance is None:
                raise EvaluationError("cann trials need target correlations")
            spec = cann_service.build_importance(
                ds, importance(ds, trial_split), trial_split.train_indices
            )
            if match_data_step:
                trial_cfg = cann_service.matched_config(trial_cfg, p)
            trained = cann_service.train_cann(net, ds, trial_split, spec, trial_cfg, p)
        else:
            trained = network_service.train_plain(net, ds, trial_split, trial_cfg)

        test = np.asarray(trial_split.test_indices, dtype=np.intp)
        return network_service.accuracy(trained, ds.features[test], ds.targets[test])
    finally:
        run_id_ctx_var.reset(token)


def _run_trial_in_worker(*args) -> float:
    detach_file_handlers()
    return run_trial(*args)


def run_trials(
    ds: Dataset,
    method: Method,
    cfg: TrainConfig,
    n_trials: int,
    train_fraction: float,
    importance: Optional[ImportanceProvider] = None,
    p: float = DEFAULT_P,
    jobs: int = 1,
    keep_fraction: Optional[float] = None,
    match_data_step: bool = False,
) -> TrialReport:
    """
    Trial i uses seed cfg.seed + i for both its split and its initialization,
    so two methods run with the same cfg.seed see identical splits.

    With `match_data_step`, cann trials train at alpha / p: their data step
    equals the plain step under cfg and the correlation term is added on top.
    """
    method = Method(method)
    if n_trials < 1:
        raise EvaluationError("at least one trial is required")
    if method == Method.CANN and importance is None:
        raise EvaluationError("cann trials need target correlations")
    if method == Method.PLAIN and importance is not None:
        raise EvaluationError("plain trials take no target correlations")
    cann_service.check_blend(p)
    matched = match_data_step and method == Method.CANN
    if matched and p == 0:
        raise EvaluationError("p=0 has no data step to match")
    learning_rate = cfg.learning_rate
    if matched:
        learning_rate = cann_service.matched_config(cfg, p).learning_rate

    seeds = [cfg.seed + i for i in range(n_trials)]
    logger.info(
        f"Running {n_trials} {method.value} trials at train fraction {train_fraction} "
        f"with {jobs} job(s)"
    )
    accuracies = Parallel(n_jobs=jobs)(
        delayed(_run_trial_in_worker)(
            ds, method, cfg, seed, train_fraction, importance, p, match_data_step
        )
        for seed in seeds
    )

    fingerprint = TrialFingerprint(
        dataset_fingerprint=ds.fingerprint(),
        method=method,
        base_seed=cfg.seed,
        seeds=seeds,
        train_fraction=train_fraction,
        p=p if method == Method.CANN else None,
        learning_rate=learning_rate,
        matched_data_step=matched,
        epochs=cfg.epochs,
        init_range=cfg.init_range,
        layer_sizes=cfg.layer_sizes(ds.n_features, ds.n_outputs),
        keep_fraction=keep_fraction,
        importance_source=importance.source if importance is not None else None,
    )
    report = TrialReport.from_accuracies(list(accuracies), fingerprint)
    logger.info(f"{method.value}: mean accuracy {report.mean:.2f} (std {report.std:.2f})")
    return report


def select_top_features(
    ds: Dataset, keep_fraction: float, bins: int = stats_service.DEFAULT_CHI2_BINS
) -> list[int]:
    """Indices of the round(keep_fraction * K) best chi-squared features, in column order."""
    if not 0 < keep_fraction <= 1:
        raise EvaluationError(f"keep fraction {keep_fraction} is outside (0, 1]")
    n_keep = round(keep_fraction * ds.n_features)
    if n_keep == 0:
        raise EvaluationError(f"keep fraction {keep_fraction} retains no features")
    ranking = stats_service.chi_squared_rank(ds, bins)
    return sorted(score.index for score in ranking[:n_keep])


def run_feature_selected_trials(
    ds: Dataset,
    keep_fraction: float,
    method: Method,
    cfg: TrainConfig,
    n_trials: int,
    train_fraction: float,
    importance: Optional[ImportanceProvider] = None,
    p: float = DEFAULT_P,
    jobs: int = 1,
    bins: int = stats_service.DEFAULT_CHI2_BINS,
    match_data_step: bool = False,
) -> TrialReport:
    kept = select_top_features(ds, keep_fraction, bins)
    logger.info(f"Chi-squared selection keeps {len(kept)} of {ds.n_features} features")
    selected = dataset_service.select_features(ds, kept)
    if importance is not None:
        importance = importance.select(kept)
    return run_trials(
        selected,
        method,
        cfg,
        n_trials,
        train_fraction,
        importance=importance,
        p=p,
        jobs=jobs,
        keep_fraction=keep_fraction,
        match_data_step=match_data_step,
    )


def learning_curve(
    ds: Dataset,
    methods: Sequence[Method],
    fractions: Sequence[float],
    cfg: TrainConfig,
    n_trials: int,
    importance: Optional[ImportanceProvider] = None,
    p: float = DEFAULT_P,
    jobs: int = 1,
    match_data_step: bool = False,
) -> LearningCurve:
    """Mean test accuracy per method at each train fraction, paired seeds throughout."""
    fractions = [float(f) for f in fractions]
    if not fractions:
        raise EvaluationError("a learning curve needs at least one fraction")
    if any(b <= a for a, b in zip(fractions, fractions[1:])):
        raise EvaluationError("fractions must be strictly increasing")
    for fraction in fractions:
        n_train = round(fraction * ds.n_instances)
        if not 0 < fraction < 1 or n_train == 0 or n_train == ds.n_instances:
            raise EvaluationError(f"fraction {fraction} leaves an empty train or test set")

    points = []
    for fraction in fractions:
        for method in methods:
            method = Method(method)
            report = run_trials(
                ds,
                method,
                cfg,
                n_trials,
                fraction,
                importance=importance if method == Method.CANN else None,
                p=p,
                jobs=jobs,
                match_data_step=match_data_step,
            )
            points.append(
                CurvePoint(
                    method=method,
                    train_fraction=fraction,
                    mean=report.mean,
                    std=report.std,
                    n_trials=report.n_trials,
                )
            )
    return LearningCurve(fractions=fractions, points=points)


def write_trials_csv(report: TrialReport, path: Path | str) -> None:
    frame = pd.DataFrame(
        {
            "trial": range(report.n_trials),
            "seed": report.fingerprint.seeds,
            "method": report.method.value,
            "accuracy": report.accuracies,
        }
    )
    frame.to_csv(path, index=False, lineterminator="\n")


def write_report_json(report: TrialReport, path: Path | str) -> None:
    Path(path).write_text(report.model_dump_json(indent=2), encoding="utf-8")


def write_curve_csv(curve: LearningCurve, path: Path | str) -> None:
    frame = pd.DataFrame([point.model_dump(mode="json") for point in curve.points])
    frame = frame.rename(columns={"mean": "mean_accuracy", "std": "std_accuracy"})
    frame.to_csv(path, index=False, lineterminator="\n")
