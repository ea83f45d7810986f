import math

import numpy as np
import pytest

from src.core.exceptions import FingerprintMismatchError, MeanTableError
from src.schemas.importance import ImportanceScope
from src.services import stats_service
from src.services.stats_service import MeanTable


def brute_force_pearson(x, y) -> float:
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y)) / n
    sx = math.sqrt(sum((a - mx) ** 2 for a in x) / n)
    sy = math.sqrt(sum((b - my) ** 2 for b in y) / n)
    if sx == 0 or sy == 0:
        return 0.0
    return cov / (sx * sy)


def test_sample_cov_hand_values():
    assert stats_service.sample_cov([1, 2, 3], [1, 2, 3]) == pytest.approx(2 / 3)
    assert stats_service.sample_cov([1, 2, 3], [3, 2, 1]) == pytest.approx(-2 / 3)
    assert stats_service.sample_cov([4, 9, 1], [2, 2, 2]) == 0.0


def test_pearson_hand_values():
    assert stats_service.pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-12)
    assert stats_service.pearson([0.3, 1.7, 2.2], [0.3, 1.7, 2.2]) == pytest.approx(1.0)
    assert stats_service.pearson([1, 2, 3], [5, 5, 5]) is None


def test_pearson_is_symmetric_and_bounded():
    rng = np.random.default_rng(3)
    for _ in range(10):
        x, y = rng.normal(size=8), rng.normal(size=8)
        r = stats_service.pearson(x, y)
        assert r == pytest.approx(stats_service.pearson(y, x), abs=1e-15)
        assert -1.0 <= r <= 1.0


@pytest.mark.parametrize("seed", range(10))
def test_compute_importance_matches_brute_force(make_dataset, seed):
    rng = np.random.default_rng(seed)
    n, k = 15, 4
    features = rng.random((n, k))
    features[:, seed % k] = 0.5  # zero-variance column
    labels = rng.permutation(np.arange(n) % 3)
    ds = make_dataset(features, labels, n_classes=3)

    report = stats_service.compute_importance(ds)

    for f in range(k):
        for o in range(3):
            expected = brute_force_pearson(list(features[:, f]), list(ds.targets[:, o]))
            assert report.correlation[f, o] == pytest.approx(expected, abs=1e-12)
    assert not report.defined[seed % k].any()
    np.testing.assert_array_equal(report.correlation[seed % k], 0.0)


def test_feature_equal_to_output_has_unit_importance(make_dataset):
    labels = np.array([0, 1, 1, 0, 1, 0])
    features = np.column_stack([1.0 - labels, np.linspace(0, 1, 6)])
    report = stats_service.compute_importance(make_dataset(features, labels))
    assert report.correlation[0, 0] == pytest.approx(1.0)
    assert report.correlation[0, 1] == pytest.approx(-1.0)
    assert report.feature_names == ("f0", "f1")


def test_compute_importance_restricted_to_indices(random_dataset):
    ds = random_dataset(n_instances=20)
    rows = list(range(0, 20, 2))
    report = stats_service.compute_importance(ds, rows)
    full = stats_service.correlation_matrix(ds.features[rows], ds.targets[rows])
    np.testing.assert_array_equal(report.correlation, full.correlation)


def test_mean_table_init_and_update():
    table = MeanTable.from_values([0.2, 0.6])
    np.testing.assert_allclose(table.contributions, [0.1, 0.3])
    assert table.mean == pytest.approx(0.4)

    table.update(0, 0.8)
    assert table.mean == pytest.approx(0.7)

    before = float(table.mean)
    table.update(1, 0.6)
    assert table.mean == pytest.approx(before)


def test_mean_table_singleton_and_zeros():
    assert MeanTable.from_values([0.37]).mean == pytest.approx(0.37)
    assert MeanTable.from_values(np.zeros(5)).mean == 0.0


def test_mean_table_rejects_bad_index_and_empty_values():
    table = MeanTable.from_values([1.0, 2.0])
    with pytest.raises(MeanTableError):
        table.update(2, 1.0)
    with pytest.raises(MeanTableError):
        MeanTable.from_values([])


def test_mean_table_refresh_is_exact_and_idempotent():
    table = MeanTable.from_values([0.1, 0.2, 0.3])
    fresh = float(table.mean)
    table.refresh()
    assert table.mean == fresh
    assert table.mean == table.contributions.sum()


def test_mean_table_drift_stays_small_over_many_updates():
    rng = np.random.default_rng(0)
    n = 50
    table = MeanTable.from_values(rng.random(n))
    indices = rng.integers(0, n, size=200_000)
    values = rng.random(200_000)
    for i, value in zip(indices, values):
        table.update(int(i), value)

    assert table.drift() <= 1e-9
    exact = table.contributions.sum()
    table.refresh()
    assert abs(table.mean - exact) == 0.0


def test_mean_table_holds_matrix_entries():
    rng = np.random.default_rng(1)
    values = rng.random((6, 3, 2))
    table = MeanTable.from_values(values)
    np.testing.assert_allclose(table.mean, values.mean(axis=0), atol=1e-15)

    replacement = rng.random((3, 2))
    table.update(4, replacement)
    values[4] = replacement
    np.testing.assert_allclose(table.mean, values.mean(axis=0), atol=1e-15)


def test_chi_squared_of_perfectly_separating_table():
    table = np.array([[10, 0], [0, 10]])
    assert stats_service.contingency_chi_squared(table) == pytest.approx(20.0)


def test_chi_squared_ignores_empty_rows_and_degenerate_tables():
    assert stats_service.contingency_chi_squared(np.array([[10, 0], [0, 0], [0, 10]])) == (
        pytest.approx(20.0)
    )
    assert stats_service.contingency_chi_squared(np.array([[4, 6]])) == 0.0


def test_chi_squared_rank_puts_separating_feature_first(make_dataset):
    labels = np.repeat([0, 1], 10)
    separating = labels.astype(float)
    independent = np.tile([0.0, 1.0], 10)
    ds = make_dataset(np.column_stack([independent, separating]), labels)

    ranking = stats_service.chi_squared_rank(ds)

    assert [score.index for score in ranking] == [1, 0]
    assert ranking[0].score == pytest.approx(20.0)
    assert ranking[1].score == pytest.approx(0.0, abs=1e-12)
    assert ranking[0].name == "f1"


def test_chi_squared_rank_bins_continuous_features(informative_dataset):
    ranking = stats_service.chi_squared_rank(informative_dataset, bins=5)
    assert ranking[0].name == "x0"
    assert len(ranking) == informative_dataset.n_features


def test_importance_file_round_trip(random_dataset, tmp_path):
    ds = random_dataset()
    report = stats_service.compute_importance(ds)
    path = tmp_path / "importance.json"
    written = stats_service.save_importance(report, ds, path, ImportanceScope.FULL)

    assert len(written.entries) == ds.n_features * ds.n_outputs
    np.testing.assert_array_equal(stats_service.load_importance(path, ds), report.correlation)


def test_importance_file_refuses_other_dataset(random_dataset, tmp_path):
    ds = random_dataset(seed=0)
    path = tmp_path / "importance.json"
    stats_service.save_importance(
        stats_service.compute_importance(ds), ds, path, ImportanceScope.FULL
    )
    with pytest.raises(FingerprintMismatchError):
        stats_service.load_importance(path, random_dataset(seed=1))


def test_pearson_ignores_positive_affine_maps():
    rng = np.random.default_rng(4)
    x, y = rng.random(12), rng.random(12)
    assert stats_service.pearson(3.5 * x + 2.0, y) == pytest.approx(
        stats_service.pearson(x, y), abs=1e-12
    )


def test_updated_and_refreshed_table_equals_fresh_table():
    rng = np.random.default_rng(5)
    values = rng.random(20)
    table = MeanTable.from_values(values)
    for i in rng.integers(0, 20, size=100):
        values[i] = rng.random()
        table.update(int(i), values[i])
    table.refresh()
    assert table.mean == pytest.approx(MeanTable.from_values(values).mean, abs=1e-12)


def test_chi_squared_rank_is_a_permutation(random_dataset):
    ds = random_dataset(n_instances=40, n_features=7)
    ranking = stats_service.chi_squared_rank(ds, bins=4)
    assert sorted(score.index for score in ranking) == list(range(7))
