"""Tests for fold-local preprocessing and the 5x2 split plan."""

import numpy as np
import pytest

from copulasmote import (
    GlobalMissingColumnError,
    InvalidInputError,
    SplitPlan,
    TrainStandardScaler,
    ZeroMedianImputer,
    make_5x2_splits,
    stratified_subsample,
)


def col(*values):
    return np.array(values, dtype=np.float64).reshape(-1, 1)


# -- zero-median imputer --------------------------------------------------------


def test_imputer_median_of_nonzero_training_values():
    imp = ZeroMedianImputer(zero_coded_columns=(0,)).fit(col(0.0, 2.0, 4.0))
    assert imp.medians_ == {0: 3.0}
    got = imp.transform(col(0.0, 2.0, 4.0))
    assert np.array_equal(got[:, 0], [3.0, 2.0, 4.0])


def test_imputer_test_zeros_get_train_median():
    imp = ZeroMedianImputer(zero_coded_columns=(0,)).fit(col(0.0, 2.0, 4.0))
    got = imp.transform(col(0.0, 8.0))
    assert np.array_equal(got[:, 0], [3.0, 8.0])


def test_imputer_without_declared_columns_is_identity():
    X = np.array([[0.0, 1.0], [2.0, 0.0], [4.0, 5.0]])
    imp = ZeroMedianImputer().fit(X)
    assert np.array_equal(imp.transform(X), X)


def test_imputer_leaves_undeclared_columns_alone():
    X = np.array([[0.0, 0.0], [2.0, 0.0], [4.0, 5.0]])
    imp = ZeroMedianImputer(zero_coded_columns=(0,)).fit(X)
    got = imp.transform(X)
    assert np.array_equal(got[:, 1], [0.0, 0.0, 5.0])
    assert np.array_equal(got[:, 0], [3.0, 2.0, 4.0])


def test_imputer_all_zero_column_raises_named_error():
    X = np.array([[0.0, 1.0], [0.0, 2.0], [0.0, 3.0]])
    with pytest.raises(GlobalMissingColumnError, match="column 0"):
        ZeroMedianImputer(zero_coded_columns=(0,)).fit(X)


def test_imputer_validates_columns_and_width():
    with pytest.raises(InvalidInputError):
        ZeroMedianImputer(zero_coded_columns=(5,)).fit(col(1.0, 2.0))
    imp = ZeroMedianImputer(zero_coded_columns=(0,)).fit(col(1.0, 2.0))
    with pytest.raises(InvalidInputError):
        imp.transform(np.ones((2, 3)))


def test_imputer_does_not_mutate_input():
    X = col(0.0, 2.0, 4.0)
    imp = ZeroMedianImputer(zero_coded_columns=(0,)).fit(X)
    imp.transform(X)
    assert X[0, 0] == 0.0


# -- standard scaler ------------------------------------------------------------


def test_scaler_simple_column():
    sc = TrainStandardScaler().fit(col(0.0, 2.0, 4.0))
    assert sc.mean_[0] == pytest.approx(2.0)
    assert sc.scale_[0] == pytest.approx(2.0)
    got = sc.transform(col(0.0, 2.0, 4.0))
    assert np.allclose(got[:, 0], [-1.0, 0.0, 1.0])


def test_scaler_constant_column_flagged_with_unit_scale():
    X = np.column_stack([np.full(5, 7.0), np.arange(5.0)])
    sc = TrainStandardScaler().fit(X)
    assert sc.scale_[0] == 1.0
    assert "constant_column_0" in sc.flags_
    got = sc.transform(X)
    assert np.array_equal(got[:, 0], np.zeros(5))


def test_scaler_train_output_is_standardized():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((200, 4)) * 3.0 + 5.0
    sc = TrainStandardScaler().fit(X)
    got = sc.transform(X)
    assert np.all(np.abs(got.mean(axis=0)) < 1e-12)
    assert np.all(np.abs(got.std(axis=0, ddof=1) - 1.0) < 1e-12)


def test_scaler_test_rows_use_train_statistics():
    rng = np.random.default_rng(2)
    train = rng.standard_normal((50, 2))
    test = rng.standard_normal((20, 2)) + 10.0
    sc = TrainStandardScaler().fit(train)
    got = sc.transform(test)
    assert np.allclose(got, (test - train.mean(axis=0)) / train.std(axis=0, ddof=1))


def test_scaler_width_mismatch():
    sc = TrainStandardScaler().fit(np.ones((3, 2)) * [1.0, 2.0])
    with pytest.raises(InvalidInputError):
        sc.transform(np.ones((3, 3)))


def test_transforms_ignore_later_test_mutation():
    # fitted statistics and transformed outputs must not depend on anything
    # that happens to held-out rows after fitting
    rng = np.random.default_rng(3)
    train = np.abs(rng.standard_normal((30, 3))) + 0.5
    test = np.abs(rng.standard_normal((10, 3))) + 0.5
    train[:5, 0] = 0.0

    imp = ZeroMedianImputer(zero_coded_columns=(0,)).fit(train)
    sc = TrainStandardScaler().fit(imp.transform(train))
    medians_before = dict(imp.medians_)
    mean_before = sc.mean_.copy()
    scale_before = sc.scale_.copy()
    out_before = sc.transform(imp.transform(test))

    poisoned = test.copy()
    poisoned[:] = 1e9
    imp.transform(poisoned)
    sc.transform(poisoned)

    assert imp.medians_ == medians_before
    assert np.array_equal(sc.mean_, mean_before)
    assert np.array_equal(sc.scale_, scale_before)
    assert np.array_equal(sc.transform(imp.transform(test)), out_before)


# -- 5x2 split plan -------------------------------------------------------------


def test_splits_exact_stratification():
    y = np.array([0] * 6 + [1] * 4)
    plan = make_5x2_splits(y, master_seed=0)
    for half_a, half_b in plan.iterations:
        for half in (half_a, half_b):
            assert int(np.sum(y[half] == 0)) == 3
            assert int(np.sum(y[half] == 1)) == 2


def test_splits_odd_class_count_differs_by_one():
    y = np.array([0] * 5 + [1] * 4)
    plan = make_5x2_splits(y, master_seed=1)
    for half_a, half_b in plan.iterations:
        counts = sorted([int(np.sum(y[half_a] == 0)), int(np.sum(y[half_b] == 0))])
        assert counts == [2, 3]


def test_splits_halves_partition_rows():
    y = np.array([0] * 13 + [1] * 7)
    plan = make_5x2_splits(y, master_seed=2)
    for half_a, half_b in plan.iterations:
        together = np.concatenate([half_a, half_b])
        assert sorted(together.tolist()) == list(range(20))


def test_splits_deterministic_and_seed_sensitive():
    y = np.array([0] * 10 + [1] * 6)
    p1 = make_5x2_splits(y, master_seed=7)
    p2 = make_5x2_splits(y, master_seed=7)
    p3 = make_5x2_splits(y, master_seed=8)
    for (a1, b1), (a2, b2) in zip(p1.iterations, p2.iterations):
        assert np.array_equal(a1, a2) and np.array_equal(b1, b2)
    assert any(
        not np.array_equal(a1, a3)
        for (a1, _), (a3, _) in zip(p1.iterations, p3.iterations)
    )


def test_splits_folds_cover_each_row_five_times_as_test():
    y = np.array([0] * 9 + [1] * 5)
    plan = make_5x2_splits(y, master_seed=3)
    test_hits = np.zeros(14, dtype=int)
    folds = list(plan.folds())
    assert [(i, r) for i, r, _, _ in folds] == [
        (i, r) for i in range(1, 6) for r in (1, 2)
    ]
    for _, _, train_idx, test_idx in folds:
        assert np.intersect1d(train_idx, test_idx).size == 0
        test_hits[test_idx] += 1
    assert np.all(test_hits == 5)


def test_splits_train_and_test_swap_within_iteration():
    y = np.array([0] * 8 + [1] * 4)
    plan = make_5x2_splits(y, master_seed=4)
    folds = list(plan.folds())
    for i in range(5):
        _, _, tr1, te1 = folds[2 * i]
        _, _, tr2, te2 = folds[2 * i + 1]
        assert np.array_equal(tr1, te2)
        assert np.array_equal(te1, tr2)


def test_splits_reject_tiny_classes():
    with pytest.raises(InvalidInputError):
        make_5x2_splits(np.array([0, 0, 0, 1]), master_seed=0)
    with pytest.raises(InvalidInputError):
        make_5x2_splits(np.zeros(6, dtype=int), master_seed=0)


def test_split_plan_is_frozen():
    plan = make_5x2_splits(np.array([0, 0, 1, 1]), master_seed=0)
    assert isinstance(plan, SplitPlan)
    with pytest.raises(AttributeError):
        plan.master_seed = 9


# -- stratified subsample -------------------------------------------------------


def test_subsample_proportional_counts():
    y = np.array([0] * 70 + [1] * 30)
    idx = stratified_subsample(y, 10, seed=0)
    assert idx.size == 10
    assert int(np.sum(y[idx] == 0)) == 7
    assert int(np.sum(y[idx] == 1)) == 3


def test_subsample_largest_remainder_tie_goes_to_lower_class():
    y = np.array([0] * 7 + [1] * 3)
    idx = stratified_subsample(y, 5, seed=1)
    # ideal counts (3.5, 1.5): one leftover seat, tie on remainders,
    # stable ordering hands it to class 0
    assert int(np.sum(y[idx] == 0)) == 4
    assert int(np.sum(y[idx] == 1)) == 1


def test_subsample_deterministic_sorted_unique():
    y = np.array([0] * 40 + [1] * 20)
    a = stratified_subsample(y, 30, seed=5)
    b = stratified_subsample(y, 30, seed=5)
    assert np.array_equal(a, b)
    assert np.array_equal(a, np.sort(a))
    assert np.unique(a).size == a.size


def test_subsample_bounds():
    y = np.array([0, 0, 1, 1])
    with pytest.raises(InvalidInputError):
        stratified_subsample(y, 0, seed=0)
    with pytest.raises(InvalidInputError):
        stratified_subsample(y, 5, seed=0)
    assert stratified_subsample(y, 4, seed=0).size == 4
