import json

import numpy as np
import pytest

from voxsel.classifiers import KNearestNeighbors, MulticlassSVM
from voxsel.errors import DataError
from voxsel.evaluation import (CvConfig, SCHEME_LOO, cross_validate,
                               kfold_split, per_class_rates)


class TestKfoldSplit:
    def test_loo_coincidence(self):
        folds = kfold_split(10, CvConfig(k=10), labels=np.arange(10) % 2)
        # 10 samples, 10 folds -> warning-free only unstratified; with two
        # classes of 5 < k it falls back, still singleton folds
        assert sorted(np.bincount(folds)) == [1] * 10

    def test_polish_shape(self):
        labels = np.repeat(np.arange(5), 40)
        folds = kfold_split(200, CvConfig(k=10, seed=0), labels=labels)
        for f in range(10):
            members = labels[folds == f]
            assert (np.bincount(members, minlength=5) == 4).all()

    def test_seed_determinism(self):
        labels = np.repeat([0, 1], 20)
        a = kfold_split(40, CvConfig(k=5, seed=3), labels)
        b = kfold_split(40, CvConfig(k=5, seed=3), labels)
        np.testing.assert_array_equal(a, b)
        c = kfold_split(40, CvConfig(k=5, seed=4), labels)
        assert not np.array_equal(a, c)

    def test_small_class_falls_back(self):
        labels = np.array([0] * 17 + [1] * 3)
        with pytest.warns(UserWarning, match="unstratified"):
            folds = kfold_split(20, CvConfig(k=5, seed=0), labels)
        assert np.bincount(folds).tolist() == [4] * 5

    def test_loo_scheme(self):
        folds = kfold_split(7, CvConfig(scheme=SCHEME_LOO), labels=None)
        np.testing.assert_array_equal(folds, np.arange(7))

    def test_parse(self):
        assert CvConfig.parse("kfold:10").k == 10
        assert CvConfig.parse("loo").scheme == SCHEME_LOO
        with pytest.raises(DataError):
            CvConfig.parse("bootstrap")


class TestPerClassRates:
    def test_diagonal(self):
        recalls, macro, empty = per_class_rates(np.diag([3, 4, 5]))
        np.testing.assert_array_equal(recalls, 1.0)
        assert macro == 1.0 and not empty.any()

    def test_uniform_confusion(self):
        recalls, macro, _ = per_class_rates(np.full((5, 5), 2))
        np.testing.assert_allclose(recalls, 0.2)
        assert macro == pytest.approx(0.2)

    def test_hand_matrix(self):
        conf = np.array([[8, 1, 1], [2, 6, 2], [0, 0, 10]])
        recalls, macro, _ = per_class_rates(conf)
        np.testing.assert_allclose(recalls, [0.8, 0.6, 1.0])
        assert macro == pytest.approx((0.8 + 0.6 + 1.0) / 3)

    def test_empty_row_flagged(self):
        conf = np.array([[5, 0], [0, 0]])
        recalls, macro, empty = per_class_rates(conf)
        assert recalls[1] == 0.0 and empty[1] and not empty[0]
        assert macro == 1.0  # averaged over non-empty classes


class TestCrossValidate:
    def make_blobs(self, seed=0, n_each=40, spread=6.0):
        rng = np.random.default_rng(seed)
        means = spread * np.eye(5)
        X = np.vstack([rng.normal(m, 1.0, size=(n_each, 5)) for m in means])
        y = np.repeat([f"c{i}" for i in range(5)], n_each)
        return X, y

    def test_separable_blobs_high_accuracy(self):
        X, y = self.make_blobs()
        report = cross_validate(X, y, KNearestNeighbors(1),
                                CvConfig(k=10, seed=0))
        assert report.accuracy >= 0.95
        assert report.confusion.sum() == len(y)
        np.testing.assert_array_equal(report.confusion.sum(axis=1), 40)

    def test_empty_subset_rejected(self):
        X, y = self.make_blobs()
        with pytest.raises(DataError):
            cross_validate(X, y, KNearestNeighbors(1), CvConfig(k=5), columns=[])

    def test_single_class_rejected(self):
        X = np.random.default_rng(0).random((10, 3))
        with pytest.raises(DataError):
            cross_validate(X, ["a"] * 10, KNearestNeighbors(1), CvConfig(k=5))

    def test_label_permutation_chance_band(self):
        X, y = self.make_blobs()
        rng = np.random.default_rng(123)
        y_perm = rng.permutation(y)
        report = cross_validate(X, y_perm, KNearestNeighbors(1),
                                CvConfig(k=10, seed=0))
        assert 0.1 <= report.accuracy <= 0.35

    def test_loo_knn_with_duplicates(self):
        # duplicated points share labels -> each left-out point still has
        # its twin in training
        rng = np.random.default_rng(1)
        base = rng.normal(size=(15, 3))
        X = np.vstack([base, base])
        y = np.tile(np.arange(15) % 3, 2)
        report = cross_validate(X, y, KNearestNeighbors(1),
                                CvConfig(scheme=SCHEME_LOO))
        assert report.accuracy == 1.0

    def test_no_leakage_standardization(self):
        X, y = self.make_blobs(n_each=20)
        folds = kfold_split(len(y), CvConfig(k=5, seed=0), labels=y)
        train = folds != 0
        model = KNearestNeighbors(1).fit(X[train], y[train])
        np.testing.assert_allclose(model.scaler_.mean_, X[train].mean(axis=0))
        assert not np.allclose(model.scaler_.mean_, X.mean(axis=0))

    def test_fold_accuracies_and_meta(self):
        X, y = self.make_blobs(n_each=20)
        report = cross_validate(X, y, MulticlassSVM(epochs=20),
                                CvConfig(k=5, seed=0), meta={"tag": "t"})
        assert len(report.fold_accuracies) == 5
        assert report.meta["tag"] == "t"

    def test_report_json_and_csv(self):
        X, y = self.make_blobs(n_each=20)
        report = cross_validate(X, y, KNearestNeighbors(1), CvConfig(k=5, seed=0))
        doc = json.loads(report.to_json())
        assert set(doc) >= {"classes", "confusion", "accuracy",
                            "per_class_recall", "fold_accuracies"}
        csv_text = report.confusion_csv()
        assert csv_text.count("\n") == 6  # header + 5 classes

    def test_column_restriction(self):
        X, y = self.make_blobs()
        rng = np.random.default_rng(5)
        X_noise = np.hstack([rng.normal(size=(len(y), 2)), X])
        full = cross_validate(X_noise, y, KNearestNeighbors(1),
                              CvConfig(k=10, seed=0), columns=[2, 3, 4, 5, 6])
        assert full.accuracy >= 0.95

    def test_all_folds_failing_is_an_error(self):
        # adaboost cannot train on five classes; every fold fails
        from voxsel.classifiers import StumpAdaBoost
        X, y = self.make_blobs(n_each=20)
        with pytest.warns(UserWarning), pytest.raises(DataError):
            cross_validate(X, y, StumpAdaBoost(rounds=3), CvConfig(k=5, seed=0))
