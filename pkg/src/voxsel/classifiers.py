"""From-scratch classifiers with an sklearn-style estimator API.

Every trainer is deterministic given (data, params, seed). Feature
standardization is fitted inside ``fit`` on the training data only and its
statistics travel with the model, so cross-validation never leaks test
statistics. Models serialize to a versioned JSON document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from .errors import DataError, TrainingError
from .validation import check_matrix, check_X_y, check_n_features

CLASSIFIER_KINDS = ("knn", "msvm", "mlp", "adaboost", "pca_knn")

MODEL_FORMAT = "voxsel-model"
MODEL_VERSION = 1

PERFECT_STUMP_ALPHA = 10.0  # capped vote when a stump has zero error


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for every classifier kind."""

    knn_k: int = 1
    svm_lambda: float = 1e-3
    svm_epochs: int = 100
    mlp_hidden: int = 20
    mlp_lr: float = 0.05
    mlp_epochs: int = 500
    boost_rounds: int = 50
    pca_dims: int = 10
    seed: int = 0

    def __post_init__(self):
        if min(self.knn_k, self.svm_epochs, self.mlp_hidden, self.mlp_epochs,
               self.boost_rounds, self.pca_dims) < 0:
            raise DataError("counts must be non-negative", code="bad-config")
        if self.mlp_lr <= 0 or self.svm_lambda <= 0:
            raise DataError("rates must be positive", code="bad-config")


class Standardizer:
    """Per-column z-scoring with the statistics of the fitting data."""

    def fit(self, X):
        X = check_matrix(X)
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        self.scale_ = scale
        return self

    def transform(self, X):
        return (check_matrix(X) - self.mean_) / self.scale_

    def to_payload(self):
        return {"mean": self.mean_.tolist(), "scale": self.scale_.tolist()}

    @classmethod
    def from_payload(cls, payload):
        obj = cls()
        obj.mean_ = np.asarray(payload["mean"], dtype=np.float64)
        obj.scale_ = np.asarray(payload["scale"], dtype=np.float64)
        return obj


def _encode_classes(y):
    classes, codes = np.unique(y, return_inverse=True)
    return classes, codes


class KNearestNeighbors(BaseEstimator, ClassifierMixin):
    """k-NN with Euclidean distance on z-scored features.

    Vote ties go to the class of the nearest neighbor among the tied
    classes; distance ties resolve by training index.
    """

    kind = "knn"

    def __init__(self, n_neighbors=1, standardize=True):
        self.n_neighbors = n_neighbors
        self.standardize = standardize

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.n_neighbors > X.shape[0]:
            raise TrainingError("k exceeds the number of training samples",
                                code="k-too-large")
        self.scaler_ = Standardizer().fit(X) if self.standardize else None
        self.X_ = self.scaler_.transform(X) if self.scaler_ else X
        self.classes_, self.y_ = _encode_classes(y)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        X = check_n_features(self, X)
        Z = self.scaler_.transform(X) if self.scaler_ else X
        d2 = np.maximum(
            (Z ** 2).sum(axis=1)[:, None]
            + (self.X_ ** 2).sum(axis=1)[None, :]
            - 2.0 * Z @ self.X_.T, 0.0)
        out = np.empty(Z.shape[0], dtype=np.intp)
        n = self.X_.shape[0]
        train_idx = np.arange(n)
        for i in range(Z.shape[0]):
            order = np.lexsort((train_idx, d2[i]))[:self.n_neighbors]
            votes = np.bincount(self.y_[order], minlength=self.classes_.size)
            best = votes.max()
            tied = np.flatnonzero(votes == best)
            if tied.size == 1:
                out[i] = tied[0]
            else:
                # first neighbor in distance order belonging to a tied class
                for j in order:
                    if self.y_[j] in tied:
                        out[i] = self.y_[j]
                        break
        return self.classes_[out]

    def to_payload(self):
        return {"n_neighbors": self.n_neighbors,
                "standardize": self.standardize,
                "X": self.X_.tolist(), "y": self.y_.tolist(),
                "classes": self.classes_.tolist(),
                "scaler": self.scaler_.to_payload() if self.scaler_ else None}

    @classmethod
    def from_payload(cls, payload):
        obj = cls(n_neighbors=payload["n_neighbors"],
                  standardize=payload["standardize"])
        obj.X_ = np.asarray(payload["X"], dtype=np.float64)
        obj.y_ = np.asarray(payload["y"], dtype=np.intp)
        obj.classes_ = np.asarray(payload["classes"])
        obj.scaler_ = (Standardizer.from_payload(payload["scaler"])
                       if payload["scaler"] else None)
        obj.n_features_in_ = obj.X_.shape[1]
        return obj


class MulticlassSVM(BaseEstimator, ClassifierMixin):
    """One-vs-rest linear SVMs trained by subgradient descent on
    hinge loss + lambda*||w||^2 with a deterministic per-epoch shuffle.

    The bias rides along as a constant feature inside w (so it shares the
    regularizer and the 1/(lambda*t) step stays well-behaved). Prediction
    is the argmax of the per-class margins; ties resolve to the lowest
    class index. Zero epochs leave all margins at zero.
    """

    kind = "msvm"

    def __init__(self, lam=1e-3, epochs=100, seed=0):
        self.lam = lam
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, codes = _encode_classes(y)
        if self.classes_.size < 2:
            raise TrainingError("need at least two classes", code="single-class")
        self.scaler_ = Standardizer().fit(X)
        Z = np.hstack([self.scaler_.transform(X), np.ones((X.shape[0], 1))])
        n, d = Z.shape
        c = self.classes_.size
        targets = np.where(codes[:, None] == np.arange(c)[None, :], 1.0, -1.0)

        W = np.zeros((c, d))
        rng = np.random.default_rng(self.seed)
        t = 0
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                t += 1
                eta = 1.0 / (self.lam * t)
                margins = targets[i] * (W @ Z[i])
                viol = margins < 1.0
                W *= (1.0 - eta * self.lam)
                if viol.any():
                    W[viol] += eta * targets[i, viol, None] * Z[i]
        self.W_ = W
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        X = check_n_features(self, X)
        Z = np.hstack([self.scaler_.transform(X), np.ones((X.shape[0], 1))])
        return Z @ self.W_.T

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def to_payload(self):
        return {"lam": self.lam, "epochs": self.epochs, "seed": self.seed,
                "W": self.W_.tolist(),
                "classes": self.classes_.tolist(),
                "scaler": self.scaler_.to_payload()}

    @classmethod
    def from_payload(cls, payload):
        obj = cls(lam=payload["lam"], epochs=payload["epochs"], seed=payload["seed"])
        obj.W_ = np.asarray(payload["W"], dtype=np.float64)
        obj.classes_ = np.asarray(payload["classes"])
        obj.scaler_ = Standardizer.from_payload(payload["scaler"])
        obj.n_features_in_ = obj.W_.shape[1] - 1
        return obj


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class GradientDescentMLP(BaseEstimator, ClassifierMixin):
    """One hidden layer (logistic), softmax output, cross-entropy loss,
    full-batch gradient descent. All parameters initialize uniformly in
    [-0.5, 0.5] from the seed, in (W1, b1, W2, b2) order."""

    kind = "mlp"

    def __init__(self, hidden=20, lr=0.05, epochs=500, seed=0):
        self.hidden = hidden
        self.lr = lr
        self.epochs = epochs
        self.seed = seed

    def _shapes(self, d, c):
        return [(d, self.hidden), (self.hidden,), (self.hidden, c), (c,)]

    def _unpack(self, flat, d, c):
        parts = []
        pos = 0
        for shape in self._shapes(d, c):
            size = int(np.prod(shape))
            parts.append(flat[pos:pos + size].reshape(shape))
            pos += size
        return parts

    def loss_and_gradient(self, flat, X, codes, n_classes):
        """Cross-entropy loss and flat gradient at the given parameters."""
        n, d = X.shape
        W1, b1, W2, b2 = self._unpack(flat, d, n_classes)
        a1 = _sigmoid(X @ W1 + b1)
        probs = _softmax(a1 @ W2 + b2)
        loss = float(-np.log(np.maximum(probs[np.arange(n), codes], 1e-300)).mean())
        dz2 = probs.copy()
        dz2[np.arange(n), codes] -= 1.0
        dz2 /= n
        dW2 = a1.T @ dz2
        db2 = dz2.sum(axis=0)
        dz1 = (dz2 @ W2.T) * a1 * (1.0 - a1)
        dW1 = X.T @ dz1
        db1 = dz1.sum(axis=0)
        grad = np.concatenate([dW1.ravel(), db1.ravel(), dW2.ravel(), db2.ravel()])
        return loss, grad

    def initial_parameters(self, d, c):
        size = sum(int(np.prod(s)) for s in self._shapes(d, c))
        return np.random.default_rng(self.seed).uniform(-0.5, 0.5, size)

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, codes = _encode_classes(y)
        if self.classes_.size < 2:
            raise TrainingError("need at least two classes", code="single-class")
        self.scaler_ = Standardizer().fit(X)
        Z = self.scaler_.transform(X)
        d, c = Z.shape[1], self.classes_.size

        flat = self.initial_parameters(d, c)
        losses = []
        for _ in range(self.epochs):
            loss, grad = self.loss_and_gradient(flat, Z, codes, c)
            losses.append(loss)
            flat = flat - self.lr * grad
        self.parameters_ = flat
        self.loss_curve_ = losses
        self.n_features_in_ = d
        return self

    def predict_proba(self, X):
        X = check_n_features(self, X)
        Z = self.scaler_.transform(X)
        W1, b1, W2, b2 = self._unpack(self.parameters_, Z.shape[1],
                                      self.classes_.size)
        return _softmax(_sigmoid(Z @ W1 + b1) @ W2 + b2)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def to_payload(self):
        return {"hidden": self.hidden, "lr": self.lr, "epochs": self.epochs,
                "seed": self.seed, "parameters": self.parameters_.tolist(),
                "classes": self.classes_.tolist(),
                "n_features": self.n_features_in_,
                "scaler": self.scaler_.to_payload()}

    @classmethod
    def from_payload(cls, payload):
        obj = cls(hidden=payload["hidden"], lr=payload["lr"],
                  epochs=payload["epochs"], seed=payload["seed"])
        obj.parameters_ = np.asarray(payload["parameters"], dtype=np.float64)
        obj.classes_ = np.asarray(payload["classes"])
        obj.scaler_ = Standardizer.from_payload(payload["scaler"])
        obj.n_features_in_ = payload["n_features"]
        return obj


@dataclass(frozen=True)
class Stump:
    feature: int
    threshold: float
    polarity: int  # +1: predict +1 above threshold; -1: the reverse
    alpha: float
    error: float

    def predict(self, X):
        raw = np.where(X[:, self.feature] > self.threshold, 1.0, -1.0)
        return self.polarity * raw


class StumpAdaBoost(BaseEstimator, ClassifierMixin):
    """AdaBoost over one-feature threshold stumps for binary problems.

    Each round scans every feature and every midpoint between consecutive
    distinct values; ties resolve to the lowest feature index, then the
    smallest threshold, then polarity +1. A zero-error stump ends boosting
    early with a capped vote; a round where no stump beats chance aborts.
    """

    kind = "adaboost"

    def __init__(self, rounds=50):
        self.rounds = rounds

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, codes = _encode_classes(y)
        if self.classes_.size != 2:
            raise TrainingError("adaboost needs exactly two classes",
                                code="not-binary")
        t = codes * 2.0 - 1.0  # classes_[0] -> -1, classes_[1] -> +1
        n, d = X.shape

        orders = [np.argsort(X[:, j], kind="stable") for j in range(d)]
        w = np.full(n, 1.0 / n)
        self.stumps_ = []
        self.errors_ = []
        bound = 1.0
        self.bound_curve_ = []
        for _ in range(self.rounds):
            stump = self._best_stump(X, t, w, orders)
            if stump is None or stump.error >= 0.5:
                if not self.stumps_:
                    raise TrainingError(
                        "no stump beats chance on this data",
                        code="no-useful-stump")
                break
            eps = stump.error
            if eps <= 0.0:
                stump = Stump(stump.feature, stump.threshold, stump.polarity,
                              PERFECT_STUMP_ALPHA, 0.0)
                self.stumps_.append(stump)
                self.errors_.append(0.0)
                self.bound_curve_.append(0.0)
                break
            alpha = 0.5 * np.log((1.0 - eps) / eps)
            stump = Stump(stump.feature, stump.threshold, stump.polarity,
                          float(alpha), float(eps))
            self.stumps_.append(stump)
            self.errors_.append(float(eps))
            bound *= 2.0 * np.sqrt(eps * (1.0 - eps))
            self.bound_curve_.append(float(bound))
            w = w * np.exp(-alpha * t * stump.predict(X))
            w /= w.sum()

        weights = np.zeros(d)
        for s in self.stumps_:
            weights[s.feature] += s.alpha
        self.feature_weights_ = weights
        self.n_features_in_ = d
        return self

    @staticmethod
    def _best_stump(X, t, w, orders):
        n, d = X.shape
        best = None
        for j in range(d):
            order = orders[j]
            xs = X[order, j]
            splits = np.flatnonzero(xs[1:] > xs[:-1]) + 1
            if splits.size == 0:
                continue
            cum = np.cumsum((w * t)[order])
            neg_total = float(w[t < 0].sum())
            err_pos = neg_total + cum[splits - 1]  # left -1 / right +1
            err_neg = 1.0 - err_pos
            both = np.column_stack([err_pos, err_neg]).ravel()
            i = int(np.argmin(both))
            err = float(both[i])
            if best is None or err < best.error - 1e-15:
                split = splits[i // 2]
                thr = 0.5 * (xs[split - 1] + xs[split])
                pol = 1 if i % 2 == 0 else -1
                best = Stump(j, float(thr), pol, 0.0, err)
        return best

    def decision_function(self, X):
        X = check_n_features(self, X)
        return sum(s.alpha * s.predict(X) for s in self.stumps_)

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[(scores >= 0).astype(np.intp)]

    def to_payload(self):
        return {"rounds": self.rounds,
                "stumps": [asdict(s) for s in self.stumps_],
                "classes": self.classes_.tolist(),
                "n_features": self.n_features_in_}

    @classmethod
    def from_payload(cls, payload):
        obj = cls(rounds=payload["rounds"])
        obj.stumps_ = [Stump(**s) for s in payload["stumps"]]
        obj.classes_ = np.asarray(payload["classes"])
        obj.n_features_in_ = payload["n_features"]
        weights = np.zeros(obj.n_features_in_)
        for s in obj.stumps_:
            weights[s.feature] += s.alpha
        obj.feature_weights_ = weights
        obj.errors_ = [s.error for s in obj.stumps_]
        return obj


def jacobi_eigh(A, tol=1e-12, max_sweeps=64):
    """Symmetric eigendecomposition by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors-as-columns), unsorted.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)

    def off_norm(M):
        off = M - np.diag(np.diag(M))
        return float(np.sqrt((off ** 2).sum()))

    threshold = max(tol * max(off_norm(A), 1.0), 1e-300)
    for _ in range(max_sweeps):
        if off_norm(A) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                scale = abs(A[p, p]) + abs(A[q, q])
                if abs(A[p, q]) <= 1e-36 * max(scale, 1.0):
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:  # avoid theta**2 overflow
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p, rot_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * rot_p - s * rot_q
                A[:, q] = s * rot_p + c * rot_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    return np.diag(A).copy(), V


class JacobiPCA(BaseEstimator, TransformerMixin):
    """PCA via cyclic-Jacobi eigendecomposition of the covariance matrix.

    Components are sign-fixed so each one's largest-magnitude entry is
    positive. Requesting more components than the data's rank pads with
    the (near) zero-variance directions and sets ``rank_deficient_``.
    """

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_matrix(X)
        if self.n_components > X.shape[1]:
            raise DataError("more components than features", code="bad-dims")
        self.mean_ = X.mean(axis=0)
        Xc = X - self.mean_
        cov = (Xc.T @ Xc) / X.shape[0]
        eigvals, eigvecs = jacobi_eigh(cov)
        order = np.argsort(-eigvals, kind="stable")
        eigvals = eigvals[order]
        eigvecs = eigvecs[:, order]
        comps = eigvecs.T[:self.n_components].copy()
        for row in comps:
            if row[np.argmax(np.abs(row))] < 0:
                row *= -1.0
        self.components_ = comps
        self.eigenvalues_ = np.maximum(eigvals[:self.n_components], 0.0)
        self.all_eigenvalues_ = eigvals
        top = max(float(eigvals[0]), 0.0)
        self.rank_deficient_ = bool(self.eigenvalues_.min() <= 1e-12 * max(top, 1.0))
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = check_n_features(self, X)
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, T):
        return np.asarray(T) @ self.components_ + self.mean_

    def explained_variance_ratio(self):
        total = self.all_eigenvalues_.sum()
        if total <= 0:
            return np.zeros_like(self.eigenvalues_)
        return self.eigenvalues_ / total


class PCAKNN(BaseEstimator, ClassifierMixin):
    """z-score, project with JacobiPCA, then classify with k-NN."""

    kind = "pca_knn"

    def __init__(self, n_components=10, n_neighbors=1):
        self.n_components = n_components
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.scaler_ = Standardizer().fit(X)
        Z = self.scaler_.transform(X)
        dims = min(self.n_components, Z.shape[1])
        self.pca_ = JacobiPCA(n_components=dims).fit(Z)
        # distances live in the projected space; no second standardization
        self.knn_ = KNearestNeighbors(n_neighbors=self.n_neighbors,
                                      standardize=False)
        self.knn_.fit(self.pca_.transform(Z), y)
        self.classes_ = self.knn_.classes_
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        X = check_n_features(self, X)
        Z = self.scaler_.transform(X)
        return self.knn_.predict(self.pca_.transform(Z))

    def to_payload(self):
        return {"n_components": self.n_components,
                "n_neighbors": self.n_neighbors,
                "scaler": self.scaler_.to_payload(),
                "pca": {"mean": self.pca_.mean_.tolist(),
                        "components": self.pca_.components_.tolist(),
                        "eigenvalues": self.pca_.all_eigenvalues_.tolist()},
                "knn": self.knn_.to_payload(),
                "n_features": self.n_features_in_}

    @classmethod
    def from_payload(cls, payload):
        obj = cls(n_components=payload["n_components"],
                  n_neighbors=payload["n_neighbors"])
        obj.scaler_ = Standardizer.from_payload(payload["scaler"])
        pca = JacobiPCA(n_components=payload["n_components"])
        pca.mean_ = np.asarray(payload["pca"]["mean"], dtype=np.float64)
        pca.components_ = np.asarray(payload["pca"]["components"], dtype=np.float64)
        pca.all_eigenvalues_ = np.asarray(payload["pca"]["eigenvalues"],
                                          dtype=np.float64)
        pca.eigenvalues_ = pca.all_eigenvalues_[:pca.components_.shape[0]]
        pca.n_features_in_ = pca.components_.shape[1]
        obj.pca_ = pca
        obj.knn_ = KNearestNeighbors.from_payload(payload["knn"])
        obj.classes_ = obj.knn_.classes_
        obj.n_features_in_ = payload["n_features"]
        return obj


_KIND_TO_CLASS = {
    "knn": KNearestNeighbors,
    "msvm": MulticlassSVM,
    "mlp": GradientDescentMLP,
    "adaboost": StumpAdaBoost,
    "pca_knn": PCAKNN,
}


def make_classifier(kind: str, config: TrainConfig | None = None):
    """Instantiate an unfitted classifier of the given kind."""
    cfg = config or TrainConfig()
    if kind == "knn":
        return KNearestNeighbors(n_neighbors=cfg.knn_k)
    if kind == "msvm":
        return MulticlassSVM(lam=cfg.svm_lambda, epochs=cfg.svm_epochs,
                             seed=cfg.seed)
    if kind == "mlp":
        return GradientDescentMLP(hidden=cfg.mlp_hidden, lr=cfg.mlp_lr,
                                  epochs=cfg.mlp_epochs, seed=cfg.seed)
    if kind == "adaboost":
        return StumpAdaBoost(rounds=cfg.boost_rounds)
    if kind == "pca_knn":
        return PCAKNN(n_components=cfg.pca_dims, n_neighbors=cfg.knn_k)
    raise DataError(f"unknown classifier kind: {kind!r}", code="bad-classifier")


def save_model(path, model, feature_subset=None) -> None:
    """Serialize a fitted model (and the feature subset it was trained on)
    to versioned JSON."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "feature_subset": sorted(feature_subset) if feature_subset else None,
        "payload": model.to_payload(),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_model(path):
    """Load a model saved by :func:`save_model`; returns (model, subset)."""
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != MODEL_FORMAT:
        raise DataError(f"not a model file: {path}", code="bad-model-file")
    if doc.get("version") != MODEL_VERSION:
        raise DataError(f"unsupported model version: {doc.get('version')}",
                        code="bad-model-version")
    kind = doc["kind"]
    if kind not in _KIND_TO_CLASS:
        raise DataError(f"unknown model kind: {kind!r}", code="bad-classifier")
    model = _KIND_TO_CLASS[kind].from_payload(doc["payload"])
    return model, doc.get("feature_subset")
