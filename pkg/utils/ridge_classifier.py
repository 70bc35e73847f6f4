"""
Cross-validated ridge classifier with leave-one-out alpha selection.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Sequence, Union

import numpy as np
from sklearn.linear_model import RidgeClassifier, RidgeClassifierCV
from sklearn.preprocessing import StandardScaler

from utils.errors import DegenerateAlphas, LengthMismatch, ShapeMismatch, SingleClass
from utils.feature_matrix import FeatureMatrix

logger = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.1, 1.0, 10.0)

# LOO errors this close to the best count as a tie
TIE_TOLERANCE = 1e-10


def _values(X: Union[FeatureMatrix, np.ndarray]) -> np.ndarray:
    values = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=np.float64)
    if values.ndim != 2:
        raise ShapeMismatch("features must be a 2-D matrix", shape=list(values.shape))
    return values


@dataclass(frozen=True, eq=False)
class RidgeModel:
    """
    Fitted one-vs-rest ridge classifier.

    Binary problems keep a single discriminant column whose positive side is
    the second class.
    """

    mean: np.ndarray
    scale: np.ndarray
    weights: np.ndarray
    intercepts: np.ndarray
    alpha: float
    classes: np.ndarray
    loo_errors: Dict[float, float] = field(default_factory=dict)
    fit_seconds: float = 0.0

    @property
    def feature_count(self) -> int:
        return int(self.mean.shape[0])

    def standardize(self, X) -> np.ndarray:
        values = _values(X)
        if values.shape[1] != self.feature_count:
            raise ShapeMismatch("column count does not match the fitted model",
                                columns=values.shape[1], expected=self.feature_count)
        return (values - self.mean) / self.scale

    def decision_function(self, X) -> np.ndarray:
        """Class scores w_c·x + b_c, one column per discriminant."""
        return self.standardize(X) @ self.weights + self.intercepts

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        if self.classes.shape[0] == 2:
            return self.classes[(scores[:, 0] > 0).astype(np.int64)]
        return self.classes[np.argmax(scores, axis=1)]


def _check_inputs(values: np.ndarray, labels: np.ndarray, alphas: Sequence[float]):
    n = values.shape[0]
    if labels.shape[0] != n:
        raise LengthMismatch("need one label per feature row", rows=n, labels=int(labels.shape[0]))
    if n < 2:
        raise SingleClass("need at least 2 rows to fit", rows=n)
    classes = np.unique(labels)
    if classes.shape[0] < 2:
        raise SingleClass("need at least 2 classes to fit", classes=classes.tolist())
    alphas = [float(a) for a in alphas]
    if not alphas or any(not (a > 0 and np.isfinite(a)) for a in alphas):
        raise DegenerateAlphas("alphas must be positive and finite", alphas=alphas)
    return classes, alphas


def _fit_error(error: ValueError, alphas: Sequence[float]):
    message = str(error)
    if "class" in message.lower():
        return SingleClass(f"Ridge fit failed: {message}")
    return DegenerateAlphas(f"Ridge fit failed: {message}", alphas=list(alphas))


def fit_ridge_cv(X: Union[FeatureMatrix, np.ndarray], labels: Sequence,
                 alphas: Sequence[float] = DEFAULT_ALPHAS,
                 standardize: bool = True) -> RidgeModel:
    """
    Fit a ridge classifier, choosing alpha by leave-one-out squared error.

    Features are centered (and scaled to unit variance when standardize is
    on; constant columns keep scale 1). Targets are +-1 per class, one column
    for binary problems. The intercept is unpenalized. Ties in the LOO error
    go to the first alpha listed.

    Args:
        X: Training features, rows are instances
        labels: Class label per row
        alphas: Candidate penalties, all positive
        standardize: Scale features to unit variance

    Returns:
        Fitted RidgeModel
    """
    started = time.perf_counter()
    values = _values(X)
    labels = np.asarray(labels)
    classes, alphas = _check_inputs(values, labels, alphas)
    n = values.shape[0]

    scaler = StandardScaler(with_std=standardize).fit(values)
    mean = scaler.mean_
    scale = scaler.scale_ if standardize else np.ones(values.shape[1])
    Z = (values - mean) / scale

    try:
        search = RidgeClassifierCV(alphas=alphas, store_cv_results=True).fit(Z, labels)
    except ValueError as e:
        raise _fit_error(e, alphas) from e

    # squared LOO residuals, (n, targets, alphas)
    squared = search.cv_results_.reshape(n, -1, len(alphas))
    errors = squared.mean(axis=(0, 1))
    loo_errors: Dict[float, float] = {alpha: float(e) for alpha, e in zip(alphas, errors)}
    best = int(np.argmax(np.isclose(errors, errors.min(), rtol=TIE_TOLERANCE, atol=0.0)))
    best_alpha = alphas[best]

    fitted = search
    if best_alpha != float(search.alpha_):
        try:
            fitted = RidgeClassifier(alpha=best_alpha).fit(Z, labels)
        except ValueError as e:
            raise _fit_error(e, alphas) from e

    weights = np.atleast_2d(fitted.coef_).T.copy()
    intercepts = np.atleast_1d(fitted.intercept_).astype(np.float64)
    elapsed = time.perf_counter() - started
    logger.debug(f"Ridge fit: n={n}, features={values.shape[1]}, alpha={best_alpha}, "
                 f"loo={loo_errors}")
    return RidgeModel(mean, scale, weights, intercepts, best_alpha, classes,
                      loo_errors, elapsed)


def predict(model: RidgeModel, X: Union[FeatureMatrix, np.ndarray]) -> np.ndarray:
    """
    Predict labels; the highest score wins, ties going to the lowest class index.

    Args:
        model: Fitted RidgeModel
        X: Features with the training column count

    Returns:
        Array of predicted labels
    """
    return model.predict(X)


def accuracy(predicted: Sequence, truth: Sequence) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise LengthMismatch("predictions and truth differ in length",
                             predicted=int(predicted.size), truth=int(truth.size))
    if predicted.size == 0:
        raise LengthMismatch("nothing to score")
    return float(np.mean(predicted == truth))


def correctness(predicted: Sequence, truth: Sequence) -> np.ndarray:
    """Per-instance 0/1 correctness vector."""
    accuracy(predicted, truth)
    return (np.asarray(predicted) == np.asarray(truth)).astype(np.int64)
