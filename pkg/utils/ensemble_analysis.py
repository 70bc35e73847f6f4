"""
Experiment statistics: classifier diversity, rank aggregation, significance
tests and the distance-count / cost predictors.
"""
import itertools
import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import gammaln, logsumexp
from scipy.stats import friedmanchisquare

from utils.distances import ELASTIC_MEASURES
from utils.errors import EmptyTable, LengthMismatch, MissingColumns
from utils.prototypes import prototype_count

logger = logging.getLogger(__name__)

STATISTICS = ("q_statistic", "disagreement", "double_fault", "correlation")


@dataclass(frozen=True)
class PairwiseStats:
    """Diversity of two classifiers over the same test instances."""

    q_statistic: Optional[float]
    disagreement: float
    double_fault: float
    correlation: Optional[float]
    n11: int = 0
    n00: int = 0
    n10: int = 0
    n01: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def pairwise_stats(a: Sequence[int], b: Sequence[int]) -> PairwiseStats:
    """
    Q-statistic, disagreement, double fault and correlation of two correctness vectors.

    Args:
        a: 0/1 correctness of the first classifier
        b: 0/1 correctness of the second classifier

    Returns:
        PairwiseStats; q and correlation are None where undefined
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise LengthMismatch("correctness vectors differ in length", a=int(a.size), b=int(b.size))
    if a.size == 0:
        raise LengthMismatch("correctness vectors are empty")

    n11 = int(np.sum((a == 1) & (b == 1)))
    n00 = int(np.sum((a == 0) & (b == 0)))
    n10 = int(np.sum((a == 1) & (b == 0)))
    n01 = int(np.sum((a == 0) & (b == 1)))
    total = a.size

    denominator = n11 * n00 + n01 * n10
    q = (n11 * n00 - n01 * n10) / denominator if denominator else None

    if a.min() == a.max() or b.min() == b.max():
        correlation = None
    else:
        correlation = float(np.corrcoef(a, b)[0, 1])

    return PairwiseStats(q, (n01 + n10) / total, n00 / total, correlation,
                         n11, n00, n10, n01)


def _require(frame: pd.DataFrame, columns: Sequence[str]) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise MissingColumns(f"missing columns: {', '.join(missing)}", missing=missing)


def _grid(algorithms: List[str], values: Dict[tuple, Optional[float]]) -> pd.DataFrame:
    grid = pd.DataFrame(np.nan, index=algorithms, columns=algorithms, dtype=float)
    for (first, second), value in values.items():
        grid.loc[first, second] = np.nan if value is None else value
    return grid


def ensemble_grids(correctness: pd.DataFrame) -> Dict[str, Dict[str, pd.DataFrame]]:
    """
    Algorithm × algorithm grids for every pairwise statistic.

    Two aggregations are produced: "concatenated" joins the correctness of
    all datasets and seeds into one vector per algorithm; "per_dataset"
    computes each statistic per dataset and averages the defined values.
    Only instances both algorithms were scored on enter a pair.

    Args:
        correctness: Long frame with dataset, algorithm, seed, instance, correct

    Returns:
        {"concatenated": {stat: grid}, "per_dataset": {stat: grid}}
    """
    _require(correctness, ["dataset", "algorithm", "seed", "instance", "correct"])
    if correctness.empty:
        raise EmptyTable("no correctness rows")
    wide = correctness.pivot_table(index=["dataset", "seed", "instance"], columns="algorithm",
                                   values="correct", aggfunc="first")
    algorithms = sorted(wide.columns)

    concatenated = {stat: {} for stat in STATISTICS}
    per_dataset = {stat: {} for stat in STATISTICS}
    for first, second in itertools.product(algorithms, repeat=2):
        pair = wide[[first, second]].dropna() if first != second else wide[[first]].dropna()
        if pair.empty:
            continue
        a = pair[first].to_numpy()
        b = pair[second].to_numpy() if first != second else a
        stats = pairwise_stats(a, b)
        for stat in STATISTICS:
            concatenated[stat][(first, second)] = getattr(stats, stat)

        collected = {stat: [] for stat in STATISTICS}
        for _, rows in pair.groupby(level="dataset"):
            a = rows[first].to_numpy()
            b = rows[second].to_numpy() if first != second else a
            stats = pairwise_stats(a, b)
            for stat in STATISTICS:
                value = getattr(stats, stat)
                if value is not None:
                    collected[stat].append(value)
        for stat in STATISTICS:
            per_dataset[stat][(first, second)] = (float(np.mean(collected[stat]))
                                                  if collected[stat] else None)

    return {
        "concatenated": {stat: _grid(algorithms, v) for stat, v in concatenated.items()},
        "per_dataset": {stat: _grid(algorithms, v) for stat, v in per_dataset.items()},
    }


def accuracy_table(results: pd.DataFrame) -> pd.DataFrame:
    """
    Mean accuracy over seeds, algorithms as rows and datasets as columns.

    Args:
        results: Frame of ResultRecord rows

    Returns:
        Algorithm × dataset accuracy table
    """
    _require(results, ["dataset", "algorithm", "accuracy"])
    if results.empty:
        raise EmptyTable("no result rows")
    return results.pivot_table(index="algorithm", columns="dataset", values="accuracy",
                               aggfunc="mean")


def average_ranks(table: pd.DataFrame) -> pd.DataFrame:
    """
    Mean rank per algorithm over datasets (rank 1 = highest accuracy).

    Ties share the mean of their ranks. Datasets missing any algorithm are
    dropped. best_count counts datasets where an algorithm is best or tied best.

    Args:
        table: Algorithm × dataset accuracy table

    Returns:
        Frame indexed by algorithm with mean_rank and best_count, sorted by mean_rank
    """
    complete = table.dropna(axis=1, how="any")
    if complete.shape[1] < table.shape[1]:
        logger.warning(f"Dropped {table.shape[1] - complete.shape[1]} datasets "
                       f"with missing results from the rank table")
    if complete.shape[0] < 2 or complete.shape[1] < 1:
        raise EmptyTable("ranking needs at least 2 algorithms and 1 complete dataset",
                         algorithms=int(complete.shape[0]), datasets=int(complete.shape[1]))

    ranks = complete.rank(axis=0, method="average", ascending=False)
    best = complete.eq(complete.max(axis=0), axis=1).sum(axis=1)
    summary = pd.DataFrame({
        "mean_rank": ranks.mean(axis=1),
        "best_count": best.astype(int),
    })
    summary.index.name = "algorithm"
    return summary.sort_values("mean_rank", kind="mergesort")


def sign_test(wins: int, losses: int) -> float:
    """
    One-sided sign test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2).

    Args:
        wins: Non-tied wins
        losses: Non-tied losses

    Returns:
        p-value in (0, 1]
    """
    wins, losses = int(wins), int(losses)
    n = wins + losses
    if wins < 0 or losses < 0 or n < 1:
        raise ValueError("need nonnegative counts with at least one non-tied result")
    i = np.arange(wins, n + 1)
    log_terms = gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1) - n * math.log(2.0)
    return float(min(1.0, math.exp(logsumexp(log_terms))))


def compare_pair(table: pd.DataFrame, first: str, second: str) -> dict:
    """Win/tie/loss counts of first against second across datasets, with the sign test."""
    for name in (first, second):
        if name not in table.index:
            raise MissingColumns(f"no results for algorithm '{name}'", algorithm=name)
    pair = table.loc[[first, second]].dropna(axis=1, how="any")
    a = pair.loc[first]
    b = pair.loc[second]
    wins = int((a > b).sum())
    losses = int((a < b).sum())
    ties = int((a == b).sum())
    p_value = sign_test(wins, losses) if wins + losses else None
    return {"algorithm_a": first, "algorithm_b": second, "wins": wins, "ties": ties,
            "losses": losses, "p_value": p_value}


def friedman_test(table: pd.DataFrame) -> dict:
    """
    Friedman chi-square test over algorithms, datasets as blocks.

    Args:
        table: Algorithm × dataset accuracy table

    Returns:
        Dict with statistic, p_value, algorithms and datasets
    """
    complete = table.dropna(axis=1, how="any")
    if complete.shape[0] < 3 or complete.shape[1] < 2:
        raise EmptyTable("the Friedman test needs at least 3 algorithms and 2 datasets",
                         algorithms=int(complete.shape[0]), datasets=int(complete.shape[1]))
    statistic, p_value = friedmanchisquare(*[row.to_numpy() for _, row in complete.iterrows()])
    return {"statistic": float(statistic), "p_value": float(p_value),
            "algorithms": int(complete.shape[0]), "datasets": int(complete.shape[1])}


def pairwise_accuracy(results: pd.DataFrame) -> pd.DataFrame:
    """Long table of (dataset, algorithm_a, algorithm_b, accuracy_a, accuracy_b) for scatter plots."""
    table = accuracy_table(results)
    rows = []
    for first, second in itertools.combinations(table.index, 2):
        for dataset in table.columns:
            a, b = table.loc[first, dataset], table.loc[second, dataset]
            if pd.notna(a) and pd.notna(b):
                rows.append({"dataset": dataset, "algorithm_a": first, "algorithm_b": second,
                             "accuracy_a": float(a), "accuracy_b": float(b)})
    return pd.DataFrame(rows, columns=["dataset", "algorithm_a", "algorithm_b",
                                       "accuracy_a", "accuracy_b"])


def timing_table(results: pd.DataFrame) -> pd.DataFrame:
    """
    Mean wall-clock seconds (transform + fit + predict), datasets × algorithms, with a total row.

    Args:
        results: Frame of ResultRecord rows

    Returns:
        Timing table
    """
    _require(results, ["dataset", "algorithm", "transform_s", "fit_s", "predict_s"])
    if results.empty:
        raise EmptyTable("no result rows")
    frame = results.assign(total_s=results["transform_s"] + results["fit_s"] + results["predict_s"])
    table = frame.pivot_table(index="dataset", columns="algorithm", values="total_s",
                              aggfunc="mean")
    table.loc["total"] = table.sum(axis=0)
    return table


# -- cost model -------------------------------------------------------------------

def predict_distance_calls(k: int, n: int, b: float, m: int) -> int:
    """
    Distance evaluations of one fit: k · n · ceil(log_b n) · m.

    Args:
        k: Kernel count
        n: Training set size
        b: Prototype log base
        m: Channel contribution (channels under independent mode, else 1)

    Returns:
        Exact call count the transform's counter reports
    """
    if min(k, n, m) < 1:
        raise ValueError("k, n and m must be positive")
    return int(k) * int(n) * prototype_count(int(n), b) * int(m)


def predict_distance_calls_real(k: int, n: int, b: float, m: int) -> float:
    """Same count with the real-valued logarithm."""
    if min(k, n, m) < 1:
        raise ValueError("k, n and m must be positive")
    return float(k) * n * (math.log(n) / math.log(b)) * m


def predict_transform_cost(k: int, n: int, b: float, m: int, l: int,
                           w: Optional[int], measure_kind: str) -> float:
    """
    Relative distance-phase cost, convolution excluded.

    Elastic measures cost l · w per call (w = l when unconstrained);
    Euclidean costs l.

    Args:
        k: Kernel count
        n: Series count
        b: Prototype log base
        m: Channel contribution
        l: Series length
        w: Band half-width (None for unconstrained)
        measure_kind: Distance measure name

    Returns:
        Cost in relative units
    """
    calls = predict_distance_calls(k, n, b, m)
    if measure_kind.lower() in ELASTIC_MEASURES:
        width = l if w is None else max(1, int(w))
        return float(calls) * l * width
    return float(calls) * l


def calibrate(predicted_units: float, observed_seconds: float) -> float:
    """Seconds per relative cost unit from one measured run."""
    if predicted_units <= 0:
        raise ValueError("predicted cost must be positive")
    return float(observed_seconds) / float(predicted_units)
