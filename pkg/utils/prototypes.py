"""
Prototype counting and prototype selection strategies.

Prototypes are training activations: for each kernel, M training instances
are chosen and their activations become fixed reference points. Uniform and
stratified sampling never compute a distance; the k-means++ seeding does,
and reports how many through the shared distance counter.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from utils.apportion import largest_remainder
from utils.errors import DegenerateDistances, TooFewInstances
from utils.random_stream import RandomStream

logger = logging.getLogger(__name__)

UNIFORM_RANDOM = "uniform_random"
STRATIFIED = "stratified"
KMEANSPP_INIT = "kmeanspp_init"

SELECTION_ALIASES = {
    "random": UNIFORM_RANDOM,
    "uniform": UNIFORM_RANDOM,
    UNIFORM_RANDOM: UNIFORM_RANDOM,
    STRATIFIED: STRATIFIED,
    "kmeanspp": KMEANSPP_INIT,
    "kmeans++": KMEANSPP_INIT,
    KMEANSPP_INIT: KMEANSPP_INIT,
}


@dataclass(frozen=True)
class SelectionStrategy:
    kind: str = UNIFORM_RANDOM

    def __post_init__(self):
        kind = SELECTION_ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise ValueError(f"unknown selection strategy '{self.kind}'")
        object.__setattr__(self, "kind", kind)

    @property
    def uses_distances(self) -> bool:
        return self.kind == KMEANSPP_INIT


@dataclass(frozen=True, eq=False)
class PrototypeSet:
    """Prototype activations for one kernel and the training rows they came from."""

    activations: np.ndarray
    source_indices: np.ndarray

    @property
    def size(self) -> int:
        return int(self.source_indices.shape[0])


def prototype_count(n: int, base: float = 4.0) -> int:
    """
    Number of prototypes per kernel, ceil(log_base(n)) with a minimum of 1.

    Exact powers of the base return the exact logarithm; the float estimate is
    corrected against integer powers.

    Args:
        n: Training set size
        base: Logarithm base, greater than 1

    Returns:
        Positive prototype count
    """
    if n < 1:
        raise ValueError("dataset size must be positive")
    if base <= 1:
        raise ValueError("log base must be greater than 1")
    if n == 1:
        return 1
    count = max(1, math.ceil(math.log(n) / math.log(base)))
    while count > 1 and base ** (count - 1) >= n:
        count -= 1
    while base ** count < n:
        count += 1
    return count


def _check_size(n: int, count: int) -> None:
    if count < 1:
        raise ValueError("prototype count must be positive")
    if count > n:
        raise TooFewInstances(f"cannot select {count} prototypes from {n} instances",
                              requested=count, available=n)


def select_uniform(n: int, count: int, stream: RandomStream) -> np.ndarray:
    """
    Uniform sampling without replacement.

    Args:
        n: Number of candidate instances (indices 0..n-1)
        count: Number of prototypes M
        stream: Seeded random stream

    Returns:
        Array of M distinct indices
    """
    _check_size(n, count)
    rng = stream.generator()
    return np.sort(rng.choice(n, size=count, replace=False)).astype(np.int64)


def stratified_quotas(labels: Sequence[int], count: int) -> List[int]:
    labels = np.asarray(labels, dtype=np.int64)
    sizes = np.bincount(labels)
    return largest_remainder(sizes, count, caps=sizes)


def select_stratified(labels: Sequence[int], count: int, stream: RandomStream) -> np.ndarray:
    """
    Class-proportional sampling without replacement.

    Quotas are the largest-remainder apportionment of M by class frequency,
    capped at class size; instances are drawn uniformly within each class.

    Args:
        labels: Dense integer labels of the candidates
        count: Number of prototypes M
        stream: Seeded random stream

    Returns:
        Array of M distinct indices
    """
    labels = np.asarray(labels, dtype=np.int64)
    _check_size(labels.size, count)
    rng = stream.generator()
    chosen = []
    for cls, quota in enumerate(stratified_quotas(labels, count)):
        if quota == 0:
            continue
        members = np.flatnonzero(labels == cls)
        chosen.append(rng.choice(members, size=quota, replace=False))
    return np.sort(np.concatenate(chosen)).astype(np.int64)


def select_kmeanspp_init(activations: Sequence[np.ndarray], count: int,
                         distance: Callable[[np.ndarray, np.ndarray], float],
                         stream: RandomStream, first: Optional[int] = None) -> np.ndarray:
    """
    k-means++ seeding over activations, initialization only.

    The first center is uniform; each next center is drawn with probability
    proportional to its distance to the nearest chosen center, as the
    distance function returns it. Only the newest center's distances are
    computed per round, so M centers over n points cost at most
    (M - 1)·(n - 1) distance calls.

    Args:
        activations: Candidate activations (one per training instance)
        count: Number of prototypes M
        distance: Distance function d(a, b) >= 0
        stream: Seeded random stream
        first: Fix the first center instead of drawing it (optional)

    Returns:
        Array of M distinct indices in selection order
    """
    n = len(activations)
    _check_size(n, count)
    rng = stream.generator()

    start = int(rng.integers(n))
    chosen = [start if first is None else int(first)]
    remaining = np.ones(n, dtype=bool)
    remaining[chosen[0]] = False
    nearest = np.full(n, np.inf)

    while len(chosen) < count:
        newest = activations[chosen[-1]]
        for i in np.flatnonzero(remaining):
            d = distance(activations[i], newest)
            if d < nearest[i]:
                nearest[i] = d

        candidates = np.flatnonzero(remaining)
        weights = nearest[candidates]
        total = weights.sum()
        if total > 0 and np.isfinite(total):
            pick = int(candidates[rng.choice(candidates.size, p=weights / total)])
        else:
            logger.debug(f"k-means++ step {len(chosen)}: zero total distance over "
                         f"{candidates.size} candidates")
            warnings.warn(DegenerateDistances(
                "all remaining candidates are at distance 0; sampling uniformly",
                remaining=int(candidates.size)))
            pick = int(candidates[rng.integers(candidates.size)])
        chosen.append(pick)
        remaining[pick] = False

    return np.array(chosen, dtype=np.int64)


def select_indices(strategy: SelectionStrategy, labels: Sequence[int], count: int,
                   stream: RandomStream,
                   activations: Optional[Sequence[np.ndarray]] = None,
                   distance: Optional[Callable[[np.ndarray, np.ndarray], float]] = None) -> np.ndarray:
    if strategy.kind == UNIFORM_RANDOM:
        return select_uniform(len(labels), count, stream)
    if strategy.kind == STRATIFIED:
        return select_stratified(labels, count, stream)
    if activations is None or distance is None:
        raise ValueError("k-means++ seeding needs activations and a distance")
    return select_kmeanspp_init(activations, count, distance, stream)
