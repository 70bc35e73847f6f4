"""
Largest-remainder apportionment, shared by stratified prototype quotas and
distance-ensemble kernel shares.
"""
from typing import List, Optional, Sequence

import numpy as np


def largest_remainder(weights: Sequence[float], total: int,
                      caps: Optional[Sequence[int]] = None) -> List[int]:
    """
    Split an integer total in proportion to weights.

    Each part receives the floor of its exact share; the leftover units go to
    the largest fractional remainders, ties to the lower index. With caps, a
    part never exceeds its cap and the excess moves on in the same order.

    Args:
        weights: Nonnegative weights, at least one positive
        total: Integer total to distribute
        caps: Optional per-part upper bounds

    Returns:
        Integer quotas summing to total
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1 or weights.size == 0 or np.any(weights < 0) or weights.sum() <= 0:
        raise ValueError("weights must be a nonempty vector of nonnegative values with positive sum")
    if total < 0:
        raise ValueError("total must be nonnegative")
    if caps is not None and sum(caps) < total:
        raise ValueError("caps cannot hold the total")

    exact = weights * total / weights.sum()
    quotas = np.floor(exact).astype(np.int64)
    remainders = exact - quotas
    if caps is not None:
        caps = np.asarray(caps, dtype=np.int64)
        quotas = np.minimum(quotas, caps)

    # stable sort keeps lower indices first among equal remainders
    order = list(np.argsort(-remainders, kind="stable"))
    leftover = int(total - quotas.sum())
    while leftover > 0:
        placed = False
        for i in order:
            if leftover == 0:
                break
            if caps is not None and quotas[i] >= caps[i]:
                continue
            quotas[i] += 1
            leftover -= 1
            placed = True
        if not placed:
            break
    return [int(q) for q in quotas]
