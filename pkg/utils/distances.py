"""
Elastic and non-elastic distance measures for prototype features.

All elastic measures are banded dynamic programs over two rolling rows, so a
call costs O(l·w) time and O(l) memory. Cell (i, j) (1-based) is admissible
when |i·q - j·p| <= W·q with W = max(w, |p - q|), which for equal lengths is
the Sakoe-Chiba band |i - j| <= w. A negative window means unconstrained.

DTW, WDTW and ADTW use squared pointwise costs and return the summed cost
without a square root. ERP, TWE and MSM use absolute costs.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from numba import njit

from utils.errors import (BandTooNarrow, EmptySeries, InvalidMeasure,
                          LengthMismatch)

EUCLIDEAN, DTW, WDTW, ADTW, ERP, TWE, MSM = range(7)

MEASURE_CODES = {
    "euclidean": EUCLIDEAN,
    "dtw": DTW,
    "wdtw": WDTW,
    "adtw": ADTW,
    "erp": ERP,
    "twe": TWE,
    "msm": MSM,
}

ELASTIC_MEASURES = ("dtw", "wdtw", "adtw", "erp", "twe", "msm")

# parameter names in the order they are packed for the compiled kernels
MEASURE_PARAMS = {
    "euclidean": (),
    "dtw": (),
    "wdtw": ("g",),
    "adtw": ("omega",),
    "erp": ("gap",),
    "twe": ("nu", "lmbda"),
    "msm": ("c",),
}

DEFAULT_PARAMS = {
    "wdtw": {"g": 0.05},
    "adtw": {"omega": 1.0},
    "erp": {"gap": 0.0},
    "twe": {"nu": 0.001, "lmbda": 1.0},
    "msm": {"c": 1.0},
}

PARAM_ALIASES = {"lambda": "lmbda"}


@dataclass(frozen=True)
class DistanceMeasure:
    """A distance kind with its parameters and optional band half-width."""

    kind: str
    params: Dict[str, float] = field(default_factory=dict)
    window: Optional[int] = None

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in MEASURE_CODES:
            raise InvalidMeasure(f"unknown distance measure '{self.kind}'",
                                 known=sorted(MEASURE_CODES))
        params = dict(DEFAULT_PARAMS.get(kind, {}))
        for name, value in (self.params or {}).items():
            name = PARAM_ALIASES.get(name, name)
            if name not in MEASURE_PARAMS[kind]:
                raise InvalidMeasure(f"'{kind}' has no parameter '{name}'", measure=kind)
            params[name] = float(value)
        for name, value in params.items():
            if not math.isfinite(value):
                raise InvalidMeasure(f"parameter {name} must be finite", measure=kind)
        if kind == "msm" and params["c"] <= 0:
            raise InvalidMeasure("msm.c must be positive", measure=kind)
        if kind == "twe" and (params["nu"] < 0 or params["lmbda"] < 0):
            raise InvalidMeasure("twe.nu and twe.lambda must be nonnegative", measure=kind)
        if kind == "wdtw" and params["g"] <= 0:
            raise InvalidMeasure("wdtw.g must be positive", measure=kind)
        if kind == "adtw" and params["omega"] < 0:
            raise InvalidMeasure("adtw.omega must be nonnegative", measure=kind)
        window = self.window
        if window is not None:
            window = int(window)
            if window < 0:
                raise InvalidMeasure("window must be nonnegative", measure=kind)
        if kind == "euclidean":
            window = None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "window", window)

    @property
    def code(self) -> int:
        return MEASURE_CODES[self.kind]

    @property
    def is_elastic(self) -> bool:
        return self.kind in ELASTIC_MEASURES

    def packed_params(self) -> np.ndarray:
        """Parameters as a length-2 float vector for the compiled kernels."""
        packed = np.zeros(2, dtype=np.float64)
        for i, name in enumerate(MEASURE_PARAMS[self.kind]):
            packed[i] = self.params[name]
        return packed

    def packed_window(self) -> int:
        return -1 if self.window is None else self.window

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "window": self.window}


# -- compiled kernels ------------------------------------------------------------

@njit(cache=True)
def _band(i, p, q, window):
    """Admissible column range [lo, hi] for row i (1-based), or hi < lo."""
    if window < 0:
        return 1, q
    w = max(window, abs(p - q))
    # |i*q - j*p| <= w*q  <=>  (i - w)*q <= j*p <= (i + w)*q
    lo_num = (i - w) * q
    lo = -((-lo_num) // p)
    hi = ((i + w) * q) // p
    if lo < 1:
        lo = 1
    if hi > q:
        hi = q
    return lo, hi


@njit(cache=True)
def _seal_row(row, i, p, q, window, hi):
    """Mark the cells past this row's band that the next row reads as inadmissible."""
    if i < p:
        _, next_hi = _band(i + 1, p, q, window)
        for j in range(hi + 1, next_hi + 1):
            row[j] = np.inf


@njit(cache=True)
def euclidean_kernel(a, b):
    total = 0.0
    for i in range(a.shape[0]):
        diff = a[i] - b[i]
        total += diff * diff
    return math.sqrt(total)


@njit(cache=True)
def dtw_kernel(a, b, window):
    p = a.shape[0]
    q = b.shape[0]
    prev = np.full(q + 1, np.inf)
    curr = np.full(q + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, p + 1):
        lo, hi = _band(i, p, q, window)
        curr[lo - 1] = np.inf
        for j in range(lo, hi + 1):
            diff = a[i - 1] - b[j - 1]
            best = min(prev[j - 1], prev[j], curr[j - 1])
            curr[j] = diff * diff + best
        _seal_row(curr, i, p, q, window, hi)
        prev, curr = curr, prev
    return prev[q]


@njit(cache=True)
def wdtw_kernel(a, b, g, window):
    p = a.shape[0]
    q = b.shape[0]
    half = p / 2.0
    weights = np.empty(max(p, q))
    for d in range(weights.shape[0]):
        weights[d] = 1.0 / (1.0 + math.exp(-g * (d - half)))
    prev = np.full(q + 1, np.inf)
    curr = np.full(q + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, p + 1):
        lo, hi = _band(i, p, q, window)
        curr[lo - 1] = np.inf
        for j in range(lo, hi + 1):
            diff = a[i - 1] - b[j - 1]
            best = min(prev[j - 1], prev[j], curr[j - 1])
            curr[j] = weights[abs(i - j)] * diff * diff + best
        _seal_row(curr, i, p, q, window, hi)
        prev, curr = curr, prev
    return prev[q]


@njit(cache=True)
def adtw_kernel(a, b, omega, window):
    p = a.shape[0]
    q = b.shape[0]
    prev = np.full(q + 1, np.inf)
    curr = np.full(q + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, p + 1):
        lo, hi = _band(i, p, q, window)
        curr[lo - 1] = np.inf
        for j in range(lo, hi + 1):
            diff = a[i - 1] - b[j - 1]
            best = min(prev[j - 1], prev[j] + omega, curr[j - 1] + omega)
            curr[j] = diff * diff + best
        _seal_row(curr, i, p, q, window, hi)
        prev, curr = curr, prev
    return prev[q]


@njit(cache=True)
def erp_kernel(a, b, gap, window):
    p = a.shape[0]
    q = b.shape[0]
    prev = np.empty(q + 1)
    curr = np.empty(q + 1)
    prev[0] = 0.0
    for j in range(1, q + 1):
        prev[j] = prev[j - 1] + abs(b[j - 1] - gap)
    for i in range(1, p + 1):
        lo, hi = _band(i, p, q, window)
        curr[lo - 1] = np.inf
        # the gap-only column stays admissible
        curr[0] = prev[0] + abs(a[i - 1] - gap)
        for j in range(lo, hi + 1):
            match = prev[j - 1] + abs(a[i - 1] - b[j - 1])
            delete_a = prev[j] + abs(a[i - 1] - gap)
            delete_b = curr[j - 1] + abs(b[j - 1] - gap)
            curr[j] = min(match, delete_a, delete_b)
        _seal_row(curr, i, p, q, window, hi)
        prev, curr = curr, prev
    return prev[q]


@njit(cache=True)
def twe_kernel(a, b, nu, lmbda, window):
    p = a.shape[0]
    q = b.shape[0]
    # series are prefixed with a 0 sample at time index 0
    prev = np.full(q + 1, np.inf)
    curr = np.full(q + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, p + 1):
        ai = a[i - 1]
        ai_prev = a[i - 2] if i > 1 else 0.0
        lo, hi = _band(i, p, q, window)
        curr[lo - 1] = np.inf
        for j in range(lo, hi + 1):
            bj = b[j - 1]
            bj_prev = b[j - 2] if j > 1 else 0.0
            match = prev[j - 1] + abs(ai - bj) + abs(ai_prev - bj_prev) + 2.0 * nu * abs(i - j)
            delete_a = prev[j] + abs(ai - ai_prev) + lmbda + nu
            delete_b = curr[j - 1] + abs(bj - bj_prev) + lmbda + nu
            curr[j] = min(match, delete_a, delete_b)
        _seal_row(curr, i, p, q, window, hi)
        prev, curr = curr, prev
    return prev[q]


@njit(cache=True)
def _msm_cost(u, v, t, c):
    if (v <= u <= t) or (v >= u >= t):
        return c
    return c + min(abs(u - v), abs(u - t))


@njit(cache=True)
def msm_kernel(a, b, c, window):
    p = a.shape[0]
    q = b.shape[0]
    prev = np.full(q + 1, np.inf)
    curr = np.full(q + 1, np.inf)
    for i in range(1, p + 1):
        lo, hi = _band(i, p, q, window)
        curr[lo - 1] = np.inf
        for j in range(lo, hi + 1):
            if i == 1 and j == 1:
                curr[j] = abs(a[0] - b[0])
            elif i == 1:
                curr[j] = curr[j - 1] + _msm_cost(b[j - 1], b[j - 2], a[0], c)
            elif j == 1:
                curr[j] = prev[j] + _msm_cost(a[i - 1], a[i - 2], b[0], c)
            else:
                move = prev[j - 1] + abs(a[i - 1] - b[j - 1])
                split_a = prev[j] + _msm_cost(a[i - 1], a[i - 2], b[j - 1], c)
                split_b = curr[j - 1] + _msm_cost(b[j - 1], b[j - 2], a[i - 1], c)
                curr[j] = min(move, split_a, split_b)
        _seal_row(curr, i, p, q, window, hi)
        prev, curr = curr, prev
    return prev[q]


@njit(cache=True)
def distance_kernel(code, a, b, params, window):
    """Route to a measure by integer code; used inside the compiled transform."""
    if code == EUCLIDEAN:
        return euclidean_kernel(a, b)
    elif code == DTW:
        return dtw_kernel(a, b, window)
    elif code == WDTW:
        return wdtw_kernel(a, b, params[0], window)
    elif code == ADTW:
        return adtw_kernel(a, b, params[0], window)
    elif code == ERP:
        return erp_kernel(a, b, params[0], window)
    elif code == TWE:
        return twe_kernel(a, b, params[0], params[1], window)
    return msm_kernel(a, b, params[0], window)


# -- checked Python entry points --------------------------------------------------

def _as_series(x, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64).ravel())
    if arr.size == 0:
        raise EmptySeries(f"series '{name}' is empty")
    return arr


def _window_arg(w: Optional[int]) -> int:
    if w is None:
        return -1
    if int(w) < 0:
        raise InvalidMeasure("window must be nonnegative", window=w)
    return int(w)


def _finish(value: float, measure: str, p: int, q: int, w: Optional[int]) -> float:
    if math.isinf(value):
        raise BandTooNarrow(f"no admissible {measure} alignment within the band",
                            measure=measure, p=p, q=q, window=w)
    return float(value)


def euclidean(a, b) -> float:
    """
    Euclidean distance between two equal-length series.

    Args:
        a: First series
        b: Second series

    Returns:
        sqrt(sum((a - b)^2))
    """
    a = _as_series(a, "a")
    b = _as_series(b, "b")
    if a.size != b.size:
        raise LengthMismatch("euclidean distance needs equal lengths", p=a.size, q=b.size)
    return float(euclidean_kernel(a, b))


def dtw(a, b, w: Optional[int] = None) -> float:
    a = _as_series(a, "a")
    b = _as_series(b, "b")
    return _finish(dtw_kernel(a, b, _window_arg(w)), "dtw", a.size, b.size, w)


def wdtw(a, b, g: float = 0.05, w: Optional[int] = None) -> float:
    """Weighted DTW; the weight of cell (i, j) is 1 / (1 + exp(-g·(|i-j| - p/2)))."""
    DistanceMeasure("wdtw", {"g": g})
    a = _as_series(a, "a")
    b = _as_series(b, "b")
    return _finish(wdtw_kernel(a, b, float(g), _window_arg(w)), "wdtw", a.size, b.size, w)


def adtw(a, b, omega: float = 1.0, w: Optional[int] = None) -> float:
    DistanceMeasure("adtw", {"omega": omega})
    a = _as_series(a, "a")
    b = _as_series(b, "b")
    return _finish(adtw_kernel(a, b, float(omega), _window_arg(w)), "adtw", a.size, b.size, w)


def erp(a, b, gap: float = 0.0, w: Optional[int] = None) -> float:
    DistanceMeasure("erp", {"gap": gap})
    a = _as_series(a, "a")
    b = _as_series(b, "b")
    return _finish(erp_kernel(a, b, float(gap), _window_arg(w)), "erp", a.size, b.size, w)


def twe(a, b, nu: float = 0.001, lmbda: float = 1.0, w: Optional[int] = None) -> float:
    DistanceMeasure("twe", {"nu": nu, "lmbda": lmbda})
    a = _as_series(a, "a")
    b = _as_series(b, "b")
    return _finish(twe_kernel(a, b, float(nu), float(lmbda), _window_arg(w)), "twe", a.size, b.size, w)


def msm(a, b, c: float = 1.0, w: Optional[int] = None) -> float:
    """
    Move-split-merge distance.

    Args:
        a: First series
        b: Second series
        c: Split/merge cost, positive
        w: Band half-width (None for unconstrained)

    Returns:
        MSM distance
    """
    DistanceMeasure("msm", {"c": c})
    a = _as_series(a, "a")
    b = _as_series(b, "b")
    return _finish(msm_kernel(a, b, float(c), _window_arg(w)), "msm", a.size, b.size, w)


def dispatch(measure: DistanceMeasure, a, b) -> float:
    """
    Compute the distance described by a DistanceMeasure.

    Args:
        measure: Measure kind, parameters and window
        a: First series
        b: Second series

    Returns:
        Distance value
    """
    if measure.kind == "euclidean":
        return euclidean(a, b)
    params = measure.params
    if measure.kind == "dtw":
        return dtw(a, b, measure.window)
    if measure.kind == "wdtw":
        return wdtw(a, b, params["g"], measure.window)
    if measure.kind == "adtw":
        return adtw(a, b, params["omega"], measure.window)
    if measure.kind == "erp":
        return erp(a, b, params["gap"], measure.window)
    if measure.kind == "twe":
        return twe(a, b, params["nu"], params["lmbda"], measure.window)
    return msm(a, b, params["c"], measure.window)
