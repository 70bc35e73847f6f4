"""
Distance measures checked against exhaustive path enumeration and metric properties.

The oracles walk every monotone alignment path (steps (1,0), (0,1), (1,1)),
optionally restricted to the band, and keep the cheapest total. They share no
code with the rolling-row dynamic programs under test.
"""
import math

import numpy as np
import pytest

from utils.distances import (DistanceMeasure, adtw, dispatch, dtw, erp, euclidean,
                             msm, twe, wdtw)
from utils.errors import EmptySeries, InvalidMeasure, LengthMismatch

STEPS = ((1, 1), (1, 0), (0, 1))


def _in_band(i, j, p, q, window):
    if window is None:
        return True
    w = max(window, abs(p - q))
    return abs(i * q - j * p) <= w * q


def _cheapest_path(start, p, q, step_cost, allow_boundary, window=None):
    """
    Minimum total of step_cost over every path from start to (p, q).

    Step costs are nonnegative, so a branch already at or above the best
    complete total is cut.
    """
    best = [math.inf]

    def walk(i, j, total):
        if total >= best[0]:
            return
        if (i, j) == (p, q):
            best[0] = min(best[0], total)
            return
        for di, dj in STEPS:
            ni, nj = i + di, j + dj
            if ni > p or nj > q:
                continue
            boundary = ni == 0 or nj == 0
            if boundary and not allow_boundary:
                continue
            if not boundary and not _in_band(ni, nj, p, q, window):
                continue
            walk(ni, nj, total + step_cost((di, dj), ni, nj))

    walk(start[0], start[1], 0.0)
    return best[0]


def _dtw_family_oracle(a, b, cell_cost, penalty=0.0, window=None):
    def step_cost(step, i, j):
        return cell_cost(i, j) + (penalty if step != (1, 1) else 0.0)
    return cell_cost(1, 1) + _cheapest_path((1, 1), len(a), len(b), step_cost, False, window)


def dtw_oracle(a, b, window=None):
    return _dtw_family_oracle(a, b, lambda i, j: (a[i - 1] - b[j - 1]) ** 2, window=window)


def wdtw_oracle(a, b, g, window=None):
    half = len(a) / 2.0

    def cost(i, j):
        weight = 1.0 / (1.0 + math.exp(-g * (abs(i - j) - half)))
        return weight * (a[i - 1] - b[j - 1]) ** 2
    return _dtw_family_oracle(a, b, cost, window=window)


def adtw_oracle(a, b, omega, window=None):
    return _dtw_family_oracle(a, b, lambda i, j: (a[i - 1] - b[j - 1]) ** 2,
                              penalty=omega, window=window)


def erp_oracle(a, b, gap, window=None):
    def step_cost(step, i, j):
        if step == (1, 1):
            return abs(a[i - 1] - b[j - 1])
        if step == (1, 0):
            return abs(a[i - 1] - gap)
        return abs(b[j - 1] - gap)
    return _cheapest_path((0, 0), len(a), len(b), step_cost, True, window)


def twe_oracle(a, b, nu, lmbda, window=None):
    # index 0 holds the zero sample every series is prefixed with
    pa = [0.0] + list(a)
    pb = [0.0] + list(b)

    def step_cost(step, i, j):
        if step == (1, 1):
            return abs(pa[i] - pb[j]) + abs(pa[i - 1] - pb[j - 1]) + 2.0 * nu * abs(i - j)
        if step == (1, 0):
            return abs(pa[i] - pa[i - 1]) + lmbda + nu
        return abs(pb[j] - pb[j - 1]) + lmbda + nu
    return _cheapest_path((0, 0), len(a), len(b), step_cost, False, window)


def _split_merge(new, previous, other, c):
    if previous <= new <= other or previous >= new >= other:
        return c
    return c + min(abs(new - previous), abs(new - other))


def msm_oracle(a, b, c, window=None):
    def step_cost(step, i, j):
        if step == (1, 1):
            return abs(a[i - 1] - b[j - 1])
        if step == (1, 0):
            return _split_merge(a[i - 1], a[i - 2], b[j - 1], c)
        return _split_merge(b[j - 1], b[j - 2], a[i - 1], c)
    return abs(a[0] - b[0]) + _cheapest_path((1, 1), len(a), len(b), step_cost, False, window)


ELASTIC_CASES = [
    ("dtw", lambda a, b, w: dtw(a, b, w=w), dtw_oracle),
    ("wdtw", lambda a, b, w: wdtw(a, b, g=0.3, w=w),
     lambda a, b, w: wdtw_oracle(a, b, 0.3, w)),
    ("adtw", lambda a, b, w: adtw(a, b, omega=0.7, w=w),
     lambda a, b, w: adtw_oracle(a, b, 0.7, w)),
    ("erp", lambda a, b, w: erp(a, b, gap=0.25, w=w),
     lambda a, b, w: erp_oracle(a, b, 0.25, w)),
    ("twe", lambda a, b, w: twe(a, b, nu=0.05, lmbda=0.5, w=w),
     lambda a, b, w: twe_oracle(a, b, 0.05, 0.5, w)),
    ("msm", lambda a, b, w: msm(a, b, c=0.5, w=w),
     lambda a, b, w: msm_oracle(a, b, 0.5, w)),
]


class TestOracleEquivalence:
    """Each dynamic program equals brute-force enumeration over all alignments."""

    @pytest.mark.parametrize("name,measure,oracle", ELASTIC_CASES, ids=[c[0] for c in ELASTIC_CASES])
    def test_random_pairs_match_enumeration(self, name, measure, oracle):
        rng = np.random.default_rng(sum(map(ord, name)))
        for _ in range(200):
            a = rng.normal(size=int(rng.integers(1, 9)))
            b = rng.normal(size=int(rng.integers(1, 9)))
            assert measure(a, b, None) == pytest.approx(oracle(list(a), list(b), None), abs=1e-9)

    @pytest.mark.parametrize("name,measure,oracle", ELASTIC_CASES, ids=[c[0] for c in ELASTIC_CASES])
    def test_banded_pairs_match_enumeration(self, name, measure, oracle):
        rng = np.random.default_rng(sum(map(ord, name)) + 1)
        for _ in range(100):
            a = rng.normal(size=int(rng.integers(1, 9)))
            b = rng.normal(size=int(rng.integers(1, 9)))
            # covers bands narrower than, equal to and wider than the series
            w = int(rng.integers(0, 9))
            expected = oracle(list(a), list(b), w)
            assert measure(a, b, w) == pytest.approx(expected, abs=1e-9)

    def test_band_wider_than_series_is_unconstrained(self, rng):
        for length in range(2, 9):
            a, b = rng.normal(size=length), rng.normal(size=length)
            assert dtw(a, b, w=length - 1) == pytest.approx(dtw(a, b), abs=1e-12)
            assert msm(a, b, w=length - 1) == pytest.approx(msm(a, b), abs=1e-12)
            assert dtw(a, b, w=length - 2) >= dtw(a, b) - 1e-12

    def test_long_series_match_dense_recurrence(self, rng):
        """Row buffers are reused across rows; long banded runs still agree with a full table."""
        for p, q, w in ((60, 60, 3), (45, 70, 5), (80, 50, 0)):
            a, b = rng.normal(size=p), rng.normal(size=q)
            band = max(w, abs(p - q))
            table = np.full((p + 1, q + 1), np.inf)
            table[0, 0] = 0.0
            for i in range(1, p + 1):
                for j in range(1, q + 1):
                    if abs(i * q - j * p) <= band * q:
                        table[i, j] = (a[i - 1] - b[j - 1]) ** 2 + min(
                            table[i - 1, j - 1], table[i - 1, j], table[i, j - 1])
            assert dtw(a, b, w=w) == pytest.approx(table[p, q], rel=1e-12)

    def test_euclidean_matches_direct_summation(self, rng):
        for _ in range(200):
            length = int(rng.integers(1, 9))
            a, b = rng.normal(size=length), rng.normal(size=length)
            expected = math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))
            assert euclidean(a, b) == pytest.approx(expected, abs=1e-12)


class TestWorkedValues:
    """Hand-computed values for every measure."""

    def test_euclidean_triangle(self):
        assert euclidean([0, 0], [3, 4]) == pytest.approx(5.0)

    def test_dtw_repeated_sample_is_free(self):
        assert dtw([1, 2, 3], [1, 2, 2, 3]) == 0.0

    def test_dtw_single_cell_is_squared(self):
        assert dtw([0], [3]) == 9.0

    def test_wdtw_single_cell_weight(self):
        expected = 4.0 / (1.0 + math.exp(0.025))
        assert wdtw([0], [2], g=0.05) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(1.97501, abs=1e-5)

    def test_adtw_penalizes_off_diagonal_steps(self):
        assert adtw([0], [1, 1], omega=0.5) == pytest.approx(2.5)

    def test_erp_examples(self):
        assert erp([1], [2], gap=0.0) == pytest.approx(1.0)
        assert erp([1, 2], [2], gap=0.0) == pytest.approx(1.0)

    def test_twe_single_match(self):
        assert twe([0], [1]) == pytest.approx(1.0)

    def test_msm_examples(self):
        assert msm([1], [2], c=1.0) == pytest.approx(1.0)
        assert msm([1, 3], [1], c=1.0) == pytest.approx(3.0)

    def test_adtw_with_zero_omega_is_dtw(self, rng):
        for _ in range(100):
            a, b = rng.normal(size=12), rng.normal(size=12)
            assert adtw(a, b, omega=0.0) == pytest.approx(dtw(a, b), abs=1e-9)


class TestMetricProperties:
    """Identity, symmetry and nonnegativity on random pairs."""

    @pytest.fixture
    def measures(self):
        return [DistanceMeasure(kind) for kind in
                ("euclidean", "dtw", "wdtw", "adtw", "erp", "twe", "msm")]

    def test_identity(self, measures, rng):
        for _ in range(100):
            x = rng.normal(size=int(rng.integers(1, 30)))
            for measure in measures:
                assert dispatch(measure, x, x) == pytest.approx(0.0, abs=1e-12)

    def test_symmetry_and_nonnegativity(self, measures, rng):
        for _ in range(150):
            length = int(rng.integers(1, 25))
            a, b = rng.normal(size=length), rng.normal(size=length)
            for measure in measures:
                forward = dispatch(measure, a, b)
                assert forward >= 0.0
                assert forward == pytest.approx(dispatch(measure, b, a), abs=1e-9)

    def test_euclidean_triangle_inequality(self, rng):
        for _ in range(1000):
            a, b, c = (rng.normal(size=7) for _ in range(3))
            assert euclidean(a, c) <= euclidean(a, b) + euclidean(b, c) + 1e-9


class TestBands:
    """Sakoe-Chiba band behavior."""

    def test_zero_window_forces_diagonal(self, rng):
        a, b = rng.normal(size=10), rng.normal(size=10)
        measure = DistanceMeasure("dtw", window=0)
        assert dispatch(measure, a, b) == pytest.approx(float(np.sum((a - b) ** 2)))

    @pytest.mark.parametrize("function", [dtw, adtw, erp, twe, msm, wdtw])
    def test_distance_non_increasing_in_window(self, function, rng):
        a, b = rng.normal(size=15), rng.normal(size=15)
        values = [function(a, b, w=w) for w in range(0, 16)]
        for narrow, wide in zip(values, values[1:]):
            assert wide <= narrow + 1e-9
        assert values[-1] == pytest.approx(function(a, b), abs=1e-12)

    def test_unequal_lengths_widen_the_band(self, rng):
        a, b = rng.normal(size=6), rng.normal(size=9)
        # the band is never narrower than |p - q|, so w = 0 still has a path
        assert np.isfinite(dtw(a, b, w=0))
        assert dtw(a, b, w=9) == pytest.approx(dtw(a, b), abs=1e-12)


class TestValidation:
    """Structured errors for invalid input."""

    def test_euclidean_needs_equal_lengths(self):
        with pytest.raises(LengthMismatch):
            euclidean([1, 2], [1, 2, 3])

    def test_empty_series(self):
        with pytest.raises(EmptySeries):
            dtw([], [1.0])

    def test_negative_window(self):
        with pytest.raises(InvalidMeasure):
            dtw([1.0], [1.0], w=-1)

    @pytest.mark.parametrize("kind,params", [
        ("msm", {"c": 0.0}),
        ("twe", {"nu": -1.0}),
        ("twe", {"lambda": -0.5}),
        ("wdtw", {"g": float("nan")}),
        ("dtw", {"g": 1.0}),
    ])
    def test_invalid_parameters(self, kind, params):
        with pytest.raises(InvalidMeasure):
            DistanceMeasure(kind, params)

    def test_unknown_measure(self):
        with pytest.raises(InvalidMeasure):
            DistanceMeasure("lcss")

    def test_lambda_alias_and_defaults(self):
        measure = DistanceMeasure("twe", {"lambda": 2.0}, window=3)
        assert measure.params == {"nu": 0.001, "lmbda": 2.0}
        assert list(measure.packed_params()) == [0.001, 2.0]
        assert measure.packed_window() == 3
        assert DistanceMeasure("euclidean", window=5).window is None

