import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from bifbm import BifBmParams, TimeGrid, chaos, cov_bifbm, cov_matrix
from bifbm.checks import record
from bifbm.estimators import box_count, level_crossings
from bifbm.report import records_csv, records_from_csv

hs = st.floats(0.05, 0.95)
ks = st.floats(0.1, 1.0)
times = st.floats(1e-3, 5.0)


@given(hs, ks, times, times)
def test_covariance_symmetric_and_diagonal(h, k, s, t):
    p = BifBmParams(h, k)
    assert cov_bifbm(s, t, p) == cov_bifbm(t, s, p)
    assert math.isclose(float(cov_bifbm(t, t, p)), t ** (2 * h * k), rel_tol=1e-12)
    # Cauchy-Schwarz
    assert cov_bifbm(s, t, p) ** 2 <= cov_bifbm(s, s, p) * cov_bifbm(t, t, p) * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(hs, ks, st.lists(st.floats(0.05, 2.0), min_size=2, max_size=12, unique=True))
def test_gram_factorizes(h, k, pts):
    pts = sorted(pts)
    if min(np.diff(pts)) < 1e-3:
        return
    cm = cov_matrix(TimeGrid(pts), BifBmParams(h, k))
    assert cm.jitter_applied <= 1e-10
    np.testing.assert_allclose(cm.factor @ cm.factor.T, cm.entries, atol=1e-9)


@given(st.integers(1, 30), st.floats(-4, 4))
def test_hermite_recurrence(n, x):
    lhs = (n + 1) * chaos.hermite(n + 1, x)
    rhs = x * chaos.hermite(n, x) - chaos.hermite(n - 1, x)
    assert math.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-12)


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=50), st.floats(-5, 5))
def test_crossings_shift_invariant(vals, c):
    v = np.array(vals)
    levels = np.array([-1.5, 0.25, 3.0])
    a = level_crossings(v, levels)
    b = level_crossings(v * 2, levels * 2)
    assert np.array_equal(a, b)
    assert np.all(a <= len(vals))


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=40))
def test_box_count_monotone(pts):
    pts = np.array(pts)
    counts = [box_count(pts, s) for s in (0.5, 0.25, 0.125)]
    assert counts[0] <= counts[1] <= counts[2] <= len(pts)


@given(st.floats(allow_nan=True, allow_infinity=True), st.floats(-1e300, 1e300), st.floats(0, 1e3))
def test_record_csv_roundtrip(measured, ref, tol):
    rec = record("x", "anchor, with comma", measured, ref, "abs", tol, 1, {"note": "q\"uote"})
    back = records_from_csv(records_csv([rec]))[0]
    if math.isnan(measured):
        assert math.isnan(back.measured)
        assert back.status == "fail"
    else:
        assert back == rec
