import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from crmap.grid import GridSpec, GroundTruthMap
from crmap.metrics import error_timeseries, inconsistency, map_error

SPEC = GridSpec(0.4, 0.1, 0.1)
TRUTH = GroundTruthMap(SPEC, [0.0, 1.0, 1.0, 0.0])

unit = arrays(float, 4, elements=st.floats(0.0, 1.0))


def test_map_error_examples():
    assert map_error([0.0, 1.0, 1.0, 0.0], TRUTH) == 0.0
    assert map_error([0.5] * 4, TRUTH) == 2.0
    assert map_error([1.0, 0.0, 0.0, 1.0], TRUTH) == 4.0


def test_map_error_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        map_error([0.5] * 3, TRUTH)


def test_inconsistency_examples():
    # error 0.5 per voxel; a 0.2 standard deviation covers 0.4 of it
    assert inconsistency([0.5] * 4, [0.04] * 4, TRUTH) == pytest.approx(4 * 0.1)
    assert inconsistency([0.5] * 4, [0.0625] * 4, TRUTH) == 0.0
    assert inconsistency([0.5] * 4, [0.0] * 4, TRUTH) == pytest.approx(map_error([0.5] * 4, TRUTH))
    with pytest.raises(ValueError):
        inconsistency([0.5] * 4, [-0.1] * 4, TRUTH)


@given(unit, unit)
def test_inconsistency_bounded_by_error(means, var):
    ic = inconsistency(means, var, TRUTH)
    assert 0.0 <= ic <= map_error(means, TRUTH) + 1e-12


@given(unit)
def test_wide_envelope_is_consistent(means):
    err = np.abs(means - TRUTH.occupancy)
    assert inconsistency(means, (err / 2.0) ** 2 + 1e-12, TRUTH) == pytest.approx(0.0, abs=1e-9)


@given(unit, unit, unit)
def test_error_triangle_inequality(a, b, t):
    assert map_error(a, t) <= map_error(a, b) + map_error(b, t) + 1e-12


def test_error_timeseries():
    log = [(0.1 * k, np.full(4, 0.5)) for k in range(1, 4)]
    series = error_timeseries(log, TRUTH)
    assert len(series) == 3
    np.testing.assert_allclose(series.time, [0.1, 0.2, 0.3])
    np.testing.assert_allclose(series.total_abs_error, 2.0)
