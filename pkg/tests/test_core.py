import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdlpenalty.core import (
    Box,
    FitTrace,
    InvalidInputError,
    Lambda,
    ResidualKind,
    StopReason,
    Tikhonov,
    UpperSmoothness,
    project_box,
)


def test_clamp_below_lower_bound():
    assert project_box([0.5], Box.uniform(1, 10, 1)).weights.tolist() == [1.0]


def test_interior_point_unchanged():
    assert project_box([3.0], Box.uniform(1, 10, 1)).weights.tolist() == [3.0]


@pytest.mark.parametrize("bad", [np.inf, -np.inf, np.nan])
def test_non_finite_weight_rejected(bad):
    with pytest.raises(InvalidInputError):
        project_box([bad], Box.uniform(1, 10, 1))


def test_box_validation():
    with pytest.raises(InvalidInputError):
        Box.uniform(0.0, 1.0, 2)
    with pytest.raises(InvalidInputError):
        Box.uniform(2.0, 1.0, 2)
    with pytest.raises(InvalidInputError):
        Box.uniform(1.0, 2.0, 0)


def test_lambda_must_be_inside_its_box():
    box = Box.uniform(1, 10, 2)
    with pytest.raises(InvalidInputError):
        Lambda(np.array([0.5, 2.0]), box)
    lam = Lambda(np.array([1.0, 10.0]), box)
    assert lam.dim == 2 and len(lam) == 2


def test_box_center_is_geometric():
    box = Box.uniform(1e-6, 1e6, 3)
    np.testing.assert_allclose(Lambda.center(box).weights, 1.0, rtol=1e-12)


def test_lambda_storage_is_read_only():
    lam = Lambda.center(Box.uniform(1, 4, 2))
    with pytest.raises(ValueError):
        lam.weights[0] = 3.0


finite = st.floats(min_value=-1e12, max_value=1e12, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=6), st.floats(1e-6, 1.0), st.floats(2.0, 1e6))
def test_projection_idempotent_and_valid(raw, lo, hi):
    box = Box.uniform(lo, hi, len(raw))
    once = project_box(raw, box)
    twice = project_box(once.weights, box)
    np.testing.assert_array_equal(once.weights, twice.weights)
    assert np.all(once.weights >= lo) and np.all(once.weights <= hi)
    assert np.all(np.isfinite(once.weights)) and np.all(once.weights > 0)


def test_smoothness_validation():
    with pytest.raises(InvalidInputError):
        UpperSmoothness(np.array([-1.0]))
    with pytest.raises(InvalidInputError):
        UpperSmoothness(np.array([1.0]), c0=-0.1)
    with pytest.raises(NotImplementedError):
        UpperSmoothness(np.array([1.0]), r_kind=ResidualKind.BOUNDED_RESIDUAL)
    np.testing.assert_array_equal(UpperSmoothness(np.array([2.0])).broadcast(3), [2.0, 2.0, 2.0])
    with pytest.raises(InvalidInputError):
        UpperSmoothness(np.array([1.0, 2.0])).broadcast(3)


def test_tikhonov_scale_positive():
    with pytest.raises(InvalidInputError):
        Tikhonov(0.0)


def test_empty_trace_defaults():
    tr = FitTrace()
    assert len(tr) == 0 and not tr.converged and tr.stop_reason is None
    assert StopReason("max_iter") is StopReason.MAX_ITER
