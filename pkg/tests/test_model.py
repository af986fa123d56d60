import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaselag.model import (ConcentricDiscs, Interval, PhaseLagModel, Rectangle, ValidationError,
                            check, taylor_coefficients, validate)


def test_taylor_zeroth_term():
    a, b = taylor_coefficients(0.3, 0.7, 1.0, 0)
    assert a == [1.0] and b == [1.0]


def test_taylor_factorials():
    a, b = taylor_coefficients(1.0, 2.0, 1.0, 2)
    assert a == [1.0, 1.0, 0.5]
    assert b == [1.0, 2.0, 2.0]


def test_taylor_first_order_matches_case1_coefficients():
    a, b = taylor_coefficients(0.5, 0.25, 1.0, 1)
    assert a == [1.0, 0.5] and b == [1.0, 0.25]


def test_taylor_degenerate_a_n():
    with pytest.raises(ValueError, match="degenerate a_n"):
        taylor_coefficients(0.0, 1.0, 1.0, 1)


@pytest.mark.parametrize("args", [(1.0, 1.0, 0.0, 1), (1.0, 1.0, 1.0, -1), (-1.0, 1.0, 1.0, 0)])
def test_taylor_rejects_bad_inputs(args):
    with pytest.raises(ValueError):
        taylor_coefficients(*args)


@given(st.floats(0.01, 3.0), st.floats(0.0, 3.0), st.floats(0.1, 5.0), st.integers(0, 7))
def test_taylor_prefix_property(tq, tt, k, n):
    a, b = taylor_coefficients(tq, tt, k, n)
    a2, b2 = taylor_coefficients(tq, tt, k, n + 1)
    assert a2[: n + 1] == a and b2[: n + 1] == b


def test_valid_model_passes():
    m = PhaseLagModel((1.0, 0.5), (1.0, 0.25), beta=1.0)
    assert validate(m, Rectangle(1, 1)) is m
    assert m.n == 1 and not m.decoupled


def test_a_n_zero_rejected():
    with pytest.raises(ValidationError, match="a_n > 0 violated"):
        validate(PhaseLagModel((1.0, 0.0), (1.0, 0.25)))


def test_equal_radii_rejected():
    with pytest.raises(ValidationError, match="R0 < R violated"):
        validate(PhaseLagModel((1.0,), (1.0,)), ConcentricDiscs(1.0, 1.0))


def test_all_violations_reported():
    m = PhaseLagModel((1.0, 0.0), (1.0, -1.0), kappa1=0.0, rho=2.0)
    with pytest.raises(ValidationError) as err:
        validate(m, Interval(-1.0))
    constraints = {d.constraint for d in err.value.diagnostics}
    assert {"a_n > 0", "b_n > 0", "kappa1 > 0", "L > 0"} <= constraints
    assert any("rho" in c for c in constraints)


def test_length_mismatch_and_nonfinite():
    problems = check(PhaseLagModel((1.0, math.nan), (1.0,)))
    names = {p.constraint for p in problems}
    assert "len(b) == len(a)" in names


def test_decoupled_flag():
    assert PhaseLagModel((1.0,), (1.0,), beta=0.0).decoupled


models = st.builds(
    PhaseLagModel,
    st.lists(st.floats(-2, 2), min_size=1, max_size=4),
    st.lists(st.floats(-2, 2), min_size=1, max_size=4),
    kappa1=st.floats(-1, 3), kappa2=st.floats(-1, 3), beta=st.floats(-3, 3),
)


@settings(max_examples=200)
@given(models)
def test_validate_idempotent(m):
    try:
        once = validate(m)
    except ValidationError as err:
        with pytest.raises(ValidationError) as again:
            validate(m)
        assert [str(d) for d in again.value.diagnostics] == [str(d) for d in err.diagnostics]
    else:
        assert validate(once) == once
