import math

import pytest

from jfdiv import (
    InadmissibleDensity,
    classic_debruijn_check,
    debruijn_check,
    make_gamma_like,
    make_gaussian,
    make_rakhmanov_hermite,
    make_smooth_uniform,
)
from jfdiv.divergences import extrapolate_to_zero

EPS = (1e-2, 5e-3, 2.5e-3)


def test_extrapolation_exact_on_quadratic():
    h = (0.4, 0.2, 0.1)
    assert extrapolate_to_zero(h, [3 - 2 * t + 5 * t * t for t in h]) == pytest.approx(3.0, rel=1e-13)


def test_classic_standard_normal():
    res = classic_debruijn_check(make_gaussian(0, 1), EPS)
    assert res.rhs == pytest.approx(0.5, rel=1e-9)
    assert res.lhs_slope == pytest.approx(0.5, rel=0.05)
    assert res.relative_gap < 0.05


def test_classic_wide_normal():
    res = classic_debruijn_check(make_gaussian(0, 2), EPS)
    assert res.lhs_slope == pytest.approx(0.125, rel=0.05)
    assert res.relative_gap < 0.05


def test_classic_smooth_uniform():
    assert classic_debruijn_check(make_smooth_uniform(1.0, 0.25), EPS).relative_gap < 0.05


def test_classic_hermite_with_zeros():
    # smoothing a zero adds a sqrt(eps) term that the extrapolation does not remove,
    # so the gap closes only like sqrt(eps)
    d = make_rakhmanov_hermite(2)
    gaps = [classic_debruijn_check(d, tuple(e * k for e in EPS)).relative_gap for k in (1.0, 0.1, 0.01)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.01
    assert gaps[0] / gaps[2] == pytest.approx(10.0, rel=0.2)


def test_identity_shifted_normals():
    res = debruijn_check(make_gaussian(0, 1), make_gaussian(1, 1), EPS)
    assert res.rhs < 0
    assert res.relative_gap < 0.05


def test_identity_scaled_normals():
    assert debruijn_check(make_gaussian(0, 1), make_gaussian(0, 2), EPS).relative_gap < 0.05


def test_identity_same_density_zero_gap():
    d = make_gaussian(0.3, 1.2)
    res = debruijn_check(d, d, EPS)
    assert abs(res.lhs_slope) < 1e-9 and abs(res.rhs) < 1e-9
    assert res.relative_gap == 0.0


def test_slopes_reported_per_epsilon():
    res = debruijn_check(make_gaussian(0, 1), make_gaussian(1, 1), EPS)
    assert res.epsilons == EPS
    assert len(res.slopes) == 3
    assert all(math.isfinite(s) for s in res.slopes)


@pytest.mark.parametrize("eps", [(1e-2,), (1e-2, 5e-3), (1e-2, 2e-2, 5e-3), (1e-2, 0.0, -1e-3)])
def test_epsilon_validation(eps):
    with pytest.raises(ValueError):
        debruijn_check(make_gaussian(0, 1), make_gaussian(1, 1), eps)
    with pytest.raises(ValueError):
        classic_debruijn_check(make_gaussian(0, 1), eps)


def test_rejects_infinite_fisher():
    with pytest.raises(InadmissibleDensity):
        classic_debruijn_check(make_gamma_like(0.5), EPS)
