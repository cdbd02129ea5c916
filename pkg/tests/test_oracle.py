import math

import mpmath as mp
import numpy as np
import pytest

from mdlpenalty.core import InvalidInputError
from mdlpenalty.oracle import (
    QuadratureError,
    Scalar1DModel,
    gap_check,
    gap_constant,
    integrate,
    interior_mass,
    lnml_quadrature,
    log_lower_bound,
    log_upper_bound,
    minimize_1d,
    z_quadrature,
)

UNB = Scalar1DModel(None)
BND = Scalar1DModel(1.0)
GRID = np.logspace(-2, 2, 20)


def test_unbounded_normalizer_unit_weight():
    assert z_quadrature(UNB, 1.0) == pytest.approx(math.sqrt(2), rel=1e-8)


def test_heavy_penalty_leaves_a_density():
    assert z_quadrature(UNB, 1e6) == pytest.approx(1.0, rel=1e-6)
    assert z_quadrature(BND, 1e6) == pytest.approx(1.0, rel=1e-6)


# reference values from arbitrary-precision integration of the clamped-estimate integrand
@pytest.mark.parametrize(
    "weight, expected",
    [(0.1, 1.73730300414621469835758288856), (1.0, 1.38421744207989229173960828393), (10.0, 1.04880884817015154699145351359)],
)
def test_bounded_normalizer_reference(weight, expected):
    assert z_quadrature(BND, weight) == pytest.approx(expected, rel=1e-9)
    assert z_quadrature(BND, weight) <= z_quadrature(UNB, weight)


def test_lnml_at_origin():
    assert lnml_quadrature(UNB, 0.0, 1.0) == pytest.approx(0.5 * math.log(2 * math.pi) + 0.5 * math.log(2), abs=1e-9)


def test_lnml_shift_between_weights_is_normalizer_ratio():
    # x = 0 keeps the penalized minimum at log(2 pi)/2 for every weight
    a, b = lnml_quadrature(BND, 0.0, 0.5), lnml_quadrature(BND, 0.0, 5.0)
    assert a - b == pytest.approx(math.log(z_quadrature(BND, 0.5) / z_quadrature(BND, 5.0)), abs=1e-12)
    assert a > b


def test_refinement_self_consistent():
    f = lambda x: np.exp(-BND.rerm_min(x, 0.3))
    coarse, _ = integrate(f, BND.breakpoints(0.3), rtol=1e-11)
    fine, _ = integrate(f, BND.breakpoints(0.3), rtol=1e-11, initial_panels=64)
    assert coarse == pytest.approx(fine, rel=1e-9)


def test_refinement_budget_exhaustion_raises():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.exp(-1e8 * x * x), [-1.0, 0.3, 1.0], max_levels=1)


def test_weight_must_be_positive():
    for bad in (0.0, -1.0, math.inf):
        with pytest.raises(InvalidInputError):
            z_quadrature(BND, bad)
    with pytest.raises(InvalidInputError):
        Scalar1DModel(0.0)


def test_interior_mass_against_normal_cdf():
    k = 1.0 * (1 + 0.2)
    for psi in (0.0, 0.7, 2.5):
        want = mp.ncdf(k - psi) - mp.ncdf(-k - psi)
        assert interior_mass(BND, psi, 0.2) == pytest.approx(float(want), abs=1e-12)
    assert interior_mass(UNB, 3.0, 0.2) == 1.0


def test_upper_bound_dominates_and_lower_bound_is_dominated():
    for model in (UNB, BND):
        for lam in GRID:
            lz = math.log(z_quadrature(model, lam))
            assert log_upper_bound(model, lam) >= lz - 1e-8 * abs(lz)
            assert lz >= log_lower_bound(model, lam, GRID[0], 0.7) - 1e-12


def test_unbounded_gap_vanishes():
    rep = gap_check(UNB, GRID)
    assert rep.bound == 0.0 and math.isinf(rep.neighbor)
    assert np.abs(rep.gaps).max() < 1e-9 and rep.ok


def test_bounded_gap_below_constant():
    lams = [0.1, 1.0, 10.0]
    rep = gap_check(BND, lams)
    assert rep.ok and np.all(rep.gaps > 0)
    # the constant, recomputed independently with the normal CDF
    u, k = rep.neighbor, 1.0 * (1 + rep.lambda_star)
    tinf = mp.ncdf(k - (1 + u)) - mp.ncdf(-k - (1 + u))
    want = -mp.log(mp.erf(u / mp.sqrt(2))) - mp.log(tinf)
    assert rep.bound == pytest.approx(float(want), rel=1e-9)
    # the gap moves with the weight while the constant does not
    assert np.ptp(rep.gaps) > 0.1


def test_gap_constant_is_infinite_without_a_finite_neighbor():
    assert math.isinf(gap_constant(BND, 0.1, math.inf))
    assert gap_check(BND, [1.0], neighbor=math.inf).ok


def test_lambda_star_must_not_exceed_grid():
    with pytest.raises(InvalidInputError):
        gap_check(BND, [0.5, 1.0], lambda_star=0.7)


def test_minimize_quadratic():
    assert minimize_1d(lambda x: (x - 3) ** 2, (0.0, 10.0)) == pytest.approx(3.0, abs=1e-10)


def test_minimize_normalizer_objective():
    x = minimize_1d(lambda v: v / 2 + 0.5 * math.log((4 + v) / v), (1e-6, 10.0))
    assert x == pytest.approx(2 * (math.sqrt(2) - 1), abs=1e-10)


def test_minimize_monotone_returns_endpoint():
    assert minimize_1d(lambda x: x, (1.0, 2.0)) == 1.0
    assert minimize_1d(lambda x: -x, (1.0, 2.0)) == 2.0
    with pytest.raises(InvalidInputError):
        minimize_1d(lambda x: x, (2.0, 1.0))
