import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from src.algorithms.moments import SampleMoments
from src.algorithms.utility import (
    BudgetConstraint,
    UtilityComparison,
    UtilitySpec,
    check_holdings,
    compare_utilities,
    crra_marginal_utility,
    crra_utility,
    expected_utility_unconditional,
    implied_consumption,
    relative_risk_aversion,
    uncertain_utility,
)
from src.core.errors import InvalidParameter, NonPositiveConsumption, UndefinedAtLogLimit


@pytest.mark.parametrize(
    "rho, expected",
    [(1.033526, 7.103787), (1.0089, 7.827697)],
)
def test_certain_utility_golden_values(rho, expected):
    assert crra_utility(3340, UtilitySpec(rho)) == pytest.approx(expected, abs=1e-5)


def test_log_limit():
    assert crra_utility(3340, UtilitySpec(1.0)) == pytest.approx(math.log(3340), abs=1e-15)


@pytest.mark.parametrize("offset", [1e-6, -1e-6, 1e-9, -1e-9])
def test_continuous_through_log_limit(offset):
    assert abs(crra_utility(3340, UtilitySpec(1.0 + offset)) - math.log(3340)) < 1e-4


def test_unshifted_form():
    assert crra_utility(4.0, UtilitySpec(0.5, shifted=False)) == pytest.approx(4.0)
    with pytest.raises(UndefinedAtLogLimit):
        crra_utility(4.0, UtilitySpec(1.0, shifted=False))


def test_linear_utility():
    assert crra_utility(10.0, UtilitySpec(0.0)) == pytest.approx(9.0)


@pytest.mark.parametrize("c", [0.0, -1.0, float("nan")])
def test_non_positive_consumption(c):
    with pytest.raises(NonPositiveConsumption):
        crra_utility(c, UtilitySpec(2.0))


def test_negative_rho_rejected():
    with pytest.raises(InvalidParameter):
        UtilitySpec(-0.1)


@settings(max_examples=200, deadline=None)
@given(
    c1=st.floats(1, 100),
    factor=st.floats(1.01, 10),
    rho=st.floats(0, 5),
)
def test_strictly_increasing(c1, factor, rho):
    spec = UtilitySpec(rho)
    assert crra_utility(c1 * factor, spec) > crra_utility(c1, spec)


@settings(max_examples=200, deadline=None)
@given(
    c1=st.floats(1, 100),
    c2=st.floats(1, 100),
    lam=st.floats(0.1, 0.9),
    rho=st.floats(0.05, 5),
)
def test_strictly_concave(c1, c2, lam, rho):
    assume(abs(c1 - c2) >= 0.5)
    spec = UtilitySpec(rho)
    mixed = crra_utility(lam * c1 + (1 - lam) * c2, spec)
    assert mixed > lam * crra_utility(c1, spec) + (1 - lam) * crra_utility(c2, spec)


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0, 4.0])
def test_relative_risk_aversion_is_rho(rho):
    assert relative_risk_aversion(10.0, UtilitySpec(rho)) == pytest.approx(rho, rel=1e-3)


def test_marginal_utility():
    assert crra_marginal_utility(4.0, 2.0) == pytest.approx(1 / 16)


def test_expected_utility_at_log_limit():
    m = SampleMoments.from_values(mu_z=7.3, sigma2_z=0.17)
    assert expected_utility_unconditional(m, UtilitySpec(1.0)) == 7.3
    near = expected_utility_unconditional(m, UtilitySpec(1.0 + 1e-9))
    assert near == pytest.approx(7.3, abs=1e-6)


def test_expected_utility_without_dispersion_equals_certain_utility():
    m = SampleMoments.from_values(mu_z=math.log(50.0), sigma2_z=0.0)
    spec = UtilitySpec(2.0)
    assert expected_utility_unconditional(m, spec) == pytest.approx(crra_utility(50.0, spec))


def test_uncertain_utility_ratio_matches_reference_values():
    assert 6.563893 / 6.192703 == pytest.approx(1.019392 / 0.961745, abs=1e-4)
    assert 7.168177 / 6.762365 == pytest.approx(1.0192 / 0.9615, abs=1e-4)


def test_uncertain_utility_ratio_is_factor_ratio():
    expected_u = 6.5
    ratio = uncertain_utility(expected_u, 0.99, 1.019392) / uncertain_utility(expected_u, 0.99, 0.961745)
    assert ratio == pytest.approx(1.019392 / 0.961745, rel=1e-14)


@pytest.mark.parametrize("beta", [0.0, 1.01, float("nan")])
def test_discount_factor_range(beta):
    with pytest.raises(InvalidParameter):
        uncertain_utility(1.0, beta, 1.0)


def test_sufficiency_must_be_positive():
    with pytest.raises(InvalidParameter):
        uncertain_utility(1.0, 0.99, 0.0)


def test_compare_utilities_difference():
    m = SampleMoments.from_values(mu_z=math.log(100.0), sigma2_z=0.0)
    cmp = compare_utilities(100.0, m, UtilitySpec(2.0), beta=1.0, eta=0.99)
    assert cmp.certain == pytest.approx(0.99)
    assert cmp.uncertain == pytest.approx(0.99 * 0.99)
    assert cmp.difference == pytest.approx(0.99 * 0.01)


def test_comparison_validates_inputs():
    with pytest.raises(InvalidParameter):
        UtilityComparison.build(1.0, 1.0, beta=2.0, eta=1.0)


def test_budget_constraint_variants():
    kwargs = dict(theta_t=1.0, theta_next=1.0, z_t=1.0, z_next=0.0, p_t=10.0, q_t=0.9, y_t=2.0)
    assert implied_consumption(**kwargs) == pytest.approx(2.9)
    assert implied_consumption(**kwargs, constraint=BudgetConstraint.AT_MATURITY) == pytest.approx(3.0)


def test_budget_constraint_non_positive_consumption():
    with pytest.raises(NonPositiveConsumption):
        implied_consumption(0.5, 1.0, 0.0, 0.0, p_t=10.0, q_t=0.9, y_t=1.0)


@pytest.mark.parametrize("theta, z", [(1.5, 0.5), (0.5, -0.1)])
def test_holdings_range(theta, z):
    with pytest.raises(InvalidParameter):
        check_holdings(theta, z)
