import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from src.algorithms.calibration import solve_system
from src.algorithms.classify import (
    AllocationSign,
    AttitudeLabel,
    Curvature,
    DefinitionGroup,
    InvestorType,
    RiskAttitude,
    allocation_sign,
    classify,
    classify_pipeline,
    curvature_for,
)
from src.algorithms.moments import compute_moments
from src.algorithms.utility import UtilityComparison
from src.core.dataset import DatasetVariant, load_dataset
from src.core.errors import ClassificationError, InvalidCombination, InvalidParameter, Unclassifiable

CONCAVE = Curvature.STRICTLY_CONCAVE
CONVEX = Curvature.STRICTLY_CONVEX_INCREASING
ONE = DefinitionGroup.ONE
TWO = DefinitionGroup.TWO


def comparison(certain, uncertain, eta):
    return UtilityComparison(certain=certain, uncertain=uncertain, eta=eta, beta=1.0, expected_u=uncertain / eta)


@pytest.mark.parametrize(
    "certain, uncertain, eta, curvature, group, label, equation",
    [
        (10.0, 5.0, 0.9, CONCAVE, ONE, AttitudeLabel.RISK_AVERSE, 1),
        (5.0, 10.0, 1.1, CONCAVE, ONE, AttitudeLabel.RISK_LOVING, 2),
        (10.0, 5.0, 1.1, CONCAVE, ONE, AttitudeLabel.NOT_ENOUGH_RISK_LOVING, 3),
        (5.0, 5.0, 0.9, CONCAVE, ONE, AttitudeLabel.RISK_NEUTRAL, 4),
        (5.0, 10.0, 0.9, CONVEX, ONE, AttitudeLabel.NOT_ENOUGH_RISK_AVERSE, 5),
        (10.0, 5.0, 0.9, CONCAVE, TWO, AttitudeLabel.RISK_AVERSE, 6),
        (10.0, 5.0, 1.1, CONCAVE, TWO, AttitudeLabel.NOT_ENOUGH_RISK_LOVING, 7),
        (5.0, 10.0, 1.1, CONVEX, TWO, AttitudeLabel.RISK_LOVING, 8),
        (5.0, 10.0, 0.9, CONVEX, TWO, AttitudeLabel.NOT_ENOUGH_RISK_AVERSE, 9),
        (5.0, 5.0, 1.1, CONVEX, TWO, AttitudeLabel.RISK_NEUTRAL, 10),
        (10.0, 5.0, 0.9, Curvature.HORIZONTAL, TWO, AttitudeLabel.RISK_AVERSE, 6),
        (5.0, 10.0, 1.1, Curvature.HORIZONTAL, TWO, AttitudeLabel.RISK_LOVING, 8),
    ],
)
def test_definitions(certain, uncertain, eta, curvature, group, label, equation):
    attitude = classify(comparison(certain, uncertain, eta), curvature, group)
    assert attitude.label is label
    assert attitude.defining_equation == equation
    assert attitude.group is group


@pytest.mark.parametrize(
    "certain, uncertain, eta, curvature, group",
    [
        (5.0, 10.0, 0.9, CONCAVE, ONE),
        (5.0, 10.0, 1.1, CONCAVE, TWO),
        (10.0, 5.0, 0.9, CONVEX, TWO),
        (5.0, 10.0, 0.9, Curvature.LINEAR, ONE),
    ],
)
def test_combinations_outside_every_definition(certain, uncertain, eta, curvature, group):
    with pytest.raises(Unclassifiable):
        classify(comparison(certain, uncertain, eta), curvature, group)


@pytest.mark.parametrize("group", [ONE, TWO])
def test_horizontal_curve_excludes_not_enough_risk_averse(group):
    with pytest.raises(InvalidCombination):
        classify(comparison(5.0, 10.0, 0.9), Curvature.HORIZONTAL, group)


@pytest.mark.parametrize("certain, uncertain", [(10.0, 5.0), (5.0, 10.0), (5.0, 5.0)])
def test_zero_allocation_is_unclassifiable(certain, uncertain):
    with pytest.raises(Unclassifiable):
        classify(comparison(certain, uncertain, 1.0), CONCAVE, TWO)


def test_negative_tolerance_rejected():
    with pytest.raises(InvalidParameter):
        classify(comparison(10.0, 5.0, 0.9), CONCAVE, TWO, tol=-1.0)


def test_tolerance_turns_small_difference_neutral():
    cmp = comparison(5.0 + 1e-6, 5.0, 0.9)
    assert classify(cmp, CONCAVE, TWO).label is AttitudeLabel.RISK_AVERSE
    assert classify(cmp, CONCAVE, TWO, tol=1e-5).label is AttitudeLabel.RISK_NEUTRAL


utilities = st.floats(-50, 50, allow_nan=False)
etas = st.floats(0.1, 3.0).filter(lambda e: e != 1.0)
curvatures = st.sampled_from(list(Curvature))
groups = st.sampled_from(list(DefinitionGroup))


@settings(max_examples=300, deadline=None)
@given(certain=utilities, uncertain=utilities, eta=etas, curvature=curvatures, group=groups,
       tol=st.floats(0, 1))
def test_trichotomy(certain, uncertain, eta, curvature, group, tol):
    cmp = comparison(certain, uncertain, eta)
    try:
        attitude = classify(cmp, curvature, group, tol)
    except ClassificationError:
        assert abs(cmp.difference) > tol
        return
    neutral = attitude.label is AttitudeLabel.RISK_NEUTRAL
    assert neutral == (abs(cmp.difference) <= tol)


@settings(max_examples=300, deadline=None)
@given(certain=utilities, uncertain=utilities, eta=etas, curvature=curvatures, group=groups,
       tol1=st.floats(0, 1), extra=st.floats(0, 1))
def test_tolerance_monotonicity(certain, uncertain, eta, curvature, group, tol1, extra):
    cmp = comparison(certain, uncertain, eta)
    tol2 = tol1 + extra

    def outcome(tol):
        try:
            return classify(cmp, curvature, group, tol).label
        except ClassificationError as e:
            return type(e)

    first, second = outcome(tol1), outcome(tol2)
    if first is AttitudeLabel.RISK_NEUTRAL:
        assert second is AttitudeLabel.RISK_NEUTRAL
    if second is not AttitudeLabel.RISK_NEUTRAL:
        assert first == second


def test_allocation_sign():
    assert allocation_sign(0.96, 1.03) is AllocationSign.NEGATIVE
    assert allocation_sign(1.02, 1.03) is AllocationSign.POSITIVE
    assert allocation_sign(1.0, 1.03) is AllocationSign.ZERO
    with pytest.raises(InvalidParameter):
        allocation_sign(0.0, 1.0)


def test_curvature_for():
    assert curvature_for(1.03) is CONCAVE
    assert curvature_for(0.0) is Curvature.LINEAR
    with pytest.raises(InvalidParameter):
        curvature_for(-1.0)


def test_attitude_must_match_its_equation():
    with pytest.raises(InvalidParameter):
        RiskAttitude(AttitudeLabel.RISK_LOVING, TWO, 6, AllocationSign.NEGATIVE)
    with pytest.raises(InvalidParameter):
        RiskAttitude(AttitudeLabel.RISK_AVERSE, TWO, 1, AllocationSign.NEGATIVE)


def test_investor_allocation_text():
    assert InvestorType.EQUITY.allocation_text(AllocationSign.NEGATIVE) == \
        "Equity investors allocate extra negative utility"
    assert InvestorType.RISK_FREE.allocation_text(AllocationSign.POSITIVE) == \
        "Risk-free asset investors allocate extra positive utility"




def test_classify_checks_the_curve_rho():
    cmp = comparison(10.0, 5.0, 0.9)
    assert classify(cmp, CONCAVE, TWO, rho=1.03) == classify(cmp, CONCAVE, TWO)
    with pytest.raises(InvalidParameter):
        classify(cmp, CONCAVE, TWO, rho=-0.5)


def outcome_of(cmp, curvature, group, tol=0.0):
    try:
        return classify(cmp, curvature, group, tol).label
    except ClassificationError as e:
        return type(e)


@settings(max_examples=300, deadline=None)
@given(certain=utilities, uncertain=utilities, eta=etas, curvature=curvatures, group=groups,
       k=st.floats(0.01, 100))
def test_labels_invariant_under_common_rescaling(certain, uncertain, eta, curvature, group, k):
    assume(abs(certain - uncertain) > 1e-9 * max(1.0, abs(certain), abs(uncertain)))
    original = outcome_of(comparison(certain, uncertain, eta), curvature, group)
    scaled = outcome_of(comparison(k * certain, k * uncertain, eta), curvature, group)
    assert original == scaled


@settings(max_examples=300, deadline=None)
@given(certain=utilities, uncertain=utilities, eta=etas, tol=st.floats(0, 1))
def test_groups_agree_under_concave_curve(certain, uncertain, eta, tol):
    cmp = comparison(certain, uncertain, eta)
    first = outcome_of(cmp, CONCAVE, ONE, tol)
    second = outcome_of(cmp, CONCAVE, TWO, tol)
    for label in (AttitudeLabel.RISK_AVERSE, AttitudeLabel.NOT_ENOUGH_RISK_LOVING):
        assert (first is label) == (second is label)


# ==================== 参考数据 ====================
# 预测值版本的 ρ 与参考值差 0.0007，效用偏差约 0.02，见 resources/data/README.md
REFERENCE = {
    DatasetVariant.REALIZED: {"tol": 1e-2, "certain": 7.103787,
                              InvestorType.EQUITY: 6.192703, InvestorType.RISK_FREE: 6.563893},
    DatasetVariant.PROJECTED: {"tol": 5e-2, "certain": 7.827697,
                               InvestorType.EQUITY: 6.762365, InvestorType.RISK_FREE: 7.168177},
}

EXPECTED_LABELS = {
    InvestorType.EQUITY: (AttitudeLabel.RISK_AVERSE, AllocationSign.NEGATIVE),
    InvestorType.RISK_FREE: (AttitudeLabel.NOT_ENOUGH_RISK_LOVING, AllocationSign.POSITIVE),
}


@pytest.fixture(scope="module")
def calibrations(variants):
    return {v: solve_system(0.99, compute_moments(d)) for v, d in variants.items()}


@pytest.mark.parametrize("variant", list(REFERENCE))
@pytest.mark.parametrize("investor", list(InvestorType))
def test_reference_classification(variants, calibrations, investor, variant):
    dataset, result = variants[variant], calibrations[variant]
    cmp, attitude = classify_pipeline(dataset, investor.eta_from(result), result.rho, 0.99)

    reference = REFERENCE[variant]
    label, sign = EXPECTED_LABELS[investor]
    assert attitude.label is label
    assert attitude.allocation_sign is sign
    assert cmp.certain == pytest.approx(reference["certain"], abs=reference["tol"])
    assert cmp.uncertain == pytest.approx(reference[investor], abs=reference["tol"])


@pytest.mark.parametrize("rho_from", list(DatasetVariant))
@pytest.mark.parametrize("data_variant", list(DatasetVariant))
@pytest.mark.parametrize("investor", list(InvestorType))
def test_certain_exceeds_uncertain_for_every_calibration(variants, calibrations, rho_from, data_variant, investor):
    result = calibrations[rho_from]
    cmp, attitude = classify_pipeline(variants[data_variant], investor.eta_from(result), result.rho, 0.99)
    assert cmp.certain > cmp.uncertain
    assert attitude.label is EXPECTED_LABELS[investor][0]


def test_group_one_agrees_on_reference(variants, calibrations):
    dataset = variants[DatasetVariant.REALIZED]
    result = calibrations[DatasetVariant.REALIZED]
    _, attitude = classify_pipeline(dataset, result.zeta, result.rho, 0.99, group=ONE)
    assert attitude.label is AttitudeLabel.RISK_AVERSE
    assert attitude.defining_equation == 1


def test_constant_consumption_pipeline(write_dataset):
    dataset = load_dataset(write_dataset([(2000 + i, 100, 1.05, 1.01) for i in range(4)]))
    cmp, attitude = classify_pipeline(dataset, eta=0.99, rho=2.0, beta=1.0)
    assert cmp.certain == pytest.approx(0.99)
    assert cmp.uncertain == pytest.approx(0.99 * 0.99)
    assert attitude.label is AttitudeLabel.RISK_AVERSE
