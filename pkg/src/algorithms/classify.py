"""
classify.py
按十条定义（两组）对确定效用与不确定效用的比较结果分类

第一组：假设所有投资者的确定效用曲线都是凹的
    (1) 负分配, u > βηE[u]  → 风险厌恶
    (2) 正分配, u < βηE[u]  → 风险偏好
    (3) 正分配, u > βηE[u]  → 风险偏好不足
    (4) u = βηE[u]          → 风险中性
    (5) 负分配, u < βηE[u], 曲线递增且凸 → 风险厌恶不足
第二组：曲线形状因投资者而异
    (6) 凹, 负分配, u > βηE[u]  → 风险厌恶
    (7) 凹, 正分配, u > βηE[u]  → 风险偏好不足
    (8) 凸, 正分配, u < βηE[u]  → 风险偏好
    (9) 递增凸, 负分配, u < βηE[u] → 风险厌恶不足
    (10) u = βηE[u]             → 风险中性
确定效用曲线水平时规则相同，但"风险厌恶不足"不成立。
零效用分配不属于任何定义。

注意：(5) 与 (9) 条件相同；第一组的前提是曲线为凹，(5) 只在曲线递增且凸时成立。
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple

from loguru import logger

from src.core.config import Defaults
from src.core.dataset import MarketDataset
from src.core.errors import InvalidCombination, InvalidParameter, Unclassifiable

from .moments import SampleMoments, compute_moments
from .utility import UtilityComparison, UtilitySpec, check_sufficiency, compare_utilities, expected_utility_unconditional


class Curvature(Enum):
    STRICTLY_CONCAVE = "strictly_concave"
    STRICTLY_CONVEX_INCREASING = "strictly_convex_increasing"
    LINEAR = "linear"
    HORIZONTAL = "horizontal"


class DefinitionGroup(Enum):
    ONE = "one"
    TWO = "two"


class AllocationSign(Enum):
    NEGATIVE = "negative"
    POSITIVE = "positive"
    ZERO = "zero"


class AttitudeLabel(Enum):
    RISK_AVERSE = "Risk-averse"
    RISK_LOVING = "Risk-loving"
    NOT_ENOUGH_RISK_LOVING = "Not enough risk-loving"
    NOT_ENOUGH_RISK_AVERSE = "Not enough risk-averse"
    RISK_NEUTRAL = "Risk-neutral"


class InvestorType(Enum):
    """股票投资者使用 ζ，无风险资产投资者使用 ξ"""

    EQUITY = "equity"
    RISK_FREE = "riskfree"

    @property
    def noun(self) -> str:
        return "Equity investors" if self is InvestorType.EQUITY else "Risk-free asset investors"

    def allocation_text(self, sign: AllocationSign) -> str:
        if sign is AllocationSign.ZERO:
            return f"{self.noun} allocate zero extra utility"
        return f"{self.noun} allocate extra {sign.value} utility"

    def eta_from(self, result) -> float:
        """从校准结果中取对应的充分性因子"""
        return result.zeta if self is InvestorType.EQUITY else result.xi


# 定义编号 → 标签
EQUATION_LABELS = {
    1: AttitudeLabel.RISK_AVERSE,
    2: AttitudeLabel.RISK_LOVING,
    3: AttitudeLabel.NOT_ENOUGH_RISK_LOVING,
    4: AttitudeLabel.RISK_NEUTRAL,
    5: AttitudeLabel.NOT_ENOUGH_RISK_AVERSE,
    6: AttitudeLabel.RISK_AVERSE,
    7: AttitudeLabel.NOT_ENOUGH_RISK_LOVING,
    8: AttitudeLabel.RISK_LOVING,
    9: AttitudeLabel.NOT_ENOUGH_RISK_AVERSE,
    10: AttitudeLabel.RISK_NEUTRAL,
}


@dataclass(frozen=True)
class RiskAttitude:
    """分类结果及其来源"""

    label: AttitudeLabel
    group: DefinitionGroup
    defining_equation: int
    allocation_sign: AllocationSign

    def __post_init__(self):
        if EQUATION_LABELS.get(self.defining_equation) is not self.label:
            raise InvalidParameter(f"定义 ({self.defining_equation}) 与标签 {self.label.value} 不一致")
        first_group = self.defining_equation <= 5
        if first_group != (self.group is DefinitionGroup.ONE):
            raise InvalidParameter(f"定义 ({self.defining_equation}) 不属于 {self.group.value} 组")

    def describe(self) -> str:
        return self.label.value


def allocation_sign(eta: float, rho: float) -> AllocationSign:
    """
    额外效用分配的符号

    ρ ≥ 0 时，η < 1 为负分配，η > 1 为正分配，η = 1 为零分配
    """
    if not rho >= 0:
        raise InvalidParameter(f"ρ 必须 ≥ 0: {rho}")
    return _sign_of(eta)


def _sign_of(eta: float) -> AllocationSign:
    check_sufficiency(eta)
    if eta < 1:
        return AllocationSign.NEGATIVE
    if eta > 1:
        return AllocationSign.POSITIVE
    return AllocationSign.ZERO


def curvature_for(rho: float) -> Curvature:
    """CRRA 曲线形状：ρ > 0 严格凹，ρ = 0 线性"""
    if rho < 0:
        raise InvalidParameter(f"ρ 必须 ≥ 0: {rho}")
    return Curvature.STRICTLY_CONCAVE if rho > 0 else Curvature.LINEAR


def _group_one(sign, above, curvature):
    if sign is AllocationSign.NEGATIVE and above:
        return 1
    if sign is AllocationSign.POSITIVE and not above:
        return 2
    if sign is AllocationSign.POSITIVE and above:
        return 3
    # 负分配且确定效用低于不确定效用
    if curvature is Curvature.HORIZONTAL:
        raise InvalidCombination("确定效用曲线水平时，\"not enough risk-averse\" 不成立")
    if curvature is Curvature.STRICTLY_CONVEX_INCREASING:
        return 5
    return None


def _group_two(sign, above, curvature):
    horizontal = curvature is Curvature.HORIZONTAL
    concave = curvature is Curvature.STRICTLY_CONCAVE or horizontal
    convex = curvature is Curvature.STRICTLY_CONVEX_INCREASING or horizontal

    if concave and above and sign is AllocationSign.NEGATIVE:
        return 6
    if concave and above and sign is AllocationSign.POSITIVE:
        return 7
    if convex and not above and sign is AllocationSign.POSITIVE:
        return 8
    if not above and sign is AllocationSign.NEGATIVE:
        if horizontal:
            raise InvalidCombination("确定效用曲线水平时，\"not enough risk-averse\" 不成立")
        if convex:
            return 9
    return None


def classify(cmp: UtilityComparison, curvature: Curvature, group: DefinitionGroup,
             tol: float = Defaults.TOLERANCE, rho: Optional[float] = None) -> RiskAttitude:
    """
    按定义分类

    Args:
        cmp: 效用比较
        curvature: 确定效用曲线形状
        group: 使用哪一组定义
        tol: |Δ| ≤ tol 视为相等（风险中性）
        rho: 确定效用曲线的 ρ；给出时按 allocation_sign 校验 ρ ≥ 0，
             只给曲线形状（凸分支等）时为 None

    Returns:
        RiskAttitude
    """
    if not tol >= 0:
        raise InvalidParameter(f"容差不能为负: {tol}")

    sign = _sign_of(cmp.eta) if rho is None else allocation_sign(cmp.eta, rho)
    if sign is AllocationSign.ZERO:
        raise Unclassifiable("零效用分配 (η = 1) 不属于任何定义", difference=cmp.difference)

    delta = cmp.difference
    if abs(delta) <= tol:
        equation = 4 if group is DefinitionGroup.ONE else 10
    else:
        above = delta > 0
        rules = _group_one if group is DefinitionGroup.ONE else _group_two
        equation = rules(sign, above, curvature)
        if equation is None:
            relation = ">" if above else "<"
            raise Unclassifiable(
                f"{sign.value} 分配, u {relation} βηE[u], 曲线 {curvature.value}: 不满足 {group.value} 组的任何定义"
            )

    return RiskAttitude(label=EQUATION_LABELS[equation], group=group,
                        defining_equation=equation, allocation_sign=sign)


def classify_pipeline(dataset: MarketDataset, eta: float, rho: float, beta: float,
                      group: DefinitionGroup = DefinitionGroup.TWO, tol: float = Defaults.TOLERANCE,
                      expected_utility: Callable[[SampleMoments, UtilitySpec], float] = expected_utility_unconditional,
                      moments: Optional[SampleMoments] = None) -> Tuple[UtilityComparison, RiskAttitude]:
    """
    数据集 → 统计量 → 效用比较 → 分类

    确定效用取决策年（最后一年的前一年）的消费；不确定效用为 β·η·E[u]，
    E[u] 按数据集统计量计算。曲线形状由 ρ 推出。
    """
    m = moments if moments is not None else compute_moments(dataset)
    spec = UtilitySpec(rho=rho)
    decision_year = dataset.final_year - 1
    cmp = compare_utilities(dataset.consumption_at(decision_year), m, spec, beta, eta, expected_utility)
    attitude = classify(cmp, curvature_for(rho), group, tol, rho=rho)

    logger.debug(
        f"{decision_year}: u = {cmp.certain:.6f}, βηE[u] = {cmp.uncertain:.6f} (η = {eta:.6f}) "
        f"→ {attitude.describe()} ({attitude.defining_equation})"
    )
    return cmp, attitude
