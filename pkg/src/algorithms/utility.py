"""
utility.py
CRRA效用、确定效用与不确定效用 βηE[u]

平移形式   u(c) = (c^{1-ρ} - 1) / (1 - ρ)，ρ = 1 时取极限 ln c（实证部分使用）
未平移形式 u(c) = c^{1-ρ} / (1 - ρ)，ρ = 1 时无定义（校准推导中使用）

定义中的财富 w_t 在实证部分被人均消费 c_t 代替，这里沿用消费。
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from src.core.config import Defaults
from src.core.errors import InvalidParameter, NonPositiveConsumption, UndefinedAtLogLimit

from .moments import SampleMoments, lognormal_moment


@dataclass(frozen=True)
class UtilitySpec:
    """效用函数设定：相对风险厌恶系数 ρ 与是否平移"""

    rho: float
    shifted: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho >= 0):
            raise InvalidParameter(f"ρ 必须 ≥ 0: {self.rho}")

    @property
    def exponent(self) -> float:
        """1 - ρ"""
        return 1.0 - self.rho


class BudgetConstraint(Enum):
    """消费恒等式中到期债券的计价方式"""

    # 到期前可能与央行在公开市场交易，按 q_t 计价
    OPEN_MARKET = "open_market"
    # 持有到期，按面值兑付
    AT_MATURITY = "at_maturity"


@dataclass(frozen=True)
class UtilityComparison:
    """确定效用 u(c_t) 与不确定效用 β·η·E[u(c_{t+1})] 的比较"""

    certain: float
    uncertain: float
    eta: float
    beta: float
    expected_u: float

    def __post_init__(self):
        check_discount(self.beta)
        check_sufficiency(self.eta)

    @classmethod
    def build(cls, certain: float, expected_u: float, beta: float, eta: float) -> "UtilityComparison":
        return cls(certain=certain, uncertain=uncertain_utility(expected_u, beta, eta),
                   eta=eta, beta=beta, expected_u=expected_u)

    @property
    def difference(self) -> float:
        """Δ = 确定效用 - 不确定效用"""
        return self.certain - self.uncertain


def check_discount(beta: float) -> None:
    if not (math.isfinite(beta) and 0 < beta <= 1):
        raise InvalidParameter(f"β 必须在 (0, 1] 内: {beta}")


def check_sufficiency(eta: float) -> None:
    if not (math.isfinite(eta) and eta > 0):
        raise InvalidParameter(f"充分性因子必须为正: {eta}")


def _shifted_power(log_value: float, a: float) -> float:
    """(exp(a·L) - 1) / a，a → 0 时趋于 L"""
    if a == 0.0:
        return log_value
    if abs(a) < Defaults.LOG_LIMIT_SWITCH:
        # 级数展开 L + aL²/2 + a²L³/6
        return log_value * (1.0 + a * log_value / 2.0 + (a * log_value) ** 2 / 6.0)
    return math.expm1(a * log_value) / a


def crra_utility(c: float, spec: UtilitySpec) -> float:
    """
    CRRA效用

    Args:
        c: 消费（美元），必须为正
        spec: 效用设定

    Returns:
        float: 效用值
    """
    if not (math.isfinite(c) and c > 0):
        raise NonPositiveConsumption(f"消费必须为正: {c}")

    a = spec.exponent
    if spec.shifted:
        return _shifted_power(math.log(c), a)

    if spec.rho == 1.0:
        raise UndefinedAtLogLimit("未平移形式在 ρ = 1 处无定义，请使用平移形式")
    return c ** a / a


def crra_marginal_utility(c: float, rho: float) -> float:
    """u'(c) = c^{-ρ}（两种形式相同）"""
    if not c > 0:
        raise NonPositiveConsumption(f"消费必须为正: {c}")
    return c ** (-rho)


def relative_risk_aversion(c: float, spec: UtilitySpec, rel_step: float = 1e-4) -> float:
    """数值计算 -c·u''(c)/u'(c)，CRRA 下应等于 ρ"""
    h = c * rel_step
    u_minus = crra_utility(c - h, spec)
    u_mid = crra_utility(c, spec)
    u_plus = crra_utility(c + h, spec)
    first = (u_plus - u_minus) / (2 * h)
    second = (u_plus - 2 * u_mid + u_minus) / (h * h)
    return -c * second / first


def expected_utility_unconditional(m: SampleMoments, spec: UtilitySpec) -> float:
    """
    E[u(c)]，消费水平取对数正态分布，使用全样本（无条件）的 μ_z, σ_z²

    平移形式: (exp((1-ρ)μ_z + ½(1-ρ)²σ_z²) - 1) / (1-ρ)，ρ = 1 时为 μ_z
    条件期望与无条件期望视为相同。
    """
    a = spec.exponent
    if not spec.shifted:
        if spec.rho == 1.0:
            raise UndefinedAtLogLimit("未平移形式在 ρ = 1 处无定义")
        return lognormal_moment(a, m.mu_z, m.sigma2_z) / a

    if a == 0.0:
        return m.mu_z

    log_moment = a * m.mu_z + 0.5 * a * a * m.sigma2_z
    if abs(a) < Defaults.LOG_LIMIT_SWITCH:
        # expm1(y)/a，y/a = μ_z + ½aσ_z²
        return (m.mu_z + 0.5 * a * m.sigma2_z) * (1.0 + log_moment / 2.0 + log_moment ** 2 / 6.0)
    return math.expm1(log_moment) / a


def uncertain_utility(expected_u: float, beta: float, eta: float) -> float:
    """不确定效用 β·η·E[u]"""
    check_discount(beta)
    check_sufficiency(eta)
    return beta * eta * expected_u


def compare_utilities(certain_c: float, m: SampleMoments, spec: UtilitySpec, beta: float, eta: float,
                      expected_utility: Callable[[SampleMoments, UtilitySpec], float] = expected_utility_unconditional
                      ) -> UtilityComparison:
    """构造某一年的确定/不确定效用比较"""
    certain = crra_utility(certain_c, spec)
    expected_u = expected_utility(m, spec)
    return UtilityComparison.build(certain, expected_u, beta, eta)


def check_holdings(theta: float, z: float) -> None:
    """0 ≤ θ ≤ 1, 0 ≤ z ≤ 1"""
    for name, value in (("θ", theta), ("z", z)):
        if not 0 <= value <= 1:
            raise InvalidParameter(f"持仓 {name} 必须在 [0, 1] 内: {value}")


def implied_consumption(theta_t: float, theta_next: float, z_t: float, z_next: float,
                        p_t: float, q_t: float, y_t: float,
                        constraint: BudgetConstraint = BudgetConstraint.OPEN_MARKET) -> float:
    """
    预算约束取等号时的消费

    OPEN_MARKET: c_t = θ_t y_t + θ_t p_t + z_t q_t - z_{t+1} q_t - θ_{t+1} p_t
    AT_MATURITY: c_t = θ_t y_t + θ_t p_t + z_t     - z_{t+1} q_t - θ_{t+1} p_t
    """
    check_holdings(theta_t, z_t)
    check_holdings(theta_next, z_next)
    for name, value in (("p_t", p_t), ("q_t", q_t), ("y_t", y_t)):
        if not value >= 0:
            raise InvalidParameter(f"{name} 不能为负: {value}")

    bond_value = z_t * q_t if constraint is BudgetConstraint.OPEN_MARKET else z_t
    c = theta_t * y_t + theta_t * p_t + bond_value - z_next * q_t - theta_next * p_t
    if not c > 0:
        raise NonPositiveConsumption(f"预算约束给出的消费不为正: {c}")
    return c
