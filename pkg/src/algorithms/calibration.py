"""
calibration.py
三方程组求解 (ζ, ξ, ρ)

    [无风险] ln R_f              = -ln β - ln ξ + ρμ_x - ½ρ²σ_x²
    [股票]   ln E(R_e)           = ln E(x) - ln β - ln ζ - (1-ρ)μ_x - ½(1-ρ)²σ_x²
    [超额]   ln E(R_e) - ln R_f  = ln ξ - ln ζ + ρσ_xe

σ_xe 是对数消费增长与对数股票收益的协方差。股票是消费流的索取权时 σ_xe = σ_x²，
此时 [超额] = [股票] - [无风险] + 一致性缺口，雅可比矩阵处处秩为 2，ρ 无法识别。
用前两个方程消去 ζ, ξ 后，[超额] 的残差只剩

    h(ρ) = gap - ρ·(σ_xe - σ_x²)

ρ 由样本偏离对数正态均值恒等式的程度决定。
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.optimize import brentq

from src.core.config import Defaults
from src.core.errors import DegenerateSystem, InvalidParameter, NoConvergence

from .moments import SampleMoments, consistency_gap
from .utility import check_discount


@dataclass(frozen=True)
class SufficiencyFactors:
    """模型充分性因子：ζ (股票投资者), ξ (无风险资产投资者)"""

    zeta: float
    xi: float

    def __post_init__(self):
        for name in ("zeta", "xi"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameter(f"充分性因子 {name} 必须为正: {value}")


@dataclass(frozen=True)
class CalibrationResult:
    """求解结果与诊断量"""

    factors: SufficiencyFactors
    rho: float
    residuals: Tuple[float, float, float]
    condition_diagnostic: float
    consistency_gap: float
    beta: float = Defaults.BETA
    # 超额方程取 ρσ_x²（不用协方差）时的残差，供核对
    variance_form_residuals: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    # dρ/dσ_xe = -ρ / (σ_xe - σ_x²)
    rho_sensitivity: float = 0.0
    iterations: int = 0
    method: str = "newton"
    warnings: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not all(math.isfinite(r) for r in self.residuals):
            raise NoConvergence(f"残差不是有限值: {self.residuals}")
        if not self.condition_diagnostic >= 1:
            raise NoConvergence(f"条件数诊断量必须 ≥ 1: {self.condition_diagnostic}")

    @property
    def zeta(self) -> float:
        return self.factors.zeta

    @property
    def xi(self) -> float:
        return self.factors.xi

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals)


def _logs(m: SampleMoments):
    return math.log(m.mean_rf), math.log(m.mean_re), math.log(m.mean_x)


def _residuals(f: SufficiencyFactors, rho: float, beta: float, m: SampleMoments, excess_slope: float) -> np.ndarray:
    ln_rf, ln_re, ln_x = _logs(m)
    ln_beta = math.log(beta)
    ln_zeta, ln_xi = math.log(f.zeta), math.log(f.xi)
    mu, s2 = m.mu_x, m.sigma2_x

    r_rf = ln_rf - (-ln_beta - ln_xi + rho * mu - 0.5 * rho ** 2 * s2)
    r_eq = ln_re - (ln_x - ln_beta - ln_zeta - (1 - rho) * mu - 0.5 * (1 - rho) ** 2 * s2)
    r_ex = (ln_re - ln_rf) - (ln_xi - ln_zeta + rho * excess_slope)
    return np.array([r_rf, r_eq, r_ex])


def system_residuals(f: SufficiencyFactors, rho: float, beta: float, m: SampleMoments) -> np.ndarray:
    """
    三个方程的残差 (左边 - 右边)，顺序为 [无风险], [股票], [超额]

    [超额] 使用协方差 σ_xe；合成统计量缺省 σ_xe = σ_x²，此时与 ρσ_x² 形式相同
    """
    check_discount(beta)
    return _residuals(f, rho, beta, m, m.sigma_xe)


def variance_form_residuals(f: SufficiencyFactors, rho: float, beta: float, m: SampleMoments) -> np.ndarray:
    """[超额] 方程取 ρσ_x² 形式时的残差"""
    check_discount(beta)
    return _residuals(f, rho, beta, m, m.sigma2_x)


def solve_closed_form_given_rho(rho: float, beta: float, m: SampleMoments) -> SufficiencyFactors:
    """
    给定 ρ，由 [无风险] [股票] 两式直接解出 ξ, ζ

        ξ = exp(-ln R_f - ln β + ρμ_x - ½ρ²σ_x²)
        ζ = exp(ln E(x) - ln β - (1-ρ)μ_x - ½(1-ρ)²σ_x² - ln E(R_e))
    """
    check_discount(beta)
    ln_rf, ln_re, ln_x = _logs(m)
    ln_beta = math.log(beta)
    mu, s2 = m.mu_x, m.sigma2_x

    xi = math.exp(-ln_rf - ln_beta + rho * mu - 0.5 * rho ** 2 * s2)
    zeta = math.exp(ln_x - ln_beta - (1 - rho) * mu - 0.5 * (1 - rho) ** 2 * s2 - ln_re)
    return SufficiencyFactors(zeta=zeta, xi=xi)


def reduced_residual(rho: float, beta: float, m: SampleMoments) -> float:
    """消去 ζ, ξ 后 [超额] 方程的残差 h(ρ)"""
    factors = solve_closed_form_given_rho(rho, beta, m)
    return float(system_residuals(factors, rho, beta, m)[2])


def jacobian(f: SufficiencyFactors, rho: float, m: SampleMoments) -> np.ndarray:
    """残差对 (ln ζ, ln ξ, ρ) 的雅可比矩阵"""
    mu, s2 = m.mu_x, m.sigma2_x
    return np.array([
        [0.0, 1.0, -mu + rho * s2],
        [1.0, 0.0, -mu - (1 - rho) * s2],
        [1.0, -1.0, -m.sigma_xe],
    ])


def _reduced_slope(rho: float, beta: float, m: SampleMoments) -> float:
    """dh/dρ：沿闭式解方向对 [超额] 行求全导数"""
    factors = solve_closed_form_given_rho(rho, beta, m)
    # 闭式解中 d ln ζ/dρ 与 d ln ξ/dρ
    tangent = np.array([m.mu_x + (1 - rho) * m.sigma2_x, m.mu_x - rho * m.sigma2_x, 1.0])
    return float(jacobian(factors, rho, m)[2] @ tangent)


def condition_number(f: SufficiencyFactors, rho: float, m: SampleMoments) -> float:
    """雅可比矩阵的2-范数条件数，奇异时为 inf"""
    cond = float(np.linalg.cond(jacobian(f, rho, m)))
    return cond if math.isfinite(cond) else math.inf


def rho_sensitivity(rho: float, m: SampleMoments) -> float:
    """
    根 ρ* = gap / (σ_xe - σ_x²) 对协方差 σ_xe 的导数

    分母很小时 ρ 由两个同量级的小数之比决定，σ_xe 的微小变化就会明显移动 ρ。
    """
    slope = m.sigma_xe - m.sigma2_x
    if slope == 0.0:
        return math.inf
    return -rho / slope


def _check_identified(m: SampleMoments) -> float:
    gap = consistency_gap(m)
    if abs(gap) < Defaults.DEGENERACY_THRESHOLD:
        raise DegenerateSystem(
            f"一致性缺口 |{gap:.3e}| < {Defaults.DEGENERACY_THRESHOLD:g}：超额方程是前两式之差，存在单参数解族",
            gap=gap,
        )
    slope = m.sigma_xe - m.sigma2_x
    if abs(slope) < Defaults.DEGENERACY_THRESHOLD:
        raise DegenerateSystem(
            f"σ_xe - σ_x² = {slope:.3e}：雅可比矩阵秩小于 3，ρ 无法识别",
            gap=gap,
        )
    return gap


def _damped_newton(beta: float, m: SampleMoments, rho0: float, max_iter: int):
    """带回溯阻尼的牛顿迭代，返回 (ρ, 迭代次数)，失败返回 (None, 迭代次数)"""
    lo, hi = Defaults.RHO_MIN, Defaults.RHO_MAX
    rho = min(max(rho0, lo), hi)
    h = reduced_residual(rho, beta, m)

    for iteration in range(1, max_iter + 1):
        slope = _reduced_slope(rho, beta, m)
        if slope == 0.0 or not math.isfinite(slope):
            return None, iteration

        step = -h / slope
        damping = 1.0
        while True:
            candidate = min(max(rho + damping * step, lo), hi)
            h_new = reduced_residual(candidate, beta, m)
            if abs(h_new) < abs(h) or damping < 1.0 / 64:
                break
            damping /= 2

        logger.debug(f"  牛顿第 {iteration} 步: ρ = {candidate:.10f}, h = {h_new:.3e}, 阻尼 = {damping:g}")

        converged = abs(h_new) < Defaults.RESIDUAL_TOL * 1e-4 or abs(candidate - rho) < Defaults.NEWTON_TOL * max(1.0, abs(rho))
        if converged and abs(h_new) < Defaults.RESIDUAL_TOL:
            return candidate, iteration
        if candidate == rho:
            # 卡在搜索区间边界上
            return None, iteration
        rho, h = candidate, h_new

    return None, max_iter


def _bracket_root(beta: float, m: SampleMoments, rho0: float):
    """从初值向两侧几何扩张区间直到 h 变号，然后用 brentq 求根"""
    lo_bound, hi_bound = Defaults.RHO_MIN, Defaults.RHO_MAX
    center = min(max(rho0, lo_bound), hi_bound)
    width = max(0.5, 0.1 * center)

    a, b = max(center - width, lo_bound), min(center + width, hi_bound)
    fa, fb = reduced_residual(a, beta, m), reduced_residual(b, beta, m)
    while fa * fb > 0:
        if a == lo_bound and b == hi_bound:
            raise NoConvergence(f"ρ ∈ [{lo_bound:g}, {hi_bound:g}] 内没有根")
        width *= Defaults.BRACKET_GROWTH
        a, b = max(center - width, lo_bound), min(center + width, hi_bound)
        fa, fb = reduced_residual(a, beta, m), reduced_residual(b, beta, m)

    return brentq(lambda r: reduced_residual(r, beta, m), a, b, xtol=Defaults.NEWTON_TOL, maxiter=200)


def solve_system(beta: float, m: SampleMoments, init: Optional[Sequence[float]] = None,
                 max_iter: int = Defaults.NEWTON_MAX_ITER) -> CalibrationResult:
    """
    求解 (ζ, ξ, ρ)

    Args:
        beta: 主观时间折现因子
        m: 样本统计量
        init: 可选初值 (ζ, ξ, ρ)；ζ, ξ 被闭式消去，只使用 ρ
        max_iter: 牛顿迭代次数上限

    Returns:
        CalibrationResult
    """
    check_discount(beta)
    gap = _check_identified(m)
    rho0 = float(init[2]) if init is not None else Defaults.RHO_GUESS

    rho, iterations = _damped_newton(beta, m, rho0, max_iter)
    method = "newton"
    if rho is None:
        logger.warning(f"⚠ 牛顿迭代未收敛 ({iterations} 步)，改用区间法")
        rho = _bracket_root(beta, m, rho0)
        method = "brentq"

    factors = solve_closed_form_given_rho(rho, beta, m)
    if not (factors.zeta <= Defaults.FACTOR_MAX and factors.xi <= Defaults.FACTOR_MAX):
        raise NoConvergence(f"解超出搜索区域: ζ = {factors.zeta:.6g}, ξ = {factors.xi:.6g}")

    residuals = system_residuals(factors, rho, beta, m)
    if not np.all(np.abs(residuals) < Defaults.RESIDUAL_TOL):
        raise NoConvergence(f"残差未达到容差: {residuals}")

    warnings = []
    cond = condition_number(factors, rho, m)
    if cond > Defaults.CONDITION_WARN:
        warnings.append(f"雅可比条件数 {cond:.3e}：方程组接近退化")
    sensitivity = rho_sensitivity(rho, m)
    if abs(sensitivity) > Defaults.SENSITIVITY_WARN:
        warnings.append(f"dρ/dσ_xe = {sensitivity:.3e}：ρ 只由 σ_xe - σ_x² = {m.sigma_xe - m.sigma2_x:.3e} 识别，对数据扰动敏感")
    for text in warnings:
        logger.warning(f"⚠ {text}")

    result = CalibrationResult(
        factors=factors,
        rho=rho,
        residuals=tuple(float(r) for r in residuals),
        condition_diagnostic=cond,
        consistency_gap=gap,
        beta=beta,
        variance_form_residuals=tuple(float(r) for r in variance_form_residuals(factors, rho, beta, m)),
        rho_sensitivity=sensitivity,
        iterations=iterations,
        method=method,
        warnings=tuple(warnings),
    )
    logger.info(f"✓ 求解完成 ({method}): ζ = {result.zeta:.6f}, ξ = {result.xi:.6f}, ρ = {rho:.6f}")
    return result


def recalibrate_after_trade(beta_new: float, m: SampleMoments, previous: CalibrationResult) -> CalibrationResult:
    """
    与央行在公开市场交易后，按重新确定的 β 重新计算充分性因子

    交易日期到 β 的映射不在这里建模，调用方传入新的 β。
    """
    logger.info(f"按 β = {beta_new} 重新校准 (原 β = {previous.beta})")
    return solve_system(beta_new, m, init=(previous.zeta, previous.xi, previous.rho))
