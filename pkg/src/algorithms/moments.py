"""
moments.py
样本统计量与对数正态矩公式

    E(z^a) = E[exp(a ln z)] = exp(a μ_z + ½ a² σ_z²)
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from loguru import logger

from src.core.config import Defaults
from src.core.dataset import MarketDataset
from src.core.errors import NegativeVariance, NonPositiveValue, SeriesTooShort


class LevelWindow(Enum):
    """μ_z, σ_z² 的估计窗口"""

    # 全样本，包括当前版本的最后一年（实际值或预测值）
    FULL = "full"
    # 只到决策年（去掉最后一年）
    THROUGH_DECISION_YEAR = "through_decision_year"


@dataclass(frozen=True)
class SampleMoments:
    """
    校准与效用计算使用的样本统计量

    mu_x, sigma2_x: 一步对数增长 ln(c_{t+1}/c_t) 的均值与方差
    mean_x, std_x:  毛增长率 x_{t+1} = c_{t+1}/c_t 的算术均值与标准差
    mean_re, mean_rf: 股票与无风险资产毛收益率的算术均值
    mu_z, sigma2_z: 对数消费水平 ln c_t 的均值与方差
    sigma_xe: 对数增长与同期对数股票收益的协方差，缺省时等于 sigma2_x（股票是消费流的索取权）
    """

    mu_x: float
    sigma2_x: float
    mean_x: float
    mean_re: float
    mean_rf: float
    mu_z: float
    sigma2_z: float
    sigma_xe: Optional[float] = None
    std_x: Optional[float] = None
    n_growth: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.sigma2_x < 0:
            raise NegativeVariance(f"sigma2_x < 0: {self.sigma2_x}")
        if self.sigma2_z < 0:
            raise NegativeVariance(f"sigma2_z < 0: {self.sigma2_z}")
        for name in ("mean_x", "mean_re", "mean_rf"):
            if not getattr(self, name) > 0:
                raise NonPositiveValue(f"{name} 必须为正: {getattr(self, name)}")

        if self.sigma_xe is None:
            object.__setattr__(self, "sigma_xe", self.sigma2_x)
        if self.std_x is None:
            # 对数正态下毛增长率的标准差
            object.__setattr__(self, "std_x", self.mean_x * math.sqrt(math.expm1(self.sigma2_x)))

    @classmethod
    def from_values(cls, mu_x=0.0, sigma2_x=0.0, mean_x=None, mean_re=1.0, mean_rf=1.0,
                    mu_z=0.0, sigma2_z=0.0, sigma_xe=None):
        """
        构造合成统计量

        mean_x 缺省时取 exp(mu_x + ½ sigma2_x)，即一致性缺口为 0
        """
        if mean_x is None:
            mean_x = math.exp(mu_x + 0.5 * sigma2_x)
        return cls(mu_x=mu_x, sigma2_x=sigma2_x, mean_x=mean_x, mean_re=mean_re, mean_rf=mean_rf,
                   mu_z=mu_z, sigma2_z=sigma2_z, sigma_xe=sigma_xe)


def compute_moments(dataset: MarketDataset, ddof: int = Defaults.DDOF,
                    level_window: LevelWindow = LevelWindow.FULL) -> SampleMoments:
    """
    计算样本统计量

    Args:
        dataset: 数据集（实际值或预测值版本）
        ddof: 方差除数修正，0 为总体方差 (n)，1 为样本方差 (n-1)
        level_window: μ_z, σ_z² 的估计窗口

    Returns:
        SampleMoments
    """
    consumption = dataset.consumption.as_array()
    if len(consumption) < 2:
        raise SeriesTooShort("至少需要 2 个消费值")

    growth = consumption[1:] / consumption[:-1]
    log_growth = np.log(growth)
    n_growth = len(log_growth)
    if n_growth <= ddof:
        raise SeriesTooShort(f"{n_growth} 个增长观测不足以在 ddof={ddof} 下估计方差")

    levels = np.log(consumption)
    if level_window is LevelWindow.THROUGH_DECISION_YEAR:
        levels = levels[:-1]
    if len(levels) <= ddof:
        raise SeriesTooShort(f"{len(levels)} 个水平观测不足以在 ddof={ddof} 下估计方差")

    # 第 t 行的股票收益与 t → t+1 的增长配对
    log_equity = np.log(dataset.equity_return.as_array()[:-1])
    sigma_xe = float(np.cov(log_growth, log_equity, ddof=ddof)[0, 1]) if n_growth > 1 else 0.0

    moments = SampleMoments(
        mu_x=float(log_growth.mean()),
        sigma2_x=float(log_growth.var(ddof=ddof)),
        mean_x=float(growth.mean()),
        mean_re=float(dataset.equity_return.as_array().mean()),
        mean_rf=float(dataset.riskfree_return.as_array().mean()),
        mu_z=float(levels.mean()),
        sigma2_z=float(levels.var(ddof=ddof)),
        sigma_xe=sigma_xe,
        std_x=float(growth.std(ddof=ddof)),
        n_growth=n_growth,
    )

    logger.debug(
        f"统计量: μ_x={moments.mu_x:.6f} σ_x²={moments.sigma2_x:.8f} E(x)={moments.mean_x:.6f} "
        f"μ_z={moments.mu_z:.6f} σ_z²={moments.sigma2_z:.6f} 缺口={consistency_gap(moments):.3e}"
    )
    return moments


def lognormal_moment(a: float, mu: float, sigma2: float) -> float:
    """对数正态变量的 a 阶矩 E(z^a) = exp(a·mu + ½·a²·sigma2)"""
    if sigma2 < 0:
        raise NegativeVariance(f"对数方差不能为负: {sigma2}")
    return math.exp(a * mu + 0.5 * a * a * sigma2)


def consistency_gap(m: SampleMoments) -> float:
    """
    ln E(x) − (μ_x + ½σ_x²)

    样本严格满足对数正态均值恒等式时为 0
    """
    return math.log(m.mean_x) - (m.mu_x + 0.5 * m.sigma2_x)
