"""
dataset.py
年度市场数据集的读取、校验与版本构造

CSV 格式 (UTF-8, 必须有表头):
    year,consumption_per_capita,equity_gross_return,riskfree_gross_return

年份对齐约定：第 t 行的收益率是从 t 到 t+1 实现的毛收益率，
即 R_{e,t+1} = (p_{t+1} + y_{t+1}) / p_t 记在第 t 年，R_{f,t+1} = 1 / q_t 同理。
消费为人均实际消费 c_t。
"""

import io
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from .config import DataFiles
from .errors import MissingYear, NonPositiveValue, SchemaError, SeriesTooShort
from .resources import get_resource_path

DATASET_COLUMNS = ["year", "consumption_per_capita", "equity_gross_return", "riskfree_gross_return"]
PROJECTION_COLUMNS = ["nondurables_bn", "services_bn", "gnp_deflator", "population"]


class DatasetVariant(Enum):
    """最后一年消费使用实际值还是预测值"""

    REALIZED = "realized"
    PROJECTED = "projected"


@dataclass(frozen=True)
class AnnualSeries:
    """连续年份的年度序列，第 i 个值属于 start_year + i"""

    start_year: int
    values: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) < 2:
            raise SeriesTooShort(f"序列至少需要 2 个值, 实际 {len(self.values)}")

    @property
    def end_year(self) -> int:
        return self.start_year + len(self.values) - 1

    @property
    def years(self) -> Tuple[int, ...]:
        return tuple(range(self.start_year, self.end_year + 1))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class MarketDataset:
    """对齐的三条年度序列：人均实际消费、股票毛收益率、无风险毛收益率"""

    consumption: AnnualSeries
    equity_return: AnnualSeries
    riskfree_return: AnnualSeries

    def __post_init__(self):
        spans = {(s.start_year, len(s)) for s in (self.consumption, self.equity_return, self.riskfree_return)}
        if len(spans) != 1:
            raise SchemaError("三条序列的年份区间不一致")

        for name, series in (
            ("consumption_per_capita", self.consumption),
            ("equity_gross_return", self.equity_return),
            ("riskfree_gross_return", self.riskfree_return),
        ):
            bad = [y for y, v in zip(series.years, series.values) if not v > 0]
            if bad:
                raise NonPositiveValue(f"{name} 在 {bad[0]} 年不为正", column=name, year=bad[0])

    @property
    def start_year(self) -> int:
        return self.consumption.start_year

    @property
    def final_year(self) -> int:
        return self.consumption.end_year

    @property
    def years(self) -> Tuple[int, ...]:
        return self.consumption.years

    @property
    def span(self) -> int:
        """覆盖的年数"""
        return len(self.consumption)

    def consumption_at(self, year: int) -> float:
        """获取某一年的人均消费"""
        if not self.start_year <= year <= self.final_year:
            raise MissingYear(f"{year} 年不在数据区间 {self.start_year}–{self.final_year} 内")
        return self.consumption.values[year - self.start_year]


@dataclass(frozen=True)
class ProjectionInputs:
    """1978 年预测输入：名义非耐用品与服务消费 (十亿美元)、GNP平减指数 (1972=100)、年中人口"""

    nominal_nondurables: float
    nominal_services: float
    gnp_deflator: float
    population: float

    def __post_init__(self):
        for name in ("nominal_nondurables", "nominal_services", "gnp_deflator", "population"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise NonPositiveValue(f"预测输入 {name} 必须为正: {value}")

    @property
    def nominal_total(self) -> float:
        return self.nominal_nondurables + self.nominal_services


# ==================== 读取 ====================
def _read_frame(source, columns):
    """读取CSV并检查表头"""
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)

    try:
        frame = pd.read_csv(source, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise SchemaError(f"无法解析CSV: {e}") from e

    header = [str(c).strip() for c in frame.columns]
    if header != columns:
        raise SchemaError(f"表头应为 {','.join(columns)}, 实际为 {','.join(header)}")
    frame.columns = header

    blank = frame.apply(lambda col: col.str.strip() == "")
    if blank.to_numpy().any():
        row, col = np.argwhere(blank.to_numpy())[0]
        raise SchemaError(f"第 {row + 2} 行 {header[col]} 缺失数据")

    return frame


def _to_numbers(frame, column, integer=False):
    """把文本列转为数值，非法值报 SchemaError"""
    values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
    if values.isna().any():
        row = int(np.flatnonzero(values.isna().to_numpy())[0])
        raise SchemaError(f"第 {row + 2} 行 {column} 不是数值: {frame[column].iloc[row]!r}")

    if integer:
        if not (values == values.round()).all():
            raise SchemaError(f"{column} 必须是整数")
        return values.astype(int).to_numpy()
    # 逐个用 float() 解析，保证与写出的文本逐位一致
    return np.array([float(v) for v in frame[column].str.strip()], dtype=float)


def load_dataset(source) -> MarketDataset:
    """
    读取年度市场数据集

    Args:
        source: 文件路径、字节串或二进制流

    Returns:
        MarketDataset: 校验通过的数据集
    """
    frame = _read_frame(source, DATASET_COLUMNS)
    if len(frame) < 2:
        raise SeriesTooShort(f"数据集至少需要 2 行, 实际 {len(frame)}")

    years = _to_numbers(frame, "year", integer=True)
    steps = np.diff(years)
    if (steps <= 0).any():
        row = int(np.flatnonzero(steps <= 0)[0])
        raise SchemaError(f"年份必须严格递增: {years[row]} 之后是 {years[row + 1]}")
    if (steps > 1).any():
        row = int(np.flatnonzero(steps > 1)[0])
        missing = int(years[row]) + 1
        raise MissingYear(f"缺少 {missing} 年", year=missing)

    start = int(years[0])
    dataset = MarketDataset(
        consumption=AnnualSeries(start, _to_numbers(frame, "consumption_per_capita")),
        equity_return=AnnualSeries(start, _to_numbers(frame, "equity_gross_return")),
        riskfree_return=AnnualSeries(start, _to_numbers(frame, "riskfree_gross_return")),
    )

    logger.info(f"✓ 读取数据集: {dataset.span} 年, {dataset.start_year}–{dataset.final_year}")
    return dataset


def load_projection(source) -> ProjectionInputs:
    """读取单行的预测输入"""
    frame = _read_frame(source, PROJECTION_COLUMNS)
    if len(frame) != 1:
        raise SchemaError(f"预测文件必须恰好一行数据, 实际 {len(frame)} 行")

    values = [float(_to_numbers(frame, c)[0]) for c in PROJECTION_COLUMNS]
    return ProjectionInputs(*values)


def load_reference_dataset() -> MarketDataset:
    """读取内置的 1889–1978 参考数据集"""
    return load_dataset(get_resource_path(DataFiles.REFERENCE_DATASET))


def load_reference_projection() -> ProjectionInputs:
    """读取内置的 1978 年预测输入"""
    return load_projection(get_resource_path(DataFiles.REFERENCE_PROJECTION))


def dump_dataset(dataset: MarketDataset) -> str:
    """序列化为CSV文本（浮点数写 17 位有效数字，读回后逐位相同）"""
    frame = pd.DataFrame(
        {
            "year": list(dataset.years),
            "consumption_per_capita": list(dataset.consumption.values),
            "equity_gross_return": list(dataset.equity_return.values),
            "riskfree_gross_return": list(dataset.riskfree_return.values),
        }
    )
    return frame.to_csv(index=False, lineterminator="\n", float_format="%.17g")


# ==================== 计算 ====================
def projected_consumption(p: ProjectionInputs) -> float:
    """
    预测人均实际消费（非耐用品 + 服务）

    10⁹ · (非耐用品 + 服务) / (GNP平减指数 / 100) / 人口，不做四舍五入
    """
    real_total = 1e9 * p.nominal_total / (p.gnp_deflator / 100.0)
    return real_total / p.population


def with_final_consumption(dataset: MarketDataset, value: float) -> MarketDataset:
    """用给定值替换最后一年的消费，其他数据不变"""
    if not (math.isfinite(value) and value > 0):
        raise NonPositiveValue(f"最后一年消费必须为正: {value}")

    values = dataset.consumption.values[:-1] + (float(value),)
    return replace(dataset, consumption=AnnualSeries(dataset.start_year, values))


def build_variants(dataset: MarketDataset, projection=None) -> Dict[DatasetVariant, MarketDataset]:
    """
    构造实际值版本与预测值版本

    Args:
        dataset: 实际值数据集
        projection: ProjectionInputs 或直接给出的预测消费值，None 时只返回实际值版本
    """
    variants = {DatasetVariant.REALIZED: dataset}
    if projection is None:
        return variants

    if isinstance(projection, ProjectionInputs):
        value = projected_consumption(projection)
    else:
        value = float(projection)

    logger.debug(f"{dataset.final_year} 年预测消费: {value:.6f} (实际 {dataset.consumption.values[-1]:.2f})")
    variants[DatasetVariant.PROJECTED] = with_final_consumption(dataset, value)
    return variants
