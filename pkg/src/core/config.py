# config.py - 存储所有默认参数、数据文件路径和界面文本
import json
import os

from loguru import logger

from .errors import InputError


class Defaults:
    """数值默认值"""

    # 主观时间折现因子（结果部分统一使用 β = 0.99）
    BETA = 0.99

    # 效用相等的判定容差（效用单位）
    TOLERANCE = 1e-9

    # ρ 的搜索区间与充分性因子的上界
    RHO_MIN = 0.0
    RHO_MAX = 60.0
    FACTOR_MAX = 10.0

    # 求解器
    RHO_GUESS = 1.0
    NEWTON_MAX_ITER = 50
    NEWTON_TOL = 1e-12
    RESIDUAL_TOL = 1e-9
    BRACKET_GROWTH = 2.0
    DEGENERACY_THRESHOLD = 1e-12
    CONDITION_WARN = 1e8
    # |dρ/dσ_xe| 超过此值时告警：σ_xe 变动 1e-5 即让 ρ 移动 1e-2 以上
    SENSITIVITY_WARN = 1e3

    # |1 - ρ| 小于该值时使用级数展开
    LOG_LIMIT_SWITCH = 1e-8

    # 方差除数：0 为总体方差 (n)，1 为样本方差 (n-1)
    DDOF = 0

    # 报表小数位数
    DECIMALS = 6


class DataFiles:
    """随仓库附带的数据文件（相对于项目根目录）"""

    REFERENCE_DATASET = "resources/data/mehra_prescott_1889_1978.csv"
    REFERENCE_PROJECTION = "resources/data/projection_1978.csv"

    # 环境变量与 .env 文件中的数据集路径
    DATASET_ENV = "RAC_DATASET"


class ChineseText:
    """命令行中文字符串配置"""

    PROG_DESCRIPTION = "风险态度校准与分类工具 (1889-1978 年度数据)"
    CMD_INGEST = "校验数据集并输出样本统计量"
    CMD_CALIBRATE = "求解 (ζ, ξ, ρ) 三方程组"
    CMD_CLASSIFY = "对股票与无风险资产投资者进行风险态度分类"

    # 参数帮助
    HELP_DATASET = "数据集CSV路径 (默认: 环境变量 RAC_DATASET 或内置数据)"
    HELP_PROJECTION = "1978 年预测值CSV路径 (默认: 内置数据)"
    HELP_CONFIG = "JSON配置文件路径"
    HELP_BETA = "主观时间折现因子 β"
    HELP_GROUP = "定义组: one | two"
    HELP_TOL = "效用相等判定容差"
    HELP_VARIANT = "数据版本: realized | projected | both"
    HELP_INVESTOR = "投资者类型: equity | riskfree | both"
    HELP_ETA = "覆盖充分性因子 η"
    HELP_RHO = "覆盖相对风险厌恶系数 ρ"
    HELP_FORMAT = "输出格式: text | csv | json"
    HELP_VERBOSE = "输出调试日志"

    # 摘要
    INGEST_SUMMARY = "数据集: {n} 年, {start}–{end}"
    INGEST_GROWTH = "消费增长率: 均值 {mean:.6f}, 标准差 {std:.6f}"
    INGEST_LOG_GROWTH = "对数增长: μ_x = {mu:.6f}, σ_x² = {s2:.8f}"
    INGEST_LEVELS = "对数消费水平: μ_z = {mu:.6f}, σ_z² = {s2:.6f}"
    INGEST_RETURNS = "平均毛收益率: E(R_e) = {re:.6f}, R_f = {rf:.6f}"
    INGEST_GAP = "一致性缺口: {gap:.6e}"
    INGEST_PROJECTION = "1978 年预测人均实际消费: {value:.6f}"

    CALIBRATION_TITLE = "校准结果 ({variant}, β = {beta})"
    TABLE_EQUITY = "股票投资者类型 (1889-1978)"
    TABLE_RISKFREE = "无风险资产投资者类型 (1889-1978)"

    ERROR_PREFIX = "错误"
    ERROR_HINT = "说明"

    # 命令说明（argparse epilog）
    HELP_CONTENT = [
        "操作说明:",
        "",
        "--- 命令 ---",
        "ingest: 校验数据集CSV，输出年份范围、增长率与对数消费统计量",
        "calibrate: 求解充分性因子 ζ, ξ 与相对风险厌恶系数 ρ",
        "classify: 计算确定/不确定效用并给出两类投资者的类型表",
        "",
        "--- 数据 ---",
        "数据集列: year,consumption_per_capita,equity_gross_return,riskfree_gross_return",
        "预测值列: nondurables_bn,services_bn,gnp_deflator,population",
        "未指定 --dataset 时依次使用 RAC_DATASET（可写在 .env 中）与内置数据",
        "",
        "--- 退出码 ---",
        "0: 成功",
        "1: 输入错误（文件、列、参数）",
        "2: 数值或分类错误（不收敛、方程组退化、无法分类）",
    ]


# ==================== 配置文件处理 ====================
def load_config_file(path):
    """
    读取JSON配置文件

    Args:
        path: 配置文件路径，None 表示不使用配置文件

    Returns:
        dict: 配置项（键与命令行参数同名）
    """
    if not path:
        return {}

    if not os.path.exists(path):
        raise InputError(f"配置文件不存在: {path}")

    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InputError(f"配置文件格式错误: {path}: {e}") from e

    if not isinstance(data, dict):
        raise InputError(f"配置文件顶层必须是对象: {path}")

    logger.debug(f"✓ 读取配置文件: {path} ({len(data)} 项)")
    return data


def pick(name, flags: dict, file_config: dict, default=None, env_value=None):
    """按 命令行参数 > 配置文件 > 环境变量 > 默认值 的优先级取值"""
    if flags.get(name) is not None:
        return flags[name]
    if file_config.get(name) is not None:
        return file_config[name]
    if env_value:
        return env_value
    return default
