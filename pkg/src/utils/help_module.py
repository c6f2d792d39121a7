from typing import List, Optional, Type

# 导入配置
from src.core.config import ChineseText
from src.core.errors import (
    ClassificationError,
    DegenerateSystem,
    EmptyReport,
    InputError,
    InvalidCombination,
    InvalidParameter,
    MissingYear,
    NegativeVariance,
    NoConvergence,
    NonPositiveConsumption,
    NonPositiveValue,
    NumericalError,
    RiskAttitudeError,
    SchemaError,
    SeriesTooShort,
    UndefinedAtLogLimit,
    Unclassifiable,
)

# 错误类别 → 中文说明
EXPLANATIONS = {
    SchemaError: "CSV表头或单元格不符合约定格式，请对照 ingest 帮助中的列名检查文件",
    MissingYear: "年份必须逐年连续，缺失的年份会让增长率错位",
    NonPositiveValue: "消费与毛收益率必须为正，否则对数无定义",
    SeriesTooShort: "至少需要两年的数据才能计算增长率",
    NegativeVariance: "对数方差不能为负",
    NonPositiveConsumption: "效用只对正消费有定义",
    UndefinedAtLogLimit: "未平移的CRRA效用在 ρ = 1 处无定义，请改用平移形式",
    InvalidParameter: "参数越界: β ∈ (0, 1]，η > 0，ρ ≥ 0，容差 ≥ 0",
    EmptyReport: "没有可输出的结果行",
    NoConvergence: "在 ρ ∈ [0, 60] 内找不到满足方程组的解，或解超出充分性因子的范围",
    DegenerateSystem: "样本严格满足对数正态均值恒等式（或股票协方差等于消费方差），ρ 无法由方程组识别",
    Unclassifiable: "效用比较不满足任何定义；零效用分配 (η = 1) 不属于任何投资者类型",
    InvalidCombination: "确定效用曲线水平时，\"not enough risk-averse\" 不成立",
    InputError: "输入不合法",
    NumericalError: "数值求解失败",
    ClassificationError: "无法分类",
}


class HelpModule:
    """命令说明与错误解释，支持中文"""

    def __init__(self, instructions_content: Optional[List[str]] = None):
        """
        初始化帮助模块

        Args:
            instructions_content: 中文说明内容，缺省使用 ChineseText.HELP_CONTENT
        """
        self.raw_instructions = instructions_content or ChineseText.HELP_CONTENT

    def epilog(self) -> str:
        """argparse 的结尾说明"""
        return "\n".join(self.raw_instructions)

    @staticmethod
    def explanation_for(error_type: Type[BaseException]) -> Optional[str]:
        """沿继承链查找最具体的说明"""
        for cls in error_type.__mro__:
            if cls in EXPLANATIONS:
                return EXPLANATIONS[cls]
        return None

    def explain(self, error: RiskAttitudeError) -> str:
        """
        生成面向用户的错误信息

        Returns:
            str: "错误 [类名]: 消息" 与一行说明
        """
        lines = [f"{ChineseText.ERROR_PREFIX} [{type(error).__name__}]: {error}"]
        hint = self.explanation_for(type(error))
        if hint:
            lines.append(f"{ChineseText.ERROR_HINT}: {hint}")
        return "\n".join(lines)
