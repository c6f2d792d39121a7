"""
errors.py
风险态度工具包的异常层次

库函数只负责抛出异常，退出码由命令行层统一转换：
    0 成功, 1 输入错误, 2 数值/分类错误
"""


class RiskAttitudeError(Exception):
    """所有错误的基类"""

    exit_code = 1

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.__class__.__name__)
        self.context = context


# ==================== 输入错误 (退出码 1) ====================
class InputError(RiskAttitudeError, ValueError):
    """输入数据或参数不合法"""

    exit_code = 1


class SchemaError(InputError):
    """CSV表头或列不符合约定的格式"""


class MissingYear(InputError):
    """年份列不连续"""


class NonPositiveValue(InputError):
    """消费或收益率 ≤ 0"""


class SeriesTooShort(InputError):
    """序列长度不足以计算增长率"""


class NegativeVariance(InputError):
    """对数方差为负"""


class NonPositiveConsumption(InputError):
    """消费 ≤ 0，效用无定义"""


class UndefinedAtLogLimit(InputError):
    """未平移形式的CRRA效用在 ρ = 1 处无定义"""


class InvalidParameter(InputError):
    """β、η、ρ、持仓等参数越界"""


class EmptyReport(InputError):
    """没有可渲染的行"""


# ==================== 数值错误 (退出码 2) ====================
class NumericalError(RiskAttitudeError, ArithmeticError):
    """求解过程失败"""

    exit_code = 2


class NoConvergence(NumericalError):
    """迭代次数耗尽或搜索区间内无根"""


class DegenerateSystem(NumericalError):
    """方程组秩不足，ρ 无法识别"""


# ==================== 分类错误 (退出码 2) ====================
class ClassificationError(RiskAttitudeError):
    """效用比较结果不对应任何定义"""

    exit_code = 2


class Unclassifiable(ClassificationError):
    """组合不满足任何一条定义（例如零效用分配）"""


class InvalidCombination(ClassificationError):
    """定义在当前曲线形状下不成立（水平曲线上的 not enough risk-averse）"""
