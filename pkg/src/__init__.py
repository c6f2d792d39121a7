"""
风险态度校准与分类工具 - 主包
"""
__version__ = "1.0"
