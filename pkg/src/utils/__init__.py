"""
工具模块包
"""
from .help_module import HelpModule
from .report import OutputFormat, ReportRow, render_table
